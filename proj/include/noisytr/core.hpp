#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisytr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when user-supplied configuration is invalid (bad names, out of range
// parameters). The CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a computation produces a non-finite or otherwise unusable
// number. The CLI maps it to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ObjectiveFunction {
 public:
  virtual ~ObjectiveFunction() = default;
  virtual double eval(const Vector& x) const = 0;
  virtual Vector grad(const Vector& x) const = 0;
  virtual Matrix hess(const Vector& x) const = 0;
};

// Smooth objective phi with its smoothness constants. Immutable; copies share
// the underlying function.
class Objective {
 public:
  Objective(std::string name, int dim, std::shared_ptr<const ObjectiveFunction> fn,
            double L1, double L2, double phi_hat);

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double eval(const Vector& x) const;
  Vector grad(const Vector& x) const;
  Matrix hess(const Vector& x) const;

  // Lipschitz constant of the gradient.
  double L1() const { return L1_; }
  // Lipschitz constant of the Hessian.
  double L2() const { return L2_; }
  // Lower bound on phi; -inf when phi is unbounded below.
  double phi_hat() const { return phi_hat_; }

 private:
  void check_dim(const Vector& x) const;

  std::string name_;
  int dim_;
  std::shared_ptr<const ObjectiveFunction> fn_;
  double L1_;
  double L2_;
  double phi_hat_;
};

// Parameters for builtin_objective. Unused fields are ignored by objectives
// that do not need them.
struct ObjectiveSpec {
  std::string name;
  int dim = 2;
  // scaled_sphere curvature.
  double L1 = 1.0;
  // indefinite_quadratic: A = diag(diag) when A is empty.
  std::vector<double> diag;
  Matrix A;
  // indefinite_quadratic confinement: phi += quartic/4 * |x|^4.
  double quartic = 1.0;
  // Box half-width (infinity norm) on which L1/L2 of the non-quadratic
  // objectives are valid; also the ball radius for the confined quadratic.
  double region = 2.0;
};

// Built-in objectives: scaled_sphere, indefinite_quadratic, rosenbrock,
// powell_singular, trigonometric.
Objective builtin_objective(const ObjectiveSpec& spec);

// phi_s(x) = scale * (phi(x) - phi_hat) with scale chosen so that
// phi_s(x0) = target. Requires a finite phi_hat and phi(x0) > phi_hat.
Objective rescaled(const Objective& obj, const Vector& x0, double target = 100.0);

// Model m(x_k + s) - m(x_k) = <g,s> + 1/2 <Hs,s>.
struct QuadraticModel {
  QuadraticModel(Vector center, Vector g, Matrix H);

  Vector center;
  Vector g;
  Matrix H;
};

double model_eval(const QuadraticModel& model, const Vector& s);
double model_decrease(const QuadraticModel& model, const Vector& s);

struct TrParams {
  double eta1 = 0.25;
  double eta2 = 1.0;
  double gamma = 0.8;
  double r = 0.0;
  double delta0 = 0.5;
  double kappa_fcd = 1.0;
  double kappa_fod = 1.0;
  double p1 = 0.8;
  double p2 = 1.0;
  int budget = 100;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

struct IterationRecord {
  int k = 0;
  Vector x;
  double delta = 0.0;
  double g_norm = 0.0;
  // ||H_k||_2 and lambda_min(H_k) of the model.
  double h_norm = 0.0;
  double h_lambda_min = 0.0;
  // max{||g_k||, -lambda_min(H_k)} for the second-order method, ||g_k|| for the first-order one.
  double beta_m = 0.0;
  double step_norm = 0.0;
  double model_decrease = 0.0;
  // NaN when the zero-decrease guard rejected the step.
  double rho = 0.0;
  bool accepted = false;
  bool success = false;
  double true_grad_norm = 0.0;
  double phi_value = 0.0;
  double phi_trial = 0.0;
  double f_k = 0.0;
  double f_k_plus = 0.0;
  double e_k = 0.0;
  double e_k_plus = 0.0;
  // True model errors ||g_k - grad phi||, ||H_k - hess phi||_2.
  double g_error = 0.0;
  double h_error = 0.0;
  // Oracle-reported in-spec events.
  bool g_in_spec = true;
  bool h_in_spec = true;
  // Indicators recomputed from the true errors.
  bool I_k = true;
  bool J_k = true;
  // beta(x_k) when second-order constants were supplied, else NaN.
  double beta = 0.0;
  // Adversary branch label, empty for non-adversarial oracles.
  std::string adversary_branch;
  double adversary_y1 = 0.0;
  double adversary_y2 = 0.0;
};

struct TraceSummary {
  double min_true_grad_norm = 0.0;
  double min_beta = 0.0;
  double final_phi = 0.0;
};

struct RunTrace {
  std::vector<IterationRecord> records;
  std::uint64_t seed = 0;
  TrParams params;
  TraceSummary summary;
  Vector final_x;
  double final_delta = 0.0;
  double final_phi = 0.0;
  // Set when the radius dropped below the underflow guard.
  bool radius_underflow = false;
  // True phi at every zeroth-order evaluation point, in call order.
  std::vector<double> phi_per_evaluation;

  TraceSummary recompute_summary() const;
};

}  // namespace noisytr
