#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "noisytr/core.hpp"
#include "noisytr/rng.hpp"

namespace noisytr {

struct ZerothSample {
  double value = 0.0;
  double error = 0.0;
};

struct OracleLogEntry {
  Vector input;
  double error_norm = 0.0;
  bool in_spec = true;
};

// Chooses (e_k, e_k_plus) from (phi(x_k), phi(x_k + s_k)).
using NoisePairHook = std::function<std::pair<double, double>(double phi_x, double phi_xs)>;

// S (U + Y) with S uniform on {-1,+1}, U ~ Uniform[0, eps_f], Y ~ Exp(rate a).
double sample_subexponential_noise(double eps_f, double a, Rng& rng);

// f(x) = phi(x) + e.
class ZerothOracle {
 public:
  enum class Mode { kExact, kBoundedUniform, kBoundedAdversarial, kSubexponential };

  static ZerothOracle exact(Objective obj);
  static ZerothOracle bounded_uniform(Objective obj, double eps_f, std::uint64_t seed);
  // Pair evaluations route through `hook` (adversarial_noise_pair by default);
  // single evaluations use the hook with phi_xs = phi_x.
  static ZerothOracle bounded_adversarial(Objective obj, double eps_f, NoisePairHook hook = {});
  static ZerothOracle subexponential(Objective obj, double eps_f, double a, std::uint64_t seed);

  ZerothSample sample(const Vector& x);
  // f at x_k and at x_k + s_k, in that order.
  std::pair<ZerothSample, ZerothSample> sample_pair(const Vector& x, const Vector& x_plus);

  Mode mode() const { return mode_; }
  const Objective& objective() const { return obj_; }
  double eps_f() const { return eps_f_; }
  double a() const { return a_; }
  // Deterministic bound on |e|: eps_f for bounded modes, +inf for subexponential.
  double error_bound() const;

  long evaluations() const { return static_cast<long>(phi_history_.size()); }
  // True phi at every evaluated point, in call order.
  const std::vector<double>& phi_history() const { return phi_history_; }
  void set_logging(bool on) { logging_ = on; }
  const std::vector<OracleLogEntry>& log() const { return log_; }

 private:
  ZerothOracle(Mode mode, Objective obj, double eps_f, double a, std::uint64_t seed);
  double draw_error();
  void record(const Vector& x, double phi, double e);

  Mode mode_;
  Objective obj_;
  double eps_f_;
  double a_;
  Rng rng_;
  NoisePairHook hook_;
  bool logging_ = false;
  std::vector<OracleLogEntry> log_;
  std::vector<double> phi_history_;
};

// Finite-difference schemes.
enum class FdScheme { kForward, kSecondOrder };

// Forward differences on {x, x + sigma u_i}: n + 1 evaluations.
Vector fd_gradient(ZerothOracle& z, const Vector& x, double sigma);
// (4 f(x + sigma u_i) - f(x + 2 sigma u_i) - 3 f(x)) / (2 sigma): 2n + 1 evaluations.
Vector fd2_gradient(ZerothOracle& z, const Vector& x, double sigma);
// Second differences on {x, x + sigma u_i, x + sigma u_i + sigma u_j}:
// (n+1)(n+2)/2 evaluations, output symmetrized.
Matrix fd_hessian(ZerothOracle& z, const Vector& x, double sigma);

// Deterministic error bounds under |e| <= eps_hat.
double fd_gradient_bound(int n, double L1, double sigma, double eps_hat);
double fd2_gradient_bound(int n, double L2, double sigma, double eps_hat);
double fd_hessian_bound(int n, double L2, double sigma, double eps_hat);

enum class SigmaKind { kGradFd, kHessFd, kGradFd2 };
struct SigmaChoice {
  double sigma = 0.0;
  double bound = 0.0;
};
// Minimizer of the corresponding bound over sigma and the bound it attains.
SigmaChoice optimal_sigma(SigmaKind kind, double eps_f, double L, int n);

struct GradientSample {
  Vector g;
  bool in_spec = true;
  // Filled by the adversarial oracle.
  std::string branch;
  double y1 = 0.0;
  double y2 = 0.0;
};

struct CorruptionSpec {
  double eps = 0.0;
  double kappa = 0.0;
  double p = 1.0;
  double outlier_scale = 10.0;
};

using GradientDelegate = std::function<GradientSample(const Vector& x, double delta1)>;

class FirstOracle {
 public:
  enum class Mode { kExact, kCorrupted, kFiniteDifference, kAdversarial };

  static FirstOracle exact(Objective obj);
  // In-spec with probability spec.p: error uniform in the ball of radius
  // eps + kappa * delta1. Otherwise the error has norm
  // outlier_scale * (eps + kappa * delta1) in a uniform direction.
  static FirstOracle corrupted(Objective obj, CorruptionSpec spec, std::uint64_t seed);
  // Uses `z` for evaluations; `z` must outlive the oracle. in_spec reports
  // whether every stencil error stayed within eps_hat.
  static FirstOracle finite_difference(ZerothOracle& z, FdScheme scheme, double sigma,
                                       double eps_hat);
  static FirstOracle adversarial(GradientDelegate delegate, double eps_g, double kappa_eg);

  // `p` is the requested reliability. The corrupted mode uses its own p.
  GradientSample sample(const Vector& x, double delta1, double p = 1.0);

  Mode mode() const { return mode_; }
  // Declared accuracy (eps_g, kappa_eg) used for the I_k diagnostics.
  double eps_g() const { return eps_; }
  double kappa_eg() const { return kappa_; }
  void set_logging(bool on) { logging_ = on; }
  const std::vector<OracleLogEntry>& log() const { return log_; }

 private:
  FirstOracle(Mode mode, std::optional<Objective> obj, std::uint64_t seed);

  Mode mode_;
  std::optional<Objective> obj_;
  Rng rng_;
  CorruptionSpec spec_;
  double eps_ = 0.0;
  double kappa_ = 0.0;
  ZerothOracle* z_ = nullptr;
  FdScheme scheme_ = FdScheme::kForward;
  double sigma_ = 0.0;
  double eps_hat_ = 0.0;
  GradientDelegate delegate_;
  bool logging_ = false;
  std::vector<OracleLogEntry> log_;
};

struct HessianSample {
  Matrix H;
  bool in_spec = true;
};

class SecondOracle {
 public:
  enum class Mode { kExact, kCorrupted, kFiniteDifference };

  static SecondOracle exact(Objective obj);
  // As FirstOracle::corrupted with spectral-norm balls; perturbations are
  // random symmetric matrices rescaled to the drawn norm.
  static SecondOracle corrupted(Objective obj, CorruptionSpec spec, std::uint64_t seed);
  static SecondOracle finite_difference(ZerothOracle& z, double sigma, double eps_hat);

  HessianSample sample(const Vector& x, double delta2, double p = 1.0);

  Mode mode() const { return mode_; }
  double eps_H() const { return eps_; }
  double kappa_eh() const { return kappa_; }
  void set_logging(bool on) { logging_ = on; }
  const std::vector<OracleLogEntry>& log() const { return log_; }

 private:
  SecondOracle(Mode mode, std::optional<Objective> obj, std::uint64_t seed);

  Mode mode_;
  std::optional<Objective> obj_;
  Rng rng_;
  CorruptionSpec spec_;
  double eps_ = 0.0;
  double kappa_ = 0.0;
  ZerothOracle* z_ = nullptr;
  double sigma_ = 0.0;
  double eps_hat_ = 0.0;
  bool logging_ = false;
  std::vector<OracleLogEntry> log_;
};

// Finite-sum population of losses l_j(x) = 1/2 |x - d_j|^2 with uniform
// sampling; phi is their mean.
class QuadraticPopulation {
 public:
  // Columns of `data` are the d_j. Throws ConfigError when empty.
  explicit QuadraticPopulation(Matrix data);

  int dim() const { return static_cast<int>(data_.rows()); }
  Vector sample_gradient(const Vector& x, Rng& rng) const;
  Vector mean_gradient(const Vector& x) const;
  // sigma with E|grad l - grad phi|^2 = sigma^2.
  double sigma() const { return sigma_; }

 private:
  Matrix data_;
  Vector mean_;
  double sigma_;
};

// ceil(min{n_max, ((1 - p1) delta1)^-2}).
long minibatch_size(double delta1, double p1, double n_max);

struct MinibatchSample {
  Vector g;
  long batch_size = 0;
};

MinibatchSample minibatch_gradient_oracle(const QuadraticPopulation& pop, const Vector& x,
                                          double delta1, double p1, double n_max, Rng& rng);

}  // namespace noisytr
