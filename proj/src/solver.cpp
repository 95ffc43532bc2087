#include "noisytr/solver.hpp"

#include <cmath>
#include <limits>

#include "noisytr/subproblem.hpp"

namespace noisytr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Relative slack for the indicator comparisons, so that draws exactly on the
// boundary of the accuracy ball are not misclassified by rounding.
bool within(double value, double bound) {
  return value <= bound * (1.0 + 1e-12) + 1e-12;
}

enum class Variant { kFirst, kSecond };

struct ModelDraw {
  Vector g;
  Matrix H;
  GradientSample gs;
  bool h_in_spec = true;
};

RunTrace run(Variant variant, const Objective& obj, ZerothOracle& z, FirstOracle& g1,
             SecondOracle* g2, const HessianProvider* hk, const TrParams& params,
             const Vector& x0, std::uint64_t seed, const RunOptions& options) {
  params.validate();
  if (x0.size() != obj.dim()) throw ContractViolation("x0 dimension does not match objective");

  RunTrace trace;
  trace.seed = seed;
  trace.params = params;
  const std::size_t eval_start = z.phi_history().size();

  Vector x = x0;
  double delta = params.delta0;
  const double eps_g = g1.eps_g();
  const double kappa_eg = g1.kappa_eg();
  const double eps_H = g2 ? g2->eps_H() : 0.0;
  const double kappa_eh = g2 ? g2->kappa_eh() : 0.0;
  const double j_extra = variant == Variant::kSecond ? std::pow(eps_g, 1.5) : 0.0;

  for (int k = 0; k < params.budget; ++k) {
    if (options.max_evaluations > 0 &&
        static_cast<long>(z.phi_history().size() - eval_start) >= options.max_evaluations) {
      break;
    }
    IterationRecord rec;
    rec.k = k;
    rec.x = x;
    rec.delta = delta;
    rec.phi_value = obj.eval(x);
    const Vector true_grad = obj.grad(x);
    rec.true_grad_norm = true_grad.norm();
    rec.beta = options.beta_constants
                   ? beta(x, obj, *options.beta_constants, options.beta_eps_g, options.beta_eps_H)
                   : kNaN;

    const double delta1 = variant == Variant::kFirst ? delta : delta * delta;
    GradientSample gs = g1.sample(x, delta1, params.p1);
    const Vector& g = gs.g;
    rec.g_norm = g.norm();
    rec.g_error = (g - true_grad).norm();
    rec.g_in_spec = gs.in_spec;
    rec.adversary_branch = gs.branch;
    rec.adversary_y1 = gs.y1;
    rec.adversary_y2 = gs.y2;

    Matrix H;
    if (variant == Variant::kFirst) {
      H = (*hk)(x, g);
    } else {
      HessianSample hs = g2->sample(x, delta, params.p2);
      H = std::move(hs.H);
      rec.h_in_spec = hs.in_spec;
    }
    const QuadraticModel model(x, g, H);

    Vector s;
    if (variant == Variant::kFirst) {
      rec.h_norm = H.isZero(0.0) ? 0.0 : spectral_norm_sym(H);
      rec.h_lambda_min = H.isZero(0.0) ? 0.0 : min_eigenpair(H).value;
      rec.beta_m = rec.g_norm;
      s = cauchy_step(model, delta);
      rec.model_decrease = model_decrease(model, s);
      rec.I_k = within(rec.g_error, eps_g + kappa_eg * delta);
    } else {
      const SymmetricEigen eig = jacobi_eigen(H);
      rec.h_lambda_min = eig.values(0);
      rec.h_norm = std::max(std::abs(eig.values(0)), std::abs(eig.values(eig.values.size() - 1)));
      rec.h_error = spectral_norm_sym(H - obj.hess(x));
      rec.beta_m = std::max(rec.g_norm, -rec.h_lambda_min);
      const SecondOrderStep st = second_order_step(model, delta);
      s = st.s;
      rec.model_decrease = st.decrease;
      rec.I_k = within(rec.g_error, eps_g + kappa_eg * delta * delta) &&
                within(rec.h_error, eps_H + kappa_eh * delta);
    }
    rec.step_norm = s.norm();

    if (!(rec.model_decrease > 0.0)) {
      // Zero model decrease: the step is rejected without evaluating f.
      rec.rho = kNaN;
      rec.f_k = kNaN;
      rec.f_k_plus = kNaN;
      rec.phi_trial = kNaN;
      rec.accepted = false;
    } else {
      const Vector x_trial = x + s;
      const auto [fk, fkp] = z.sample_pair(x, x_trial);
      rec.f_k = fk.value;
      rec.f_k_plus = fkp.value;
      rec.e_k = fk.error;
      rec.e_k_plus = fkp.error;
      rec.phi_trial = obj.eval(x_trial);
      rec.rho = compute_rho(rec.f_k, rec.f_k_plus, params.r, rec.model_decrease);
      rec.accepted = rec.rho >= params.eta1;
      if (rec.accepted) x = x_trial;
    }
    rec.J_k = params.r >= std::abs(rec.e_k) + std::abs(rec.e_k_plus) + j_extra;
    rec.success = rec.accepted && rec.beta_m >= params.eta2 * delta;
    delta = rec.success ? delta / params.gamma : delta * params.gamma;
    const bool reached = options.stop_true_grad_norm &&
                         rec.true_grad_norm <= *options.stop_true_grad_norm;
    trace.records.push_back(std::move(rec));
    if (reached) break;

    if (delta < options.radius_floor) {
      trace.radius_underflow = true;
      break;
    }
  }

  trace.final_x = x;
  trace.final_delta = delta;
  trace.final_phi = obj.eval(x);
  const auto& hist = z.phi_history();
  trace.phi_per_evaluation.assign(hist.begin() + static_cast<std::ptrdiff_t>(eval_start),
                                  hist.end());
  trace.summary = trace.recompute_summary();
  return trace;
}

}  // namespace

HessianProvider zero_hessian() {
  return [](const Vector& x, const Vector&) {
    return Matrix::Zero(x.size(), x.size()).eval();
  };
}

HessianProvider clipped_exact_hessian(const Objective& obj, double kappa_bhm) {
  if (!(kappa_bhm >= 0.0)) throw ConfigError("kappa_bhm must be nonnegative");
  return [obj, kappa_bhm](const Vector& x, const Vector&) {
    const SymmetricEigen eig = jacobi_eigen(obj.hess(x));
    const Vector clipped = eig.values.cwiseMax(-kappa_bhm).cwiseMin(kappa_bhm);
    Matrix H = eig.vectors * clipped.asDiagonal() * eig.vectors.transpose();
    return Matrix(0.5 * (H + H.transpose()));
  };
}

double compute_rho(double f_k, double f_k_plus, double r, double decrease) {
  if (!(decrease > 0.0)) throw ContractViolation("compute_rho requires a positive model decrease");
  return (f_k - f_k_plus + r) / decrease;
}

RunTrace run_tr1(const Objective& obj, ZerothOracle& z, FirstOracle& g1,
                 const HessianProvider& hk, const TrParams& params, const Vector& x0,
                 std::uint64_t seed, const RunOptions& options) {
  return run(Variant::kFirst, obj, z, g1, nullptr, &hk, params, x0, seed, options);
}

RunTrace run_tr2(const Objective& obj, ZerothOracle& z, FirstOracle& g1, SecondOracle& g2,
                 const TrParams& params, const Vector& x0, std::uint64_t seed,
                 const RunOptions& options) {
  return run(Variant::kSecond, obj, z, g1, &g2, nullptr, params, x0, seed, options);
}

}  // namespace noisytr
