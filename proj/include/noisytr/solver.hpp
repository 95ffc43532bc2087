#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "noisytr/core.hpp"
#include "noisytr/oracles.hpp"
#include "noisytr/theory.hpp"

namespace noisytr {

// Model Hessian for the first-order method, given x_k and g_k. Must be symmetric with
// ||H|| <= kappa_bhm.
using HessianProvider = std::function<Matrix(const Vector& x, const Vector& g)>;

// H_k = 0 (linear models).
HessianProvider zero_hessian();
// Exact Hessian with eigenvalues clipped to [-kappa_bhm, kappa_bhm].
HessianProvider clipped_exact_hessian(const Objective& obj, double kappa_bhm);

struct RunOptions {
  // When set, beta(x_k) is recorded with these constants and tolerances.
  std::optional<SecondOrderConstants> beta_constants;
  double beta_eps_g = 0.0;
  double beta_eps_H = 0.0;
  // Early exit once delta drops below this value.
  double radius_floor = 1e-14;
  // Stop before an iteration once this many zeroth-order evaluations were
  // used (0 disables).
  long max_evaluations = 0;
  // Stop after an iteration whose |grad phi(x_k)| is at most this value.
  // Diagnostic only; off by default.
  std::optional<double> stop_true_grad_norm;
};

// (f_k - f_k_plus + r) / decrease. Throws ContractViolation for decrease <= 0.
double compute_rho(double f_k, double f_k_plus, double r, double decrease);

// First-order method: Cauchy steps on (g_k, H_k), g_k requested with input delta_k.
// Runs params.budget iterations unless the radius underflows.
RunTrace run_tr1(const Objective& obj, ZerothOracle& z, FirstOracle& g1,
                 const HessianProvider& hk, const TrParams& params, const Vector& x0,
                 std::uint64_t seed, const RunOptions& options = {});

// Second-order method: g_k requested with delta_k^2, H_k with delta_k, steps from
// second_order_step and growth test max{||g_k||, -lambda_min(H_k)} >= eta2 delta_k.
RunTrace run_tr2(const Objective& obj, ZerothOracle& z, FirstOracle& g1, SecondOracle& g2,
                 const TrParams& params, const Vector& x0, std::uint64_t seed,
                 const RunOptions& options = {});

}  // namespace noisytr
