#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "noisytr/core.hpp"
#include "noisytr/oracles.hpp"
#include "noisytr/rng.hpp"

namespace noisytr {

// Worst-case oracle for phi(x) = L1 |x|^2 / 2 with linear models and steps
// s = -delta g/|g|. In the variables y1 = <x, g/|g|>, y2 = |g| the true change
// is phi(x+s) - phi(x) = L1 delta (delta/2 - y1), so the step loses progress
// iff y1 < delta/2.

struct AdversaryConstants {
  double L1 = 1.0;
  double eps_f = 0.0;
  double eps_g = 0.0;
  double kappa_eg = 1.0;
  double eta1 = 0.25;
  double r = 0.0;
};

struct YSolution {
  double y1 = 0.0;
  double y2 = 0.0;
  bool feasible = false;
  // Set when x = 0 or the program does not apply (hyperbola degenerate).
  bool degenerate = false;
  // y1 for the most-loss and least-gain programs, eta1 y2 - L1 y1 for the
  // reject programs.
  double objective_value = 0.0;
};

// (-eps_f, +eps_f) for a descent step, (+eps_f, -eps_f) otherwise.
std::pair<double, double> adversarial_noise_pair(double phi_x, double phi_xs, double eps_f);

// min{1e-6, 1e-2 |L1 x|}.
double y2_floor(const Vector& x, double L1);

// Minimize y1 subject to the acceptance constraint (rho computed with +2eps_f)
//   eta1 y2 - L1 y1 <= (2 eps_f + r)/delta - L1 delta/2,
// |y1| <= |x|, y2 >= y2_floor and, when `accurate`, the accuracy hyperbola
//   y2^2 - 2 L1 y1 y2 + (L1 |x|)^2 <= (kappa_eg delta + eps_g)^2.
// Acceptance carries a 1e-9 margin on y1. When y1 = -|x| is optimal the
// largest feasible y2 is returned.
YSolution solve_most_loss(const Vector& x, double delta, bool accurate,
                          const AdversaryConstants& c);

enum class RejectProgram { kAscent, kDescent };

// Maximize eta1 y2 - L1 y1 over the accuracy hyperbola with y1 < delta/2
// (ascent, slack 1e-7) or y1 >= delta/2 (descent). Degenerate when
// L1 |x| <= kappa_eg delta + eps_g.
YSolution solve_reject(RejectProgram which, const Vector& x, double delta,
                       const AdversaryConstants& c);

// The rejection threshold (+-2 eps_f + r)/delta - L1 delta/2; + for ascent.
double reject_threshold(RejectProgram which, double delta, const AdversaryConstants& c);

// Minimize y1 over the accuracy hyperbola (no acceptance constraint).
YSolution solve_least_gain(const Vector& x, double delta, const AdversaryConstants& c);

// g = alpha1 x + alpha2 v with <x, g/|g|> = y1 and |g| = y2; v is a random
// unit vector redrawn while |<v, x/|x|>| > 0.99.
Vector recover_gradient(const YSolution& y, const Vector& x, Rng& rng);

struct AdversarialDecision {
  Vector g;
  bool I_k = true;
  std::string branch;
  YSolution y;
};

AdversarialDecision adversarial_first_oracle(const Vector& x, double delta,
                                             const AdversaryConstants& c, double p1, Rng& rng);

// FirstOracle wrapper around adversarial_first_oracle. `obj` must be
// scaled_sphere with curvature c.L1.
FirstOracle make_adversarial_first_oracle(const Objective& obj, const AdversaryConstants& c,
                                          double p1, std::uint64_t seed);

}  // namespace noisytr
