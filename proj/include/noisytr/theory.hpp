#pragma once

#include <limits>
#include <string>
#include <utility>

#include "noisytr/core.hpp"

namespace noisytr {

struct FirstOrderInputs {
  double L1 = 1.0;
  double kappa_bhm = 0.0;
  double kappa_eg = 1.0;
  double kappa_fcd = 1.0;
  double eta1 = 0.25;
  double eta2 = 1.0;
};

struct FirstOrderConstants {
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  FirstOrderInputs in;
};

struct SecondOrderInputs {
  double L2 = 1.0;
  double kappa_bhm = 0.0;
  double kappa_eg = 1.0;
  double kappa_eh = 1.0;
  double kappa_fod = 1.0;
  double eta1 = 0.25;
  double eta2 = 1.0;
};

struct SecondOrderConstants {
  double C4 = 0.0;
  double C5 = 0.0;
  double C6 = 0.0;
  double C7 = 0.0;
  double C8 = 0.0;
  SecondOrderInputs in;
};

// Throws ConfigError unless eta1 in (0,1) and the remaining inputs are
// admissible. kappa_bhm = 0 is allowed: eta2/kappa_bhm is then +inf.
FirstOrderConstants constants_first(const FirstOrderInputs& in);
SecondOrderConstants constants_second(const SecondOrderInputs& in);

// Guaranteed decrease on successful iterations.
double h_first(const FirstOrderConstants& c, double delta);
double h_second(const SecondOrderConstants& c, double delta);

// max{C4 |grad phi| - C5 eps_g, -C6 lambda_min(hess phi) - C7 eps_H}.
double beta(const Vector& x, const Objective& obj, const SecondOrderConstants& c, double eps_g,
            double eps_H);

// C1 min_k |grad phi(x_k)| - C2 eps_g.
double delta_bar(double min_true_grad_norm, const FirstOrderConstants& c, double eps_g);

enum class Regime { kFirstBounded, kFirstSubexp, kSecondBounded, kSecondSubexp };
enum class Order { kFirst, kSecond };

const char* regime_name(Regime r);
Regime parse_regime(const std::string& name);
bool is_first_order(Regime r);
bool is_subexp(Regime r);

struct NoiseLevels {
  double eps_f = 0.0;
  double eps_g = 0.0;
  double eps_H = 0.0;
  // Subexponential rate; ignored by bounded regimes.
  double a = std::numeric_limits<double>::infinity();
};

struct FloorResult {
  double value = 0.0;
  bool valid = true;
  // Why the floor is +inf when !valid.
  std::string reason;
};

// Smallest certifiable tolerance. +inf with valid = false when the
// probability denominator is not positive.
FloorResult epsilon_floor(Regime regime, const NoiseLevels& noise, const TrParams& params,
                          const FirstOrderConstants& c);
FloorResult epsilon_floor(Regime regime, const NoiseLevels& noise, const TrParams& params,
                          const SecondOrderConstants& c);

// Probability that the zeroth-order noise pair is small enough:
// first:  1 - 2 exp(a (eps_f - r/2));
// second: 1 - 2 exp(a/2 (2 eps_f + eps_g^{3/2} - r)).
double p0(Order order, double eps_f, double eps_g, double a, double r);

// p_hat: lower estimate of p1 (first order) or p1 p2 (second order).
// p_hat0: lower estimate of p0 for the subexponential regimes.
struct PHats {
  double p_hat = 0.0;
  double p_hat0 = 0.0;
};

struct Anchors {
  // |grad phi(x0)| (first order) or beta(x0) (second order).
  double stationarity0 = 0.0;
  double delta0 = 0.0;
  double phi0 = 0.0;
  double phi_hat = 0.0;
};

// Smallest T satisfying the iteration-count condition of the high-probability
// theorems. Throws ConfigError("below achievable accuracy") when epsilon is not
// above the floor or the p_hat choice leaves a nonpositive denominator.
long iteration_bound(Regime regime, double epsilon, const PHats& p_hats, double t_shift,
                     const NoiseLevels& noise, const TrParams& params,
                     const FirstOrderConstants& c, const Anchors& anchors);
long iteration_bound(Regime regime, double epsilon, const PHats& p_hats, double t_shift,
                     const NoiseLevels& noise, const TrParams& params,
                     const SecondOrderConstants& c, const Anchors& anchors);

// Tail mass bounding the failure probability, clipped to [0,1]:
// exp(-(1 - p_hat/p)^2 T/2) [+ exp(-(1 - p_hat0/p0)^2 T/2) + exp(-a t/4)].
double failure_prob(Regime regime, long T, const PHats& p_hats, double p_true, double p0_true,
                    double a, double t_shift);

// exp(-(1 - p_hat/p)^2 T/2).
double azuma_tail(long T, double p, double p_hat);

struct PHatChoice {
  double value = 0.0;
  // Unclipped formula value.
  double raw = 0.0;
  // Admissible interval (lower, upper]; lower is the T -> inf limit.
  double lower = 0.0;
  double upper = 0.0;
  bool clipped = false;
};

// The p_hat that makes T equal the iteration bound (bounded regimes):
// 1/2 + (2 eps_f + r)/X + [bracket]/T.
PHatChoice optimal_p_hat(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                         const TrParams& params, const FirstOrderConstants& c,
                         const Anchors& anchors);
PHatChoice optimal_p_hat(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                         const TrParams& params, const SecondOrderConstants& c,
                         const Anchors& anchors);

// Exponent of the corollary tail, computed from its own closed form:
// -{(p - 1/2 - (2 eps_f + r)/X) T - [bracket]}^2 / (2 p^2 T).
double corollary_exponent(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                          const TrParams& params, const FirstOrderConstants& c,
                          const Anchors& anchors);
double corollary_exponent(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                          const TrParams& params, const SecondOrderConstants& c,
                          const Anchors& anchors);

// Split a required sum p_hat0 + p_hat1 so that both Azuma terms are equal:
// p_hat0/p0 = p_hat1/p1.
PHats split_p_hat_sum(double sum, double p0_true, double p1_true);

}  // namespace noisytr
