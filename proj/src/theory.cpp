#include "noisytr/theory.hpp"

#include <algorithm>
#include <cmath>

#include "noisytr/subproblem.hpp"

namespace noisytr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_common(double eta1, double eta2, double kappa_bhm, double kappa_eg) {
  require(eta1 > 0.0 && eta1 < 1.0, "eta1 must lie in (0,1)");
  require(eta2 > 0.0, "eta2 must be positive");
  require(kappa_bhm >= 0.0, "kappa_bhm must be nonnegative");
  require(kappa_eg >= 0.0, "kappa_eg must be nonnegative");
}

// min{eta2/kappa_bhm, 1} with kappa_bhm = 0 giving 1.
double curvature_factor(double eta2, double kappa_bhm) {
  if (kappa_bhm == 0.0) return 1.0;
  return std::min(eta2 / kappa_bhm, 1.0);
}

double log_gamma(double v, double gamma) { return std::log(v) / std::log(gamma); }

double p_true_for(Regime regime, const TrParams& params) {
  return is_first_order(regime) ? params.p1 : params.p1 * params.p2;
}

// Pieces shared by the bound, the optimal p_hat and the corollary exponent.
struct BoundTerms {
  // h(gamma * target) style denominator X.
  double X = 0.0;
  // Per-iteration noise budget: 2 eps_f + r, plus 4/a when subexponential.
  double K = 0.0;
  // [ (phi0 - phi_hat [+ t]) / X + 1/2 log_gamma(min{...}) + 1/2 ].
  double bracket = 0.0;
  // x0 already satisfies the target.
  bool anchor_done = false;
};

void check_anchors(const Anchors& a) {
  require(std::isfinite(a.phi_hat), "phi_hat must be finite for an iteration bound");
  require(std::isfinite(a.phi0), "phi(x0) must be finite");
  require(a.delta0 > 0.0, "delta0 must be positive");
}

double noise_budget(Regime regime, const NoiseLevels& noise, const TrParams& params) {
  double K = 2.0 * noise.eps_f + params.r;
  if (is_subexp(regime)) {
    require(noise.a > 0.0, "subexponential rate a must be positive");
    K += 4.0 / noise.a;
  }
  return K;
}

BoundTerms terms_first(Regime regime, double epsilon, double t_shift, const NoiseLevels& noise,
                       const TrParams& params, const FirstOrderConstants& c,
                       const Anchors& anchors) {
  check_anchors(anchors);
  BoundTerms t;
  const double target = c.C1 * epsilon - c.C2 * noise.eps_g;
  t.X = c.C3 * params.gamma * params.gamma * target * target;
  t.K = noise_budget(regime, noise, params);
  double numer = anchors.phi0 - anchors.phi_hat;
  if (is_subexp(regime)) numer += t_shift;
  double log_term = 0.0;
  if (anchors.stationarity0 <= epsilon) {
    t.anchor_done = true;
  } else {
    const double anchor = c.C1 * anchors.stationarity0 - c.C2 * noise.eps_g;
    log_term = 0.5 * log_gamma(std::min(target / anchors.delta0, anchors.delta0 / anchor),
                               params.gamma);
  }
  t.bracket = numer / t.X + log_term + 0.5;
  return t;
}

BoundTerms terms_second(Regime regime, double epsilon, double t_shift, const NoiseLevels& noise,
                        const TrParams& params, const SecondOrderConstants& c,
                        const Anchors& anchors) {
  check_anchors(anchors);
  BoundTerms t;
  const double ge = params.gamma * epsilon;
  t.X = c.C8 * ge * ge * ge;
  t.K = noise_budget(regime, noise, params);
  double numer = anchors.phi0 - anchors.phi_hat;
  if (is_subexp(regime)) numer += t_shift;
  double log_term = 0.0;
  if (anchors.stationarity0 <= epsilon) {
    t.anchor_done = true;
  } else {
    log_term = 0.5 * log_gamma(
                         std::min(epsilon / anchors.delta0, anchors.delta0 / anchors.stationarity0),
                         params.gamma);
  }
  t.bracket = numer / t.X + log_term + 0.5;
  return t;
}

long bound_from_terms(Regime regime, const BoundTerms& t, const PHats& p_hats,
                      const NoiseLevels& noise, const TrParams& params) {
  if (t.anchor_done) return 1;
  const double p_true = p_true_for(regime, params);
  double denom;
  if (is_subexp(regime)) {
    const double p0_true =
        p0(is_first_order(regime) ? Order::kFirst : Order::kSecond, noise.eps_f, noise.eps_g,
           noise.a, params.r);
    require(p_hats.p_hat + p_hats.p_hat0 <= p_true + p0_true + 1e-15,
            "p_hat0 + p_hat exceeds p0 + p");
    denom = p_hats.p_hat0 + p_hats.p_hat - 1.5 - t.K / t.X;
  } else {
    require(p_hats.p_hat <= p_true + 1e-15, "p_hat exceeds the oracle probability");
    denom = p_hats.p_hat - 0.5 - t.K / t.X;
  }
  if (!(denom > 0.0)) throw ConfigError("below achievable accuracy: p_hat choice leaves a nonpositive denominator");
  const double T = std::ceil(t.bracket / denom);
  if (!std::isfinite(T) || T > 9.0e18) throw NumericError("iteration bound overflow");
  return std::max(1L, static_cast<long>(T));
}

void require_above_floor(const FloorResult& floor, double epsilon) {
  if (!floor.valid) throw ConfigError("below achievable accuracy: " + floor.reason);
  if (!(epsilon > floor.value)) throw ConfigError("below achievable accuracy");
}

PHatChoice choose_p_hat(const BoundTerms& t, long T, double p_true) {
  PHatChoice out;
  out.lower = 0.5 + t.K / t.X;
  out.upper = p_true;
  out.raw = T > 0 ? out.lower + t.bracket / static_cast<double>(T) : kInf;
  out.value = out.raw;
  if (out.raw > out.upper) {
    out.value = out.upper;
    out.clipped = true;
  }
  return out;
}

double exponent_from_terms(const BoundTerms& t, long T, double p) {
  const double Td = static_cast<double>(T);
  const double lead = (p - 0.5 - t.K / t.X) * Td - t.bracket;
  return -(lead * lead) / (2.0 * p * p * Td);
}

void require_bounded(Regime regime) {
  if (is_subexp(regime)) throw ConfigError("closed-form p_hat only exists for bounded regimes");
}

}  // namespace

FirstOrderConstants constants_first(const FirstOrderInputs& in) {
  check_common(in.eta1, in.eta2, in.kappa_bhm, in.kappa_eg);
  require(in.L1 >= 0.0, "L1 must be nonnegative");
  require(in.kappa_fcd > 0.0 && in.kappa_fcd <= 2.0, "kappa_fcd must lie in (0,2]");
  const double a = (1.0 - in.eta1) * in.kappa_fcd;
  const double D = in.L1 + in.kappa_bhm + 2.0 * in.kappa_eg + a * in.kappa_eg;
  const double growth = 1.0 / (in.kappa_eg + in.eta2);
  FirstOrderConstants c;
  c.in = in;
  c.C1 = std::min(a / D, growth);
  c.C2 = std::max((a + 2.0) / D, growth);
  c.C3 = 0.5 * in.eta1 * in.eta2 * in.kappa_fcd * curvature_factor(in.eta2, in.kappa_bhm);
  return c;
}

SecondOrderConstants constants_second(const SecondOrderInputs& in) {
  check_common(in.eta1, in.eta2, in.kappa_bhm, in.kappa_eg);
  require(in.L2 >= 0.0, "L2 must be nonnegative");
  require(in.kappa_eh >= 0.0, "kappa_eh must be nonnegative");
  require(in.kappa_fod > 0.0 && in.kappa_fod <= 1.0, "kappa_fod must lie in (0,1]");
  const double a = (1.0 - in.eta1) * in.kappa_fod;
  const double X = in.L2 / 3.0 + 2.0 * in.kappa_eg + 2.0 + in.kappa_eh;
  const double g1 = 1.0 / (in.kappa_bhm + in.kappa_eg);
  const double g2 = a / ((X + 1.0) + a * in.kappa_eg);
  const double g3 = 1.0 / (in.kappa_eg + in.eta2);
  const double hden = X + a * in.kappa_eh;
  const double h3 = 1.0 / (in.kappa_eh + in.eta2);
  SecondOrderConstants c;
  c.in = in;
  c.C4 = std::min({g1, g2, g3});
  c.C5 = std::max({g1, g2, g3});
  c.C6 = std::min(a / hden, h3);
  c.C7 = std::max((a + 1.0) / hden, h3);
  c.C8 = 0.5 * in.eta1 * in.eta2 * in.kappa_fod *
         std::min(curvature_factor(in.eta2, in.kappa_bhm), 1.0);
  return c;
}

double h_first(const FirstOrderConstants& c, double delta) { return c.C3 * delta * delta; }

double h_second(const SecondOrderConstants& c, double delta) {
  return c.C8 * std::min(1.0, delta * delta * delta);
}

double beta(const Vector& x, const Objective& obj, const SecondOrderConstants& c, double eps_g,
            double eps_H) {
  // C5 is +inf when kappa_bhm = kappa_eg = 0; the term vanishes for eps_g = 0.
  const double grad_term = c.C4 * obj.grad(x).norm() - (eps_g > 0.0 ? c.C5 * eps_g : 0.0);
  const double lam = min_eigenpair(obj.hess(x)).value;
  const double curv_term = -c.C6 * lam - (eps_H > 0.0 ? c.C7 * eps_H : 0.0);
  return std::max(grad_term, curv_term);
}

double delta_bar(double min_true_grad_norm, const FirstOrderConstants& c, double eps_g) {
  return c.C1 * min_true_grad_norm - c.C2 * eps_g;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::kFirstBounded: return "first_bounded";
    case Regime::kFirstSubexp: return "first_subexp";
    case Regime::kSecondBounded: return "second_bounded";
    case Regime::kSecondSubexp: return "second_subexp";
  }
  return "?";
}

Regime parse_regime(const std::string& name) {
  for (Regime r : {Regime::kFirstBounded, Regime::kFirstSubexp, Regime::kSecondBounded,
                   Regime::kSecondSubexp}) {
    if (name == regime_name(r)) return r;
  }
  throw ConfigError("unknown regime '" + name + "'");
}

bool is_first_order(Regime r) { return r == Regime::kFirstBounded || r == Regime::kFirstSubexp; }
bool is_subexp(Regime r) { return r == Regime::kFirstSubexp || r == Regime::kSecondSubexp; }

FloorResult epsilon_floor(Regime regime, const NoiseLevels& noise, const TrParams& params,
                          const FirstOrderConstants& c) {
  if (!is_first_order(regime)) throw ConfigError("first-order constants need a first-order regime");
  FloorResult out;
  double numer = 4.0 * noise.eps_f + 2.0 * params.r;
  double prob = 2.0 * params.p1 - 1.0;
  if (is_subexp(regime)) {
    require(noise.a > 0.0, "subexponential rate a must be positive");
    numer += 8.0 / noise.a;
    prob = 2.0 * p0(Order::kFirst, noise.eps_f, noise.eps_g, noise.a, params.r) +
           2.0 * params.p1 - 3.0;
  }
  if (!(prob > 0.0)) {
    out.value = kInf;
    out.valid = false;
    out.reason = is_subexp(regime) ? "2 p0 + 2 p1 - 3 <= 0" : "p1 <= 1/2";
    return out;
  }
  const double g = params.gamma;
  out.value = std::sqrt(numer / (c.C3 * g * g * c.C1 * c.C1 * prob)) + c.C2 / c.C1 * noise.eps_g;
  return out;
}

FloorResult epsilon_floor(Regime regime, const NoiseLevels& noise, const TrParams& params,
                          const SecondOrderConstants& c) {
  if (is_first_order(regime)) throw ConfigError("second-order constants need a second-order regime");
  FloorResult out;
  const double p12 = params.p1 * params.p2;
  double numer = 4.0 * noise.eps_f + 2.0 * params.r;
  double prob = 2.0 * p12 - 1.0;
  if (is_subexp(regime)) {
    require(noise.a > 0.0, "subexponential rate a must be positive");
    numer += 8.0 / noise.a;
    prob = 2.0 * p0(Order::kSecond, noise.eps_f, noise.eps_g, noise.a, params.r) + 2.0 * p12 - 3.0;
  }
  if (!(prob > 0.0)) {
    out.value = kInf;
    out.valid = false;
    out.reason = is_subexp(regime) ? "2 p0 + 2 p1 p2 - 3 <= 0" : "p1 p2 <= 1/2";
    return out;
  }
  const double g = params.gamma;
  out.value = std::cbrt(numer / (c.C8 * g * g * g * prob));
  return out;
}

double p0(Order order, double eps_f, double eps_g, double a, double r) {
  require(a > 0.0, "subexponential rate a must be positive");
  if (order == Order::kFirst) return 1.0 - 2.0 * std::exp(a * (eps_f - 0.5 * r));
  return 1.0 - 2.0 * std::exp(0.5 * a * (2.0 * eps_f + std::pow(eps_g, 1.5) - r));
}

long iteration_bound(Regime regime, double epsilon, const PHats& p_hats, double t_shift,
                     const NoiseLevels& noise, const TrParams& params,
                     const FirstOrderConstants& c, const Anchors& anchors) {
  require_above_floor(epsilon_floor(regime, noise, params, c), epsilon);
  const BoundTerms t = terms_first(regime, epsilon, t_shift, noise, params, c, anchors);
  return bound_from_terms(regime, t, p_hats, noise, params);
}

long iteration_bound(Regime regime, double epsilon, const PHats& p_hats, double t_shift,
                     const NoiseLevels& noise, const TrParams& params,
                     const SecondOrderConstants& c, const Anchors& anchors) {
  require_above_floor(epsilon_floor(regime, noise, params, c), epsilon);
  const BoundTerms t = terms_second(regime, epsilon, t_shift, noise, params, c, anchors);
  return bound_from_terms(regime, t, p_hats, noise, params);
}

double azuma_tail(long T, double p, double p_hat) {
  if (!(p > 0.0 && p <= 1.0) || p_hat < 0.0 || p_hat > p * (1.0 + 1e-12)) {
    throw ContractViolation("azuma_tail requires 0 <= p_hat <= p <= 1 and p > 0");
  }
  const double d = 1.0 - p_hat / p;
  return std::exp(-d * d * static_cast<double>(T) / 2.0);
}

double failure_prob(Regime regime, long T, const PHats& p_hats, double p_true, double p0_true,
                    double a, double t_shift) {
  double tail = azuma_tail(T, p_true, p_hats.p_hat);
  if (is_subexp(regime)) {
    // A nonpositive p0 makes the theorem vacuous.
    if (!(p0_true > 0.0)) return 1.0;
    tail += azuma_tail(T, p0_true, p_hats.p_hat0);
    tail += std::exp(-a * t_shift / 4.0);
  }
  return std::clamp(tail, 0.0, 1.0);
}

PHatChoice optimal_p_hat(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                         const TrParams& params, const FirstOrderConstants& c,
                         const Anchors& anchors) {
  require_bounded(regime);
  require_above_floor(epsilon_floor(regime, noise, params, c), epsilon);
  const BoundTerms t = terms_first(regime, epsilon, 0.0, noise, params, c, anchors);
  return choose_p_hat(t, T, params.p1);
}

PHatChoice optimal_p_hat(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                         const TrParams& params, const SecondOrderConstants& c,
                         const Anchors& anchors) {
  require_bounded(regime);
  require_above_floor(epsilon_floor(regime, noise, params, c), epsilon);
  const BoundTerms t = terms_second(regime, epsilon, 0.0, noise, params, c, anchors);
  return choose_p_hat(t, T, params.p1 * params.p2);
}

double corollary_exponent(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                          const TrParams& params, const FirstOrderConstants& c,
                          const Anchors& anchors) {
  require_bounded(regime);
  const BoundTerms t = terms_first(regime, epsilon, 0.0, noise, params, c, anchors);
  return exponent_from_terms(t, T, params.p1);
}

double corollary_exponent(Regime regime, long T, double epsilon, const NoiseLevels& noise,
                          const TrParams& params, const SecondOrderConstants& c,
                          const Anchors& anchors) {
  require_bounded(regime);
  const BoundTerms t = terms_second(regime, epsilon, 0.0, noise, params, c, anchors);
  return exponent_from_terms(t, T, params.p1 * params.p2);
}

PHats split_p_hat_sum(double sum, double p0_true, double p1_true) {
  if (!(p0_true > 0.0 && p1_true > 0.0)) {
    throw ConfigError("split_p_hat_sum needs positive probabilities");
  }
  PHats out;
  out.p_hat0 = sum * p0_true / (p0_true + p1_true);
  out.p_hat = sum * p1_true / (p0_true + p1_true);
  return out;
}

}  // namespace noisytr
