#include "noisytr/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

namespace noisytr {

namespace {

constexpr double kStrictSlack = 1e-7;
// Acceptance is enforced with this margin on y1 so that the boundary solution
// still gives rho >= eta1 after rounding in f_k - f_k_plus.
constexpr double kAcceptSlack = 1e-9;

struct Geometry {
  double nx;    // |x|
  double cr;    // kappa_eg delta + eps_g
  double D;     // (L1 |x|)^2 - cr^2
  double y2min;
};

Geometry geometry(const Vector& x, double delta, const AdversaryConstants& c) {
  Geometry g;
  g.nx = x.norm();
  g.cr = c.kappa_eg * delta + c.eps_g;
  g.D = (c.L1 * g.nx) * (c.L1 * g.nx) - g.cr * g.cr;
  g.y2min = y2_floor(x, c.L1);
  return g;
}

// Lower bound on y1 from the accuracy hyperbola.
double hyperbola_lb(double y2, const Geometry& geo, double L1) {
  return y2 / (2.0 * L1) + geo.D / (2.0 * L1 * y2);
}

// Lower bound on y1 from the acceptance constraint.
double acceptance_lb(double y2, double delta, const AdversaryConstants& c) {
  return c.eta1 * y2 / c.L1 + delta / 2.0 - (2.0 * c.eps_f + c.r) / (c.L1 * delta) +
         kAcceptSlack;
}

// Largest y2 keeping y1 = -|x| feasible, or y2min when none exceeds it.
double y2_at_full_ascent(const Geometry& geo, double delta, bool with_hyperbola,
                         const AdversaryConstants& c) {
  const double K = 2.0 * c.eps_f + c.r;
  double cap = (K / delta - c.L1 * delta / 2.0 - c.L1 * geo.nx - c.L1 * kAcceptSlack) / c.eta1;
  if (with_hyperbola) cap = std::min(cap, geo.cr - c.L1 * geo.nx);
  cap *= 1.0 - 1e-12;
  return std::max(cap, geo.y2min);
}

YSolution degenerate_solution() {
  YSolution y;
  y.degenerate = true;
  return y;
}

YSolution make(double y1, double y2, bool feasible, double value) {
  YSolution y;
  y.y1 = y1;
  y.y2 = y2;
  y.feasible = feasible;
  y.objective_value = value;
  return y;
}

// Roots of t^2 - 2 h t + D = 0 (D > 0), smaller first; nullopt if complex.
std::optional<std::pair<double, double>> hyperbola_level_roots(double h, double D) {
  const double disc = h * h - D;
  if (disc < 0.0 || h <= 0.0) return std::nullopt;
  const double big = h + std::sqrt(disc);
  return std::make_pair(D / big, big);
}

}  // namespace

std::pair<double, double> adversarial_noise_pair(double phi_x, double phi_xs, double eps_f) {
  if (phi_xs <= phi_x) return {-eps_f, eps_f};
  return {eps_f, -eps_f};
}

double y2_floor(const Vector& x, double L1) { return std::min(1e-6, 1e-2 * L1 * x.norm()); }

YSolution solve_most_loss(const Vector& x, double delta, bool accurate,
                          const AdversaryConstants& c) {
  const Geometry geo = geometry(x, delta, c);
  if (geo.nx == 0.0) return degenerate_solution();

  auto finish = [&](double y1, double y2) { return make(y1, y2, y1 <= geo.nx, y1); };
  auto at_floor = [&](bool with_hyperbola) {
    double y1 = std::max(-geo.nx, acceptance_lb(geo.y2min, delta, c));
    if (with_hyperbola) y1 = std::max(y1, hyperbola_lb(geo.y2min, geo, c.L1));
    // When y1 = -|x| binds the optimum is a segment in y2; take its far end.
    if (y1 == -geo.nx) return finish(y1, y2_at_full_ascent(geo, delta, with_hyperbola, c));
    return finish(y1, geo.y2min);
  };

  // Every lower bound on y1 is nondecreasing in y2 without the hyperbola, and
  // also with it when L1|x| <= kappa_eg delta + eps_g.
  if (!accurate || geo.D <= 0.0) return at_floor(accurate);

  const double y2s = std::sqrt(geo.D);
  if (y2s <= geo.y2min) return at_floor(true);
  const double y1s = y2s / c.L1;
  if (acceptance_lb(y2s, delta, c) <= y1s) return finish(y1s, y2s);

  // Reduce y2 until the acceptance and hyperbola bounds meet:
  // (2 eta1 - 1) y2^2 + (L1 delta - 2K/delta) y2 - D = 0 on (0, y2s).
  const double K = 2.0 * c.eps_f + c.r;
  const double a = 2.0 * c.eta1 - 1.0;
  const double b = c.L1 * delta - 2.0 * K / delta;
  double root;
  if (a == 0.0) {
    root = geo.D / b;
  } else {
    const double disc = std::max(0.0, b * b + 4.0 * a * geo.D);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    const double r1 = q / a;
    const double r2 = q != 0.0 ? -geo.D / q : r1;
    const double hi = y2s * (1.0 + 1e-12);
    root = (r1 > 0.0 && r1 <= hi) ? r1 : r2;
  }
  root = std::min(root, y2s);
  if (!(root > geo.y2min)) return at_floor(true);
  const double y1 = std::max(acceptance_lb(root, delta, c), hyperbola_lb(root, geo, c.L1));
  return finish(y1, root);
}

YSolution solve_least_gain(const Vector& x, double delta, const AdversaryConstants& c) {
  const Geometry geo = geometry(x, delta, c);
  if (geo.nx == 0.0) return degenerate_solution();
  const double y2s = geo.D > 0.0 ? std::sqrt(geo.D) : 0.0;
  if (y2s <= geo.y2min) {
    const double y1 = std::max(-geo.nx, hyperbola_lb(geo.y2min, geo, c.L1));
    return make(y1, geo.y2min, y1 <= geo.nx, y1);
  }
  const double y1 = std::min(y2s / c.L1, geo.nx);
  return make(y1, y2s, true, y1);
}

double reject_threshold(RejectProgram which, double delta, const AdversaryConstants& c) {
  const double sign = which == RejectProgram::kAscent ? 1.0 : -1.0;
  return (sign * 2.0 * c.eps_f + c.r) / delta - c.L1 * delta / 2.0;
}

YSolution solve_reject(RejectProgram which, const Vector& x, double delta,
                       const AdversaryConstants& c) {
  const Geometry geo = geometry(x, delta, c);
  if (geo.nx == 0.0 || geo.D <= 0.0) return degenerate_solution();
  const double L1 = c.L1;
  // On the hyperbola y1 = hyperbola_lb(y2), so
  // y3 = eta1 y2 - L1 y1 <= (2 eta1 - 1)/2 y2 - D/(2 y2), concave in y2.
  const bool concave_peak = 2.0 * c.eta1 < 1.0;
  const double y2_peak = concave_peak ? std::sqrt(geo.D / (1.0 - 2.0 * c.eta1)) : 0.0;
  auto value = [&](double y1, double y2) { return c.eta1 * y2 - L1 * y1; };

  if (which == RejectProgram::kAscent) {
    const double cap = std::min(geo.nx, delta / 2.0 - kStrictSlack);
    // y1 <= cap on the hyperbola: y2 between the roots of y2^2 - 2 L1 cap y2 + D.
    const auto roots = hyperbola_level_roots(L1 * cap, geo.D);
    if (!roots) return make(0.0, 0.0, false, -std::numeric_limits<double>::infinity());
    double y2 = roots->second;
    if (concave_peak && y2_peak < y2) y2 = y2_peak;
    if (y2 < geo.y2min) {
      if (roots->second < geo.y2min) {
        return make(0.0, 0.0, false, -std::numeric_limits<double>::infinity());
      }
      y2 = geo.y2min;
    }
    const double y1 = std::min(hyperbola_lb(y2, geo, L1), cap);
    return make(y1, y2, true, value(y1, y2));
  }

  // Descent: y1 >= delta/2 and y1 <= |x|. Feasible y2 lie in
  // [L1|x| - cr, L1|x| + cr], where the hyperbola bound stays below |x|.
  if (geo.nx < delta / 2.0) return make(0.0, 0.0, false, -std::numeric_limits<double>::infinity());
  const double y2_hi = L1 * geo.nx + geo.cr;
  double y2 = y2_hi;
  if (concave_peak && y2_peak <= y2_hi) {
    y2 = y2_peak;
    if (hyperbola_lb(y2_peak, geo, L1) < delta / 2.0) {
      // The linear cap eta1 y2 - L1 delta/2 binds at the peak; move to where
      // the two upper bounds meet, the larger root of y2^2 - L1 delta y2 + D.
      const auto roots = hyperbola_level_roots(L1 * delta / 2.0, geo.D);
      y2 = roots ? std::min(roots->second, y2_hi) : y2_hi;
    }
  }
  y2 = std::max(y2, geo.y2min);
  const double y1 = std::min(std::max(hyperbola_lb(y2, geo, L1), delta / 2.0), geo.nx);
  return make(y1, y2, true, value(y1, y2));
}

Vector recover_gradient(const YSolution& y, const Vector& x, Rng& rng) {
  const double nx = x.norm();
  if (nx == 0.0) throw ContractViolation("recover_gradient: x = 0 is degenerate");
  const Vector xh = x / nx;
  const double cos_t = std::clamp(y.y1 / nx, -1.0, 1.0);
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  if (x.size() == 1 || sin_t == 0.0) return y.y2 * cos_t * xh;
  Vector v;
  double proj;
  do {
    v = rng.unit_vector(static_cast<int>(x.size()));
    proj = v.dot(xh);
  } while (std::abs(proj) > 0.99);
  // g = alpha1 x + alpha2 v with alpha2 v carrying the component orthogonal to x.
  const double wn = std::sqrt(1.0 - proj * proj);
  const double alpha2 = y.y2 * sin_t / wn;
  const double alpha1 = (y.y2 * cos_t - alpha2 * proj) / nx;
  return alpha1 * x + alpha2 * v;
}

AdversarialDecision adversarial_first_oracle(const Vector& x, double delta,
                                             const AdversaryConstants& c, double p1, Rng& rng) {
  AdversarialDecision out;
  out.I_k = rng.bernoulli(p1);
  const auto n = x.size();
  const double nx = x.norm();
  if (nx == 0.0) {
    out.g = Vector::Zero(n);
    out.branch = "degenerate";
    out.y.degenerate = true;
    return out;
  }

  auto emit = [&](const YSolution& y, const char* branch) {
    out.y = y;
    out.g = recover_gradient(y, x, rng);
    out.branch = branch;
  };
  auto zero = [&](const char* branch) {
    out.g = Vector::Zero(n);
    out.branch = branch;
  };

  if (!out.I_k) {
    const YSolution y = solve_most_loss(x, delta, false, c);
    out.y = y;
    // Loss L1 delta (delta/2 - y1) must be positive for the step to hurt.
    if (!y.feasible || y.y1 >= delta / 2.0) {
      zero("inaccurate_reject");
    } else {
      emit(y, "inaccurate_most_loss");
    }
    return out;
  }

  const YSolution loss = solve_most_loss(x, delta, true, c);
  if (!loss.feasible) {
    // No step can be accepted; the true gradient is as good as any.
    out.y = loss;
    out.g = c.L1 * x;
    out.branch = "no_acceptable_step";
    return out;
  }
  if (loss.y1 < delta / 2.0) {
    emit(loss, "most_loss");
    return out;
  }

  const double cr = c.kappa_eg * delta + c.eps_g;
  if (c.L1 * nx <= cr) {
    // g = 0 lies inside the accuracy ball and is rejected automatically.
    zero("zero_gradient");
    return out;
  }
  const YSolution up = solve_reject(RejectProgram::kAscent, x, delta, c);
  if (up.feasible && up.objective_value > reject_threshold(RejectProgram::kAscent, delta, c)) {
    emit(up, "reject_ascent");
    return out;
  }
  const YSolution down = solve_reject(RejectProgram::kDescent, x, delta, c);
  if (down.feasible &&
      down.objective_value > reject_threshold(RejectProgram::kDescent, delta, c)) {
    emit(down, "reject_descent");
    return out;
  }
  emit(solve_least_gain(x, delta, c), "least_gain");
  return out;
}

FirstOracle make_adversarial_first_oracle(const Objective& obj, const AdversaryConstants& c,
                                          double p1, std::uint64_t seed) {
  if (obj.name() != "scaled_sphere") {
    throw ConfigError("adversarial oracle requires the scaled_sphere objective");
  }
  if (std::abs(obj.L1() - c.L1) > 1e-12 * std::max(1.0, obj.L1())) {
    throw ConfigError("adversarial oracle: L1 does not match the objective");
  }
  auto rng = std::make_shared<Rng>(seed);
  auto delegate = [c, p1, rng](const Vector& x, double delta) {
    AdversarialDecision d = adversarial_first_oracle(x, delta, c, p1, *rng);
    GradientSample s;
    s.g = std::move(d.g);
    s.in_spec = d.I_k;
    s.branch = std::move(d.branch);
    s.y1 = d.y.y1;
    s.y2 = d.y.y2;
    return s;
  };
  return FirstOracle::adversarial(delegate, c.eps_g, c.kappa_eg);
}

}  // namespace noisytr
