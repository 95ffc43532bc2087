#pragma once

// Brute-force reference for the adversary's y1/y2 programs. Each program
// either minimizes y1 or maximizes eta1 y2 - L1 y1, so for a fixed y2 row the
// best feasible point is the smallest feasible y1. Rows are scanned over a
// uniform y1 grid plus the y1 values where individual constraints become
// active, which keeps thin feasible slivers visible to the search.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "noisytr/adversarial.hpp"
#include "noisytr/rng.hpp"

namespace grid {

using noisytr::AdversaryConstants;
using noisytr::Vector;
using noisytr::YSolution;

enum class Program { kMostLossAccurate, kMostLossInaccurate, kRejectAscent, kRejectDescent, kLeastGain };

inline const char* program_name(Program p) {
  switch (p) {
    case Program::kMostLossAccurate: return "most_loss_accurate";
    case Program::kMostLossInaccurate: return "most_loss_inaccurate";
    case Program::kRejectAscent: return "reject_ascent";
    case Program::kRejectDescent: return "reject_descent";
    case Program::kLeastGain: return "least_gain";
  }
  return "?";
}

inline constexpr double kStrict = 1e-7;

struct Instance {
  Vector x;
  double delta = 1.0;
  AdversaryConstants c;
};

struct Geometry {
  double nx, cr, D, y2min, ymax, K;
};

inline Geometry geometry(const Instance& in) {
  Geometry g;
  g.nx = in.x.norm();
  g.cr = in.c.kappa_eg * in.delta + in.c.eps_g;
  g.D = (in.c.L1 * g.nx) * (in.c.L1 * g.nx) - g.cr * g.cr;
  g.y2min = noisytr::y2_floor(in.x, in.c.L1);
  g.ymax = std::max(4.0 * in.c.L1 * g.nx, in.c.L1 * g.nx + g.cr) * 1.01;
  g.K = 2.0 * in.c.eps_f + in.c.r;
  return g;
}

inline bool minimizes(Program p) {
  return p == Program::kMostLossAccurate || p == Program::kMostLossInaccurate ||
         p == Program::kLeastGain;
}
inline bool uses_hyperbola(Program p) { return p != Program::kMostLossInaccurate; }
inline bool uses_acceptance(Program p) {
  return p == Program::kMostLossAccurate || p == Program::kMostLossInaccurate;
}

// Every constraint is g <= 0; `slack` > 0 loosens and < 0 tightens each one
// relative to the magnitude of its terms.
inline bool feasible(Program p, const Instance& in, const Geometry& g, double y1, double y2,
                     double slack) {
  const auto& c = in.c;
  const double box = slack * (1.0 + g.nx);
  if (y1 < -g.nx - box || y1 > g.nx + box) return false;
  if (y2 < g.y2min * (1.0 - std::max(0.0, -slack)) - std::max(0.0, -slack)) return false;
  if (slack < 0.0 && y2 < g.y2min + std::abs(slack)) return false;
  if (uses_acceptance(p)) {
    const double lhs = c.eta1 * y2 - c.L1 * y1;
    const double rhs = g.K / in.delta - c.L1 * in.delta / 2.0;
    const double scale = 1.0 + std::abs(c.eta1 * y2) + std::abs(c.L1 * y1) + std::abs(g.K / in.delta) +
                         c.L1 * in.delta;
    if (lhs - rhs > slack * scale) return false;
  }
  if (uses_hyperbola(p)) {
    const double l = c.L1 * g.nx;
    const double h = y2 * y2 - 2.0 * c.L1 * y1 * y2 + l * l - g.cr * g.cr;
    const double scale = y2 * y2 + 2.0 * c.L1 * std::abs(y1) * y2 + l * l + g.cr * g.cr + 1e-300;
    if (h > slack * scale) return false;
  }
  if (p == Program::kRejectAscent && y1 - (in.delta / 2.0 - kStrict) > slack * (1.0 + in.delta)) {
    return false;
  }
  if (p == Program::kRejectDescent && in.delta / 2.0 - y1 > slack * (1.0 + in.delta)) return false;
  return true;
}

inline double objective(Program p, const Instance& in, double y1, double y2) {
  return minimizes(p) ? y1 : in.c.eta1 * y2 - in.c.L1 * y1;
}

struct Result {
  bool skipped = false;  // degenerate reject program
  bool analytic_feasible = false;
  bool analytic_point_ok = true;
  bool grid_empty = true;
  double analytic_value = 0.0;
  double grid_value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

inline YSolution analytic(Program p, const Instance& in) {
  using noisytr::RejectProgram;
  switch (p) {
    case Program::kMostLossAccurate: return noisytr::solve_most_loss(in.x, in.delta, true, in.c);
    case Program::kMostLossInaccurate: return noisytr::solve_most_loss(in.x, in.delta, false, in.c);
    case Program::kRejectAscent: return noisytr::solve_reject(RejectProgram::kAscent, in.x, in.delta, in.c);
    case Program::kRejectDescent: return noisytr::solve_reject(RejectProgram::kDescent, in.x, in.delta, in.c);
    case Program::kLeastGain: return noisytr::solve_least_gain(in.x, in.delta, in.c);
  }
  return {};
}

// Largest |d lb / d y2| of the binding lower bounds on y1 for y2 in [lo, hi].
inline double slope_bound(Program p, const Instance& in, const Geometry& g, double lo, double hi) {
  double s = 0.0;
  if (uses_acceptance(p)) s = std::max(s, in.c.eta1 / in.c.L1);
  if (uses_hyperbola(p)) {
    for (double y : {lo, hi}) {
      s = std::max(s, std::abs(1.0 / (2.0 * in.c.L1) - g.D / (2.0 * in.c.L1 * y * y)));
    }
  }
  return s;
}

inline Result compare(Program p, const Instance& in, int rows, int cols) {
  Result res;
  const Geometry g = geometry(in);
  const auto& c = in.c;
  const YSolution a = analytic(p, in);
  std::ostringstream os;
  os.precision(10);
  if (a.degenerate) {
    res.skipped = true;
    res.pass = true;
    return res;
  }
  res.analytic_feasible = a.feasible;
  res.analytic_value = objective(p, in, a.y1, a.y2);
  if (a.feasible) res.analytic_point_ok = feasible(p, in, g, a.y1, a.y2, 1e-9);

  const double d1 = 2.0 * g.nx / (cols - 1);
  const double d2 = (g.ymax - g.y2min) / (rows - 1);
  const bool minimize = minimizes(p);
  double best = minimize ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
  bool strict_found = false;
  auto consider = [&](double y1, double y2) {
    if (!feasible(p, in, g, y1, y2, 1e-12)) return false;
    res.grid_empty = false;
    const double v = objective(p, in, y1, y2);
    best = minimize ? std::min(best, v) : std::max(best, v);
    return true;
  };
  for (int i = 0; i < rows; ++i) {
    const double y2 = i == 0 ? g.y2min : g.y2min + d2 * i;
    // The y1 grid is ascending, so the first feasible point is the row optimum.
    for (int j = 0; j < cols; ++j) {
      if (consider(-g.nx + d1 * j, y2)) break;
    }
    // Values of y1 where a single constraint becomes active in this row.
    consider(g.nx, y2);
    if (uses_acceptance(p)) consider(c.eta1 * y2 / c.L1 + in.delta / 2.0 - g.K / (c.L1 * in.delta), y2);
    if (uses_hyperbola(p)) consider(y2 / (2.0 * c.L1) + g.D / (2.0 * c.L1 * y2), y2);
    if (p == Program::kRejectAscent) consider(in.delta / 2.0 - kStrict, y2);
    if (p == Program::kRejectDescent) consider(in.delta / 2.0, y2);
    if (!a.feasible && !strict_found) {
      for (int j = 0; j < cols; ++j) {
        if (feasible(p, in, g, -g.nx + d1 * j, y2, -1e-6)) {
          strict_found = true;
          break;
        }
      }
    }
  }
  res.grid_value = best;

  if (!a.feasible) {
    res.pass = !strict_found;
    if (!res.pass) res.detail = "analytic infeasible but grid has strictly feasible points";
    return res;
  }
  if (res.grid_empty) {
    res.detail = "grid found no feasible point";
    return res;
  }
  const bool on_floor_row = a.y2 == g.y2min || (minimize && a.y1 == -g.nx);
  const double dy2 = on_floor_row ? 0.0 : d2;
  const double lo = std::max(g.y2min, a.y2 - d2), hi = std::min(g.ymax, a.y2 + d2);
  const double s = slope_bound(p, in, g, lo, hi);
  const double tiny = 1e-8 * (1.0 + std::abs(res.analytic_value));
  if (minimize) {
    res.tolerance = 1.5 * (d1 + s * dy2);
    const bool not_beaten = best >= res.analytic_value - tiny;
    const bool close = best <= res.analytic_value + res.tolerance + tiny;
    res.pass = res.analytic_point_ok && not_beaten && close;
  } else {
    res.tolerance = 1.5 * (c.L1 * d1 + (c.eta1 + c.L1 * s) * d2);
    const bool not_beaten = best <= res.analytic_value + tiny;
    const bool close = best >= res.analytic_value - res.tolerance - tiny;
    res.pass = res.analytic_point_ok && not_beaten && close;
  }
  if (!res.pass) {
    os << "analytic (" << a.y1 << ", " << a.y2 << ") value " << res.analytic_value
       << " point_ok " << res.analytic_point_ok << " grid " << best << " tol " << res.tolerance;
    res.detail = os.str();
  }
  return res;
}

inline double log_uniform(noisytr::Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

// Random instance; reject programs are redrawn until the hyperbola is
// non-degenerate (L1 |x| > kappa_eg delta + eps_g).
inline Instance draw(noisytr::Rng& rng, Program p) {
  for (;;) {
    Instance in;
    const double nx = log_uniform(rng, 0.2, 5.0);
    in.x = rng.unit_vector(3) * nx;
    in.c.L1 = rng.uniform(0.5, 2.0);
    in.delta = log_uniform(rng, 0.05, 2.0);
    in.c.kappa_eg = rng.uniform(0.0, 2.0);
    in.c.eps_g = rng.uniform(0.0, 4.0);
    in.c.eps_f = rng.uniform(0.0, 0.5);
    in.c.r = rng.uniform(0.0, 1.0);
    in.c.eta1 = rng.uniform(0.05, 0.95);
    if (p == Program::kRejectAscent && rng.bernoulli(0.5)) {
      // Place the hyperbola vertex sqrt(D)/L1 inside the ascent region y1 < delta/2;
      // uniform eps_g rarely does.
      const double l = in.c.L1 * nx;
      const double half = std::min(in.delta / 2.0, nx) * in.c.L1;
      const double cr = std::sqrt(l * l - rng.uniform(0.0, 1.0) * half * half);
      in.c.eps_g = cr - in.c.kappa_eg * in.delta;
      if (in.c.eps_g < 0.0) continue;
    }
    const bool reject = p == Program::kRejectAscent || p == Program::kRejectDescent;
    if (reject && geometry(in).D <= 0.0) continue;
    return in;
  }
}

struct Summary {
  int instances = 0;
  int failures = 0;
  int infeasible = 0;
  std::vector<std::string> messages;
};

inline Summary run_program(Program p, int instances, int rows, int cols, std::uint64_t seed) {
  noisytr::Rng rng(seed);
  Summary s;
  while (s.instances < instances) {
    const Instance in = draw(rng, p);
    const Result r = compare(p, in, rows, cols);
    if (r.skipped) continue;
    ++s.instances;
    s.infeasible += !r.analytic_feasible;
    if (!r.pass) {
      ++s.failures;
      if (s.messages.size() < 5) s.messages.push_back(r.detail);
    }
  }
  return s;
}

}  // namespace grid
