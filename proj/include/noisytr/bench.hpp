#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "noisytr/core.hpp"
#include "noisytr/oracles.hpp"
#include "noisytr/solver.hpp"
#include "noisytr/theory.hpp"

namespace noisytr {

// Runs f(i) for i in [0, n) on up to `jobs` threads. Each call must write
// only to its own slot, which keeps results independent of scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          f(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Adversarial experiment on phi(x) = L1 |x|^2 / 2 with linear models.

struct AdversarialSpec {
  double eps_f = 0.0;
  double eps_g = 0.0;
  double r = 0.0;
  std::uint64_t seed = 0;
  int iters = 250;
  int dim = 20;
  double L1 = 1.0;
  double p1 = 0.8;
  double kappa_eg = 1.0;
  double eta1 = 0.25;
  double eta2 = 1.0;
  double gamma = 0.8;
  double delta0 = 0.5;
  // x0 = x0_value * ones.
  double x0_value = 1.4;
};

RunTrace run_adversarial_experiment(const AdversarialSpec& spec);

// Mean of |grad phi(x_k)| over the last `window` records (all if fewer).
double stabilization_level(const RunTrace& trace, int window = 50);

// ---------------------------------------------------------------------------
// Profiles.

// 1-based index of the first value with f <= f_L + tau (f0 - f_L), or nullopt.
std::optional<long> convergence_test(const std::vector<double>& f_values, double f0, double f_L,
                                     double tau);

struct ProfileEntry {
  std::string solver;
  std::string problem;
  int dim = 0;
  double tau = 0.0;
  // Evaluations to convergence; nullopt for DNF.
  std::optional<long> evals;
};

struct ProfileData {
  std::vector<ProfileEntry> entries;

  std::vector<std::string> solvers() const;
  std::vector<std::string> problems() const;
  std::vector<double> taus() const;
  // t_{p,s} / min_s t_{p,s} at `tau`; nullopt for DNF or an all-DNF problem.
  std::optional<double> ratio(const ProfileEntry& e) const;
};

struct Curve {
  std::string solver;
  std::vector<std::pair<double, double>> points;
};

// rho_s(alpha) = |{p : ratio_{p,s} <= alpha}| / |P|.
std::vector<Curve> performance_profile(const ProfileData& data, double tau,
                                       const std::vector<double>& alpha_grid);
// d_s(kappa) = |{p : t_{p,s} <= kappa (n_p + 1)}| / |P|.
std::vector<Curve> data_profile(const ProfileData& data, double tau,
                                const std::vector<double>& kappa_grid);

// ---------------------------------------------------------------------------
// r-sweep with the second-order method and finite-difference oracles.

enum class NoiseKind { kUniformBounded, kSubexponential };
const char* noise_kind_name(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& name);

struct SweepProblem {
  ObjectiveSpec objective;
  Vector x0;
};

// Built-in desk-scale suite: one instance of each built-in objective.
std::vector<SweepProblem> default_sweep_problems();

struct SweepSpec {
  std::vector<SweepProblem> problems = default_sweep_problems();
  NoiseKind noise = NoiseKind::kUniformBounded;
  double eps_f = 0.2;
  double a = 20.0;
  std::vector<double> r_values{0.0, 0.2, 0.4, 0.8, 1.6};
  // Noise-seed replications per objective.
  int replications = 5;
  long budget_evals = 2000;
  std::vector<double> taus{1e-3, 1e-5};
  TrParams params;
  // Curvature scale used for the finite-difference step sizes.
  double L_ref = 10.0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Step sizes for the FD gradient and Hessian oracles at noise level `noise`:
// max(sqrt(2 noise / L_ref), 1e-7) and
// max((24 noise / ((sqrt2 + 1) L_ref))^{1/3}, 1e-4).
std::pair<double, double> sweep_sigmas(double noise, double L_ref);

// Solver names are "r=<value>", problems "<objective>_n<dim>_rep<i>".
ProfileData r_sweep(const SweepSpec& spec);

// ---------------------------------------------------------------------------
// Monte-Carlo check of the first-order high-probability bound.

struct TailSpec {
  int dim = 10;
  double L1 = 1.0;
  double x0_value = 1.0;
  CorruptionSpec gradient{0.0, 1.0, 0.8, 10.0};
  double eps_f = 0.0;
  TrParams params;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct BoundReport {
  Regime regime = Regime::kFirstBounded;
  double epsilon = 0.0;
  FloorResult floor;
  // p_hat used to size T and the optimal p_hat at that T.
  double p_hat_design = 0.0;
  PHatChoice p_hat;
  long T = 0;
  double failure_prob = 1.0;
  double theoretical_bound = 0.0;
  FirstOrderConstants constants;
  NoiseLevels noise;
  Anchors anchors;
  TrParams params;
};

struct TailResult {
  BoundReport report;
  int n_runs = 0;
  int successes = 0;
  double empirical_prob = 0.0;
  // 3 sqrt(p (1 - p) / n) with p the empirical probability.
  double margin = 0.0;
  bool pass = false;
};

// Bound side only: T from iteration_bound at p_hat_design, then the optimal
// p_hat at that T and 1 - failure_prob.
BoundReport first_order_bound(const TailSpec& spec, double epsilon, double p_hat_design);

// T = 0 uses report.T; any other T re-evaluates the bound at T. A run
// succeeds when min_{k < T} |grad phi(x_k)| <= epsilon.
TailResult monte_carlo_tail(const TailSpec& spec, double epsilon, long T, int n_runs,
                            double p_hat_design);

// ---------------------------------------------------------------------------
// Finite-difference bound check under bounded uniform noise.

struct FdCheckSpec {
  ObjectiveSpec objective = [] {
    ObjectiveSpec o;
    o.name = "scaled_sphere";
    o.dim = 20;
    return o;
  }();
  // x = x_value * ones.
  double x_value = 1.0;
  double eps_f = 0.02;
  int grid_points = 9;
  // Grid spans [sigma*/span, span sigma*] in log space.
  double span = 10.0;
  std::uint64_t seed = 0;
};

struct FdCheckRow {
  std::string kind;
  double sigma = 0.0;
  double error = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// Gradient rows use the forward scheme and its bound; Hessian rows the
// second-difference scheme. The Hessian grid is centred on the optimal sigma
// for max(L2, 1) since L2 may vanish.
std::vector<FdCheckRow> fd_check(const FdCheckSpec& spec);

}  // namespace noisytr
