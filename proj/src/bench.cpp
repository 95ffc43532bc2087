#include "noisytr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "noisytr/adversarial.hpp"
#include "noisytr/rng.hpp"
#include "noisytr/subproblem.hpp"

namespace noisytr {

RunTrace run_adversarial_experiment(const AdversarialSpec& spec) {
  ObjectiveSpec os;
  os.name = "scaled_sphere";
  os.dim = spec.dim;
  os.L1 = spec.L1;
  const Objective obj = builtin_objective(os);

  AdversaryConstants c;
  c.L1 = spec.L1;
  c.eps_f = spec.eps_f;
  c.eps_g = spec.eps_g;
  c.kappa_eg = spec.kappa_eg;
  c.eta1 = spec.eta1;
  c.r = spec.r;

  TrParams p;
  p.eta1 = spec.eta1;
  p.eta2 = spec.eta2;
  p.gamma = spec.gamma;
  p.r = spec.r;
  p.delta0 = spec.delta0;
  // Cauchy steps on linear models decrease the model by |g| delta.
  p.kappa_fcd = 2.0;
  p.p1 = spec.p1;
  p.budget = spec.iters;

  ZerothOracle z = ZerothOracle::bounded_adversarial(obj, spec.eps_f);
  FirstOracle g1 =
      make_adversarial_first_oracle(obj, c, spec.p1, derive_seed(spec.seed, Stream::kAdversary));
  return run_tr1(obj, z, g1, zero_hessian(), p, Vector::Constant(spec.dim, spec.x0_value),
                 spec.seed);
}

double stabilization_level(const RunTrace& trace, int window) {
  const auto& recs = trace.records;
  if (recs.empty()) throw ContractViolation("stabilization_level: empty trace");
  const std::size_t w = std::min<std::size_t>(recs.size(), static_cast<std::size_t>(std::max(1, window)));
  double sum = 0.0;
  for (std::size_t i = recs.size() - w; i < recs.size(); ++i) sum += recs[i].true_grad_norm;
  return sum / static_cast<double>(w);
}

// ---------------------------------------------------------------------------

std::optional<long> convergence_test(const std::vector<double>& f_values, double f0, double f_L,
                                     double tau) {
  const double target = f_L + tau * (f0 - f_L);
  for (std::size_t i = 0; i < f_values.size(); ++i) {
    if (f_values[i] <= target) return static_cast<long>(i + 1);
  }
  return std::nullopt;
}

namespace {

template <class T, class Key>
std::vector<T> ordered_unique(const std::vector<ProfileEntry>& entries, Key key) {
  std::vector<T> out;
  for (const auto& e : entries) {
    const T v = key(e);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

}  // namespace

std::vector<std::string> ProfileData::solvers() const {
  return ordered_unique<std::string>(entries, [](const ProfileEntry& e) { return e.solver; });
}

std::vector<std::string> ProfileData::problems() const {
  return ordered_unique<std::string>(entries, [](const ProfileEntry& e) { return e.problem; });
}

std::vector<double> ProfileData::taus() const {
  return ordered_unique<double>(entries, [](const ProfileEntry& e) { return e.tau; });
}

std::optional<double> ProfileData::ratio(const ProfileEntry& e) const {
  if (!e.evals) return std::nullopt;
  long best = std::numeric_limits<long>::max();
  for (const auto& o : entries) {
    if (o.problem == e.problem && o.tau == e.tau && o.evals) best = std::min(best, *o.evals);
  }
  return static_cast<double>(*e.evals) / static_cast<double>(best);
}

namespace {

std::vector<Curve> profile_curves(const ProfileData& data, double tau,
                                  const std::vector<double>& grid,
                                  const std::function<bool(const ProfileEntry&, double)>& solved) {
  const auto problems = data.problems();
  if (problems.empty()) throw ConfigError("profile: no problems");
  std::vector<Curve> curves;
  for (const auto& solver : data.solvers()) {
    Curve c;
    c.solver = solver;
    for (double a : grid) {
      int count = 0;
      for (const auto& e : data.entries) {
        if (e.solver == solver && e.tau == tau && solved(e, a)) ++count;
      }
      c.points.emplace_back(a, static_cast<double>(count) / static_cast<double>(problems.size()));
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace

std::vector<Curve> performance_profile(const ProfileData& data, double tau,
                                       const std::vector<double>& alpha_grid) {
  return profile_curves(data, tau, alpha_grid, [&](const ProfileEntry& e, double alpha) {
    const auto r = data.ratio(e);
    return r && *r <= alpha;
  });
}

std::vector<Curve> data_profile(const ProfileData& data, double tau,
                                const std::vector<double>& kappa_grid) {
  return profile_curves(data, tau, kappa_grid, [](const ProfileEntry& e, double kappa) {
    return e.evals && static_cast<double>(*e.evals) <= kappa * (e.dim + 1);
  });
}

// ---------------------------------------------------------------------------

const char* noise_kind_name(NoiseKind k) {
  return k == NoiseKind::kUniformBounded ? "uniform_bounded" : "subexponential";
}

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "uniform_bounded") return NoiseKind::kUniformBounded;
  if (name == "subexponential") return NoiseKind::kSubexponential;
  throw ConfigError("unknown noise kind: " + name);
}

namespace {

ObjectiveSpec spec_of(const std::string& name, int dim) {
  ObjectiveSpec s;
  s.name = name;
  s.dim = dim;
  return s;
}

}  // namespace

std::vector<SweepProblem> default_sweep_problems() {
  std::vector<SweepProblem> out;
  auto add = [&](ObjectiveSpec s, Vector x0) { out.push_back({std::move(s), std::move(x0)}); };

  ObjectiveSpec sphere = spec_of("scaled_sphere", 3);
  add(sphere, Vector::Ones(3));

  ObjectiveSpec indef = spec_of("indefinite_quadratic", 2);
  indef.diag = {1.0, -2.0};
  add(indef, Vector::Ones(2));

  ObjectiveSpec rosen = spec_of("rosenbrock", 2);
  Vector xr(2);
  xr << -1.2, 1.0;
  add(rosen, xr);

  ObjectiveSpec powell = spec_of("powell_singular", 4);
  powell.region = 4.0;
  Vector xp(4);
  xp << 3.0, -1.0, 0.0, 1.0;
  add(powell, xp);

  ObjectiveSpec trig = spec_of("trigonometric", 3);
  add(trig, Vector::Constant(3, 1.0 / 3.0));
  return out;
}

std::pair<double, double> sweep_sigmas(double noise, double L_ref) {
  if (!(L_ref > 0.0)) throw ConfigError("L_ref must be positive");
  const double sg = std::max(std::sqrt(2.0 * noise / L_ref), 1e-7);
  const double sh =
      std::max(std::cbrt(24.0 * noise / ((std::sqrt(2.0) + 1.0) * L_ref)), 1e-4);
  return {sg, sh};
}

namespace {

std::string r_label(double r) {
  std::ostringstream os;
  os << "r=" << r;
  return os.str();
}

}  // namespace

ProfileData r_sweep(const SweepSpec& spec) {
  if (spec.problems.empty()) throw ConfigError("sweep: no problems");
  if (spec.r_values.empty()) throw ConfigError("sweep: no r values");
  if (spec.replications < 1) throw ConfigError("sweep: replications must be >= 1");
  if (spec.budget_evals < 1) throw ConfigError("sweep: budget_evals must be >= 1");
  if (!(spec.eps_f >= 0.0)) throw ConfigError("sweep: eps_f must be nonnegative");
  if (spec.noise == NoiseKind::kSubexponential && !(spec.a > 0.0)) {
    throw ConfigError("sweep: a must be positive");
  }
  for (double r : spec.r_values) {
    if (!(r >= 0.0)) throw ConfigError("sweep: r values must be nonnegative");
  }

  const double noise_level =
      spec.noise == NoiseKind::kUniformBounded ? spec.eps_f : spec.eps_f + 1.0 / spec.a;
  const auto [sigma_g, sigma_h] = sweep_sigmas(noise_level, spec.L_ref);

  const std::size_t n_inst = spec.problems.size() * static_cast<std::size_t>(spec.replications);
  const std::size_t n_r = spec.r_values.size();

  struct Instance {
    Objective obj;
    Vector x0;
    std::string name;
    std::uint64_t noise_seed;
  };
  std::vector<Instance> instances;
  for (std::size_t pi = 0; pi < spec.problems.size(); ++pi) {
    const auto& sp = spec.problems[pi];
    const Objective base = builtin_objective(sp.objective);
    const Objective obj = rescaled(base, sp.x0, 100.0);
    for (int j = 0; j < spec.replications; ++j) {
      const std::size_t idx = pi * static_cast<std::size_t>(spec.replications) + static_cast<std::size_t>(j);
      std::ostringstream name;
      name << base.name() << "_n" << base.dim() << "_rep" << j;
      instances.push_back({obj, sp.x0, name.str(),
                           derive_seed(derive_seed(spec.seed, kReplicationBase + idx), Stream::kZeroth)});
    }
  }

  // histories[inst * n_r + ri]: true phi per evaluation, truncated to the budget.
  std::vector<std::vector<double>> histories(n_inst * n_r);
  parallel_for(histories.size(), spec.jobs, [&](std::size_t t) {
    const Instance& in = instances[t / n_r];
    TrParams p = spec.params;
    p.r = spec.r_values[t % n_r];
    p.budget = static_cast<int>(std::min<long>(spec.budget_evals, std::numeric_limits<int>::max()));
    ZerothOracle z = spec.noise == NoiseKind::kUniformBounded
                         ? ZerothOracle::bounded_uniform(in.obj, spec.eps_f, in.noise_seed)
                         : ZerothOracle::subexponential(in.obj, spec.eps_f, spec.a, in.noise_seed);
    FirstOracle g1 = FirstOracle::finite_difference(z, FdScheme::kForward, sigma_g, noise_level);
    SecondOracle g2 = SecondOracle::finite_difference(z, sigma_h, noise_level);
    RunOptions opt;
    opt.max_evaluations = spec.budget_evals;
    RunTrace tr = run_tr2(in.obj, z, g1, g2, p, in.x0, in.noise_seed, opt);
    auto& h = tr.phi_per_evaluation;
    if (static_cast<long>(h.size()) > spec.budget_evals) h.resize(static_cast<std::size_t>(spec.budget_evals));
    histories[t] = std::move(h);
  });

  ProfileData data;
  for (std::size_t i = 0; i < n_inst; ++i) {
    const Instance& in = instances[i];
    const double f0 = in.obj.eval(in.x0);
    double f_L = f0;
    for (std::size_t ri = 0; ri < n_r; ++ri) {
      for (double v : histories[i * n_r + ri]) f_L = std::min(f_L, v);
    }
    for (double tau : spec.taus) {
      for (std::size_t ri = 0; ri < n_r; ++ri) {
        ProfileEntry e;
        e.solver = r_label(spec.r_values[ri]);
        e.problem = in.name;
        e.dim = in.obj.dim();
        e.tau = tau;
        e.evals = convergence_test(histories[i * n_r + ri], f0, f_L, tau);
        data.entries.push_back(std::move(e));
      }
    }
  }
  return data;
}

// ---------------------------------------------------------------------------

namespace {

struct TailSetup {
  Objective obj;
  Vector x0;
  FirstOrderConstants c;
  NoiseLevels noise;
  Anchors anchors;
};

TailSetup tail_setup(const TailSpec& spec) {
  ObjectiveSpec os;
  os.name = "scaled_sphere";
  os.dim = spec.dim;
  os.L1 = spec.L1;
  TailSetup s{builtin_objective(os), Vector::Constant(spec.dim, spec.x0_value), {}, {}, {}};
  FirstOrderInputs in;
  in.L1 = spec.L1;
  in.kappa_bhm = 0.0;
  in.kappa_eg = spec.gradient.kappa;
  in.kappa_fcd = spec.params.kappa_fcd;
  in.eta1 = spec.params.eta1;
  in.eta2 = spec.params.eta2;
  s.c = constants_first(in);
  s.noise.eps_f = spec.eps_f;
  s.noise.eps_g = spec.gradient.eps;
  s.anchors.stationarity0 = s.obj.grad(s.x0).norm();
  s.anchors.delta0 = spec.params.delta0;
  s.anchors.phi0 = s.obj.eval(s.x0);
  s.anchors.phi_hat = s.obj.phi_hat();
  return s;
}

}  // namespace

BoundReport first_order_bound(const TailSpec& spec, double epsilon, double p_hat_design) {
  const TailSetup s = tail_setup(spec);
  TrParams params = spec.params;
  params.p1 = spec.gradient.p;
  BoundReport rep;
  rep.regime = Regime::kFirstBounded;
  rep.epsilon = epsilon;
  rep.constants = s.c;
  rep.noise = s.noise;
  rep.anchors = s.anchors;
  rep.params = params;
  rep.floor = epsilon_floor(rep.regime, s.noise, params, s.c);
  rep.p_hat_design = p_hat_design;
  rep.T = iteration_bound(rep.regime, epsilon, PHats{p_hat_design, 0.0}, 0.0, s.noise, params,
                          s.c, s.anchors);
  rep.p_hat = optimal_p_hat(rep.regime, rep.T, epsilon, s.noise, params, s.c, s.anchors);
  rep.failure_prob = failure_prob(rep.regime, rep.T, PHats{rep.p_hat.value, 0.0}, params.p1, 1.0,
                                  std::numeric_limits<double>::infinity(), 0.0);
  rep.theoretical_bound = 1.0 - rep.failure_prob;
  return rep;
}

TailResult monte_carlo_tail(const TailSpec& spec, double epsilon, long T, int n_runs,
                            double p_hat_design) {
  if (n_runs < 1) throw ConfigError("monte_carlo_tail: n_runs must be >= 1");
  TailResult res;
  res.report = first_order_bound(spec, epsilon, p_hat_design);
  const TailSetup s = tail_setup(spec);
  TrParams params = spec.params;
  params.p1 = spec.gradient.p;
  if (T <= 0) {
    T = res.report.T;
  } else if (T != res.report.T) {
    // Re-evaluate the bound at the requested horizon. Below the iteration
    // bound the optimal p_hat clips to p and the bound becomes vacuous.
    BoundReport& r = res.report;
    r.T = T;
    r.p_hat = optimal_p_hat(r.regime, T, epsilon, s.noise, params, s.c, s.anchors);
    r.failure_prob = failure_prob(r.regime, T, PHats{r.p_hat.value, 0.0}, params.p1, 1.0,
                                  std::numeric_limits<double>::infinity(), 0.0);
    r.theoretical_bound = 1.0 - r.failure_prob;
  }
  if (T > std::numeric_limits<int>::max()) throw ConfigError("monte_carlo_tail: T too large");
  res.n_runs = n_runs;
  params.budget = static_cast<int>(T);

  std::vector<char> ok(static_cast<std::size_t>(n_runs), 0);
  parallel_for(ok.size(), spec.jobs, [&](std::size_t i) {
    const std::uint64_t rs = derive_seed(spec.seed, kReplicationBase + i);
    ZerothOracle z = spec.eps_f > 0.0
                         ? ZerothOracle::bounded_uniform(s.obj, spec.eps_f, derive_seed(rs, Stream::kZeroth))
                         : ZerothOracle::exact(s.obj);
    FirstOracle g1 = FirstOracle::corrupted(s.obj, spec.gradient, derive_seed(rs, Stream::kFirst));
    RunOptions opt;
    opt.stop_true_grad_norm = epsilon;
    opt.radius_floor = 0.0;
    const RunTrace tr = run_tr1(s.obj, z, g1, zero_hessian(), params, s.x0, rs, opt);
    ok[i] = tr.summary.min_true_grad_norm <= epsilon ? 1 : 0;
  });
  res.successes = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
  res.empirical_prob = static_cast<double>(res.successes) / n_runs;
  res.margin = 3.0 * std::sqrt(res.empirical_prob * (1.0 - res.empirical_prob) / n_runs);
  res.pass = res.empirical_prob >= res.report.theoretical_bound - res.margin;
  return res;
}

// ---------------------------------------------------------------------------

std::vector<FdCheckRow> fd_check(const FdCheckSpec& spec) {
  if (spec.grid_points < 1) throw ConfigError("fd_check: grid_points must be >= 1");
  if (!(spec.span >= 1.0)) throw ConfigError("fd_check: span must be >= 1");
  if (!(spec.eps_f > 0.0)) throw ConfigError("fd_check: eps_f must be positive");
  const Objective obj = builtin_objective(spec.objective);
  const int n = obj.dim();
  const Vector x = Vector::Constant(n, spec.x_value);
  ZerothOracle z = ZerothOracle::bounded_uniform(obj, spec.eps_f, derive_seed(spec.seed, Stream::kZeroth));

  auto grid = [&](double center) {
    std::vector<double> g;
    const int m = spec.grid_points;
    for (int i = 0; i < m; ++i) {
      const double t = m == 1 ? 0.0 : -1.0 + 2.0 * i / (m - 1);
      g.push_back(center * std::pow(spec.span, t));
    }
    return g;
  };

  std::vector<FdCheckRow> rows;
  const Vector g_true = obj.grad(x);
  for (double sigma : grid(optimal_sigma(SigmaKind::kGradFd, spec.eps_f, obj.L1(), n).sigma)) {
    FdCheckRow row{"gradient", sigma, (fd_gradient(z, x, sigma) - g_true).norm(),
                   fd_gradient_bound(n, obj.L1(), sigma, 2.0 * spec.eps_f), false};
    row.pass = row.error <= row.bound;
    rows.push_back(row);
  }
  const Matrix h_true = obj.hess(x);
  const double L2c = std::max(obj.L2(), 1.0);
  for (double sigma : grid(optimal_sigma(SigmaKind::kHessFd, spec.eps_f, L2c, n).sigma)) {
    FdCheckRow row{"hessian", sigma, spectral_norm_sym(fd_hessian(z, x, sigma) - h_true),
                   fd_hessian_bound(n, obj.L2(), sigma, spec.eps_f), false};
    row.pass = row.error <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace noisytr
