#include "noisytr/cli.hpp"

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "noisytr/adversarial.hpp"
#include "noisytr/bench.hpp"
#include "noisytr/io.hpp"
#include "noisytr/rng.hpp"
#include "noisytr/solver.hpp"
#include "noisytr/theory.hpp"

namespace noisytr {

namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// INI configuration. Every lookup records the resolved value for the output
// echo; keys that were never looked up are rejected by finish().
class Config {
 public:
  Config() = default;

  void load(const std::string& path) {
    try {
      pt::read_ini(path, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError("cannot read config: " + std::string(e.what()));
    }
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string str(const std::string& key, const std::string& def) {
    const std::string v = raw(key).value_or(def);
    echo(key, v);
    return v;
  }

  double num(const std::string& key, double def) {
    const auto s = raw(key);
    const double v = s ? parse_double(key, *s) : def;
    echo(key, format_double(v));
    return v;
  }

  long integer(const std::string& key, long def) {
    const auto s = raw(key);
    long v = def;
    if (s) {
      const double d = parse_double(key, *s);
      if (d != std::floor(d) || std::abs(d) > 9e15) throw ConfigError(key + ": expected an integer");
      v = static_cast<long>(d);
    }
    echo(key, std::to_string(v));
    return v;
  }

  bool flag(const std::string& key, bool def) {
    const auto s = raw(key);
    bool v = def;
    if (s) {
      if (*s == "true" || *s == "1" || *s == "yes") {
        v = true;
      } else if (*s == "false" || *s == "0" || *s == "no") {
        v = false;
      } else {
        throw ConfigError(key + ": expected true or false");
      }
    }
    echo(key, v ? "true" : "false");
    return v;
  }

  std::vector<double> list(const std::string& key, const std::vector<double>& def) {
    const auto s = raw(key);
    std::vector<double> v = def;
    if (s) {
      v.clear();
      std::stringstream ss(*s);
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(parse_double(key, trim(item)));
      if (v.empty()) throw ConfigError(key + ": empty list");
    }
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + format_double(v[i]);
    echo(key, joined);
    return v;
  }

  std::string required_str(const std::string& key) {
    const auto s = raw(key);
    if (!s || s->empty()) throw ConfigError("missing required key " + key);
    echo(key, *s);
    return *s;
  }

  // Adds a value that does not come from the file.
  void set_echo(const std::string& key, const std::string& value) { echo(key, value); }

  void finish() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) {
        if (!used_.count(section)) throw ConfigError("unknown config key: " + section);
        continue;
      }
      for (const auto& [key, _] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ConfigError("unknown config key: " + full);
      }
    }
  }

  const ConfigEcho& resolved() const { return echo_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t") - a + 1);
  }

  static double parse_double(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t == "inf") return std::numeric_limits<double>::infinity();
    try {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": not a number: '" + s + "'");
    }
  }

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    const auto v = tree_.get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void echo(const std::string& key, const std::string& value) {
    for (auto& kv : echo_) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    echo_.emplace_back(key, value);
  }

  pt::ptree tree_;
  std::set<std::string> used_;
  ConfigEcho echo_;
};

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed_flag;
  std::string out_dir = ".";
  int jobs = 1;
};

std::uint64_t resolve_seed(Config& cfg, const Common& common) {
  std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
  if (const char* env = std::getenv("NOISYTR_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("NOISYTR_SEED is not an unsigned integer");
    }
  }
  if (common.seed_flag) seed = *common.seed_flag;
  cfg.set_echo("run.seed", std::to_string(seed));
  return seed;
}

void load_config(Config& cfg, const Common& common, bool required) {
  if (!common.config_path.empty()) {
    cfg.load(common.config_path);
  } else if (required) {
    throw ConfigError("--config is required for this command");
  }
}

fs::path output_path(const Common& common, const std::string& file) {
  std::error_code ec;
  fs::create_directories(common.out_dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + common.out_dir + ": " + ec.message());
  return fs::path(common.out_dir) / file;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& w) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path.string());
  w(os);
  if (!os) throw ConfigError("write failed: " + path.string());
}

void write_json(const fs::path& path, const Json& j) {
  write_file(path, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

TrParams read_params(Config& cfg) {
  TrParams p;
  p.eta1 = cfg.num("algorithm.eta1", p.eta1);
  p.eta2 = cfg.num("algorithm.eta2", p.eta2);
  p.gamma = cfg.num("algorithm.gamma", p.gamma);
  p.r = cfg.num("algorithm.r", p.r);
  p.delta0 = cfg.num("algorithm.delta0", p.delta0);
  p.kappa_fcd = cfg.num("algorithm.kappa_fcd", p.kappa_fcd);
  p.kappa_fod = cfg.num("algorithm.kappa_fod", p.kappa_fod);
  p.p1 = cfg.num("algorithm.p1", p.p1);
  p.p2 = cfg.num("algorithm.p2", p.p2);
  const long budget = cfg.integer("algorithm.budget", p.budget);
  if (budget < 0 || budget > std::numeric_limits<int>::max()) throw ConfigError("algorithm.budget out of range");
  p.budget = static_cast<int>(budget);
  p.validate();
  return p;
}

// An empty def_name makes objective.name required.
ObjectiveSpec read_objective(Config& cfg, const std::string& def_name, int def_dim) {
  ObjectiveSpec s;
  s.name = def_name.empty() ? cfg.required_str("objective.name") : cfg.str("objective.name", def_name);
  const long dim = cfg.integer("objective.dim", def_dim);
  if (dim < 1 || dim > 100000) throw ConfigError("objective.dim out of range");
  s.dim = static_cast<int>(dim);
  s.L1 = cfg.num("objective.L1", s.L1);
  if (s.name == "indefinite_quadratic") {
    std::vector<double> def(static_cast<std::size_t>(s.dim), 1.0);
    if (s.dim >= 2) def[1] = -2.0;
    s.diag = cfg.list("objective.diag", def);
  }
  s.quartic = cfg.num("objective.quartic", s.quartic);
  s.region = cfg.num("objective.region", s.region);
  return s;
}

Vector read_x0(Config& cfg, const std::string& key, int dim, double def) {
  const auto v = cfg.list(key, {def});
  if (v.size() == 1) return Vector::Constant(dim, v[0]);
  if (static_cast<int>(v.size()) != dim) throw ConfigError(key + ": length must be 1 or the dimension");
  return Eigen::Map<const Vector>(v.data(), dim);
}

CorruptionSpec read_corruption(Config& cfg, const std::string& sec, double def_p) {
  CorruptionSpec c;
  c.eps = cfg.num(sec + ".eps", 0.0);
  c.kappa = cfg.num(sec + ".kappa", 1.0);
  c.p = cfg.num(sec + ".p", def_p);
  c.outlier_scale = cfg.num(sec + ".outlier_scale", c.outlier_scale);
  return c;
}

// ---------------------------------------------------------------------------

int cmd_solve(const Common& common, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, true);
  cfg.set_echo("command", "solve");
  const std::uint64_t seed = resolve_seed(cfg, common);

  const ObjectiveSpec os = read_objective(cfg, "", 2);
  Objective obj = builtin_objective(os);
  const Vector x0 = read_x0(cfg, "objective.x0", obj.dim(), 1.0);
  if (cfg.flag("objective.rescale", false)) obj = rescaled(obj, x0, 100.0);

  const std::string order = cfg.str("algorithm.order", "first");
  if (order != "first" && order != "second") throw ConfigError("algorithm.order must be first or second");
  const TrParams params = read_params(cfg);

  const std::string zmode = cfg.str("zeroth.mode", "exact");
  const double eps_f = cfg.num("zeroth.eps_f", 0.0);
  const std::uint64_t zs = derive_seed(seed, Stream::kZeroth);
  std::optional<ZerothOracle> z;
  if (zmode == "exact") {
    z = ZerothOracle::exact(obj);
  } else if (zmode == "bounded_uniform") {
    z = ZerothOracle::bounded_uniform(obj, eps_f, zs);
  } else if (zmode == "bounded_adversarial") {
    z = ZerothOracle::bounded_adversarial(obj, eps_f);
  } else if (zmode == "subexponential") {
    z = ZerothOracle::subexponential(obj, eps_f, cfg.num("zeroth.a", 20.0), zs);
  } else {
    throw ConfigError("unknown zeroth.mode: " + zmode);
  }
  // Noise level used for finite-difference step sizes.
  const double eps_hat = zmode == "subexponential" ? eps_f + 1.0 / z->a() : eps_f;

  auto sigma_for = [&](const std::string& key, SigmaKind kind, double L) {
    if (cfg.has(key)) return cfg.num(key, 0.0);
    if (!(eps_hat > 0.0) || !(L > 0.0)) {
      throw ConfigError(key + " is required when the noise level or the smoothness constant is zero");
    }
    return cfg.num(key, optimal_sigma(kind, eps_hat, L, obj.dim()).sigma);
  };

  const std::string gmode = cfg.str("first.mode", "exact");
  std::optional<FirstOracle> g1;
  if (gmode == "exact") {
    g1 = FirstOracle::exact(obj);
  } else if (gmode == "corrupted") {
    g1 = FirstOracle::corrupted(obj, read_corruption(cfg, "first", params.p1),
                                derive_seed(seed, Stream::kFirst));
  } else if (gmode == "fd") {
    g1 = FirstOracle::finite_difference(*z, FdScheme::kForward,
                                        sigma_for("first.sigma", SigmaKind::kGradFd, obj.L1()), eps_hat);
  } else if (gmode == "fd2") {
    g1 = FirstOracle::finite_difference(*z, FdScheme::kSecondOrder,
                                        sigma_for("first.sigma", SigmaKind::kGradFd2, obj.L2()), eps_hat);
  } else {
    throw ConfigError("unknown first.mode: " + gmode);
  }

  RunOptions opt;
  RunTrace trace;
  if (order == "first") {
    const std::string hmode = cfg.str("algorithm.hessian", "zero");
    HessianProvider hk;
    if (hmode == "zero") {
      hk = zero_hessian();
    } else if (hmode == "clipped_exact") {
      hk = clipped_exact_hessian(obj, cfg.num("algorithm.kappa_bhm", obj.L1()));
    } else {
      throw ConfigError("unknown algorithm.hessian: " + hmode);
    }
    cfg.finish();
    trace = run_tr1(obj, *z, *g1, hk, params, x0, seed, opt);
  } else {
    const std::string hmode = cfg.str("second.mode", "exact");
    std::optional<SecondOracle> g2;
    if (hmode == "exact") {
      g2 = SecondOracle::exact(obj);
    } else if (hmode == "corrupted") {
      g2 = SecondOracle::corrupted(obj, read_corruption(cfg, "second", params.p2),
                                   derive_seed(seed, Stream::kSecond));
    } else if (hmode == "fd") {
      g2 = SecondOracle::finite_difference(*z, sigma_for("second.sigma", SigmaKind::kHessFd, obj.L2()),
                                           eps_hat);
    } else {
      throw ConfigError("unknown second.mode: " + hmode);
    }
    if (cfg.flag("algorithm.record_beta", true)) {
      SecondOrderInputs in;
      in.L2 = obj.L2();
      in.kappa_bhm = cfg.num("algorithm.kappa_bhm", obj.L1());
      in.kappa_eg = g1->kappa_eg();
      in.kappa_eh = g2->kappa_eh();
      in.kappa_fod = params.kappa_fod;
      in.eta1 = params.eta1;
      in.eta2 = params.eta2;
      opt.beta_constants = constants_second(in);
      opt.beta_eps_g = g1->eps_g();
      opt.beta_eps_H = g2->eps_H();
    }
    cfg.finish();
    trace = run_tr2(obj, *z, *g1, *g2, params, x0, seed, opt);
  }

  const ConfigEcho& echo = cfg.resolved();
  write_file(output_path(common, "trace.csv"),
             [&](std::ostream& os) { write_trace_csv(os, trace, echo); });
  const Json summary = trace_summary_json(trace, echo);
  write_json(output_path(common, "summary.json"), summary);
  out << "iterations " << trace.records.size() << " min_grad_norm "
      << format_double(trace.summary.min_true_grad_norm) << " final_phi "
      << format_double(trace.final_phi) << '\n';
  return 0;
}

struct AdversarialFlags {
  std::optional<double> eps_f, eps_g, r;
  std::optional<int> iters;
};

int cmd_adversarial(const Common& common, const AdversarialFlags& flags, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, false);
  cfg.set_echo("command", "adversarial");
  AdversarialSpec s;
  s.seed = resolve_seed(cfg, common);
  s.eps_f = flags.eps_f ? *flags.eps_f : cfg.num("adversarial.eps_f", s.eps_f);
  s.eps_g = flags.eps_g ? *flags.eps_g : cfg.num("adversarial.eps_g", s.eps_g);
  s.r = flags.r ? *flags.r : cfg.num("adversarial.r", s.r);
  s.iters = flags.iters ? *flags.iters : static_cast<int>(cfg.integer("adversarial.iters", s.iters));
  cfg.set_echo("adversarial.eps_f", format_double(s.eps_f));
  cfg.set_echo("adversarial.eps_g", format_double(s.eps_g));
  cfg.set_echo("adversarial.r", format_double(s.r));
  cfg.set_echo("adversarial.iters", std::to_string(s.iters));
  s.dim = static_cast<int>(cfg.integer("adversarial.dim", s.dim));
  s.L1 = cfg.num("adversarial.L1", s.L1);
  s.p1 = cfg.num("adversarial.p1", s.p1);
  s.kappa_eg = cfg.num("adversarial.kappa_eg", s.kappa_eg);
  s.eta1 = cfg.num("adversarial.eta1", s.eta1);
  s.eta2 = cfg.num("adversarial.eta2", s.eta2);
  s.gamma = cfg.num("adversarial.gamma", s.gamma);
  s.delta0 = cfg.num("adversarial.delta0", s.delta0);
  s.x0_value = cfg.num("adversarial.x0", s.x0_value);
  const int window = static_cast<int>(cfg.integer("adversarial.window", 50));
  cfg.finish();
  if (s.iters < 1 || s.dim < 1) throw ConfigError("adversarial: iters and dim must be >= 1");
  if (s.eps_f < 0 || s.eps_g < 0 || s.r < 0) throw ConfigError("adversarial: eps_f, eps_g, r must be >= 0");

  const RunTrace trace = run_adversarial_experiment(s);
  const double level = stabilization_level(trace, window);

  FirstOrderInputs in;
  in.L1 = s.L1;
  in.kappa_eg = s.kappa_eg;
  in.kappa_fcd = 2.0;
  in.eta1 = s.eta1;
  in.eta2 = s.eta2;
  TrParams p = trace.params;
  const FloorResult floor =
      epsilon_floor(Regime::kFirstBounded, NoiseLevels{s.eps_f, s.eps_g, 0.0}, p, constants_first(in));

  const ConfigEcho& echo = cfg.resolved();
  write_file(output_path(common, "adversarial.csv"),
             [&](std::ostream& os) { write_trace_csv(os, trace, echo); });
  Json j = trace_summary_json(trace, echo);
  j["stabilization_level"] = level;
  j["window"] = window;
  j["epsilon_floor"] = floor.valid ? Json(floor.value) : Json(nullptr);
  write_json(output_path(common, "adversarial.json"), j);
  out << "stabilization_level " << format_double(level) << " epsilon_floor "
      << format_double(floor.value) << '\n';
  return 0;
}

std::vector<CurveSet> all_curves(const ProfileData& data, const std::vector<double>& taus,
                                 const std::vector<double>& alpha, const std::vector<double>& kappa) {
  std::vector<CurveSet> sets;
  for (double tau : taus) sets.push_back({"performance", tau, performance_profile(data, tau, alpha)});
  for (double tau : taus) sets.push_back({"data", tau, data_profile(data, tau, kappa)});
  return sets;
}

const std::vector<double> kAlphaGrid{1, 1.25, 1.5, 2, 3, 4, 6, 8, 16, 32};
const std::vector<double> kKappaGrid{1, 2, 5, 10, 20, 50, 100, 200, 500};

int cmd_sweep(const Common& common, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, false);
  cfg.set_echo("command", "sweep-r");
  SweepSpec s;
  s.seed = resolve_seed(cfg, common);
  s.jobs = common.jobs;
  s.noise = parse_noise_kind(cfg.str("sweep.noise", noise_kind_name(s.noise)));
  s.eps_f = cfg.num("sweep.eps_f", s.eps_f);
  s.a = cfg.num("sweep.a", s.a);
  s.r_values = cfg.list("sweep.r_values", s.r_values);
  s.replications = static_cast<int>(cfg.integer("sweep.replications", s.replications));
  s.budget_evals = cfg.integer("sweep.budget_evals", s.budget_evals);
  s.taus = cfg.list("sweep.taus", s.taus);
  s.L_ref = cfg.num("sweep.L_ref", s.L_ref);
  const auto alpha = cfg.list("sweep.alpha_grid", kAlphaGrid);
  const auto kappa = cfg.list("sweep.kappa_grid", kKappaGrid);
  s.params = read_params(cfg);
  cfg.finish();

  const ProfileData data = r_sweep(s);
  const auto sets = all_curves(data, s.taus, alpha, kappa);
  const ConfigEcho& echo = cfg.resolved();
  write_file(output_path(common, "profile.csv"),
             [&](std::ostream& os) { write_profile_csv(os, data, echo); });
  write_file(output_path(common, "curves.csv"),
             [&](std::ostream& os) { write_curves_csv(os, sets, echo); });
  Json j;
  j["curves"] = curves_json(sets);
  j["config"] = config_json(echo);
  write_json(output_path(common, "profile.json"), j);

  for (const auto& set : sets) {
    if (set.kind != "performance") continue;
    for (const auto& c : set.curves) {
      out << "tau " << format_double(set.tau) << ' ' << c.solver << " solved "
          << format_double(c.points.back().second) << '\n';
    }
  }
  return 0;
}

int cmd_profiles(const Common& common, const std::string& input_flag, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, false);
  cfg.set_echo("command", "profiles");
  std::string input = cfg.str("profiles.input", "");
  if (!input_flag.empty()) {
    input = input_flag;
    cfg.set_echo("profiles.input", input);
  }
  if (input.empty()) throw ConfigError("profiles: an input CSV is required (--input or profiles.input)");
  const auto alpha = cfg.list("profiles.alpha_grid", kAlphaGrid);
  const auto kappa = cfg.list("profiles.kappa_grid", kKappaGrid);
  std::ifstream is(input);
  if (!is) throw ConfigError("cannot open " + input);
  const ProfileData data = read_profile_csv(is);
  const auto taus = cfg.list("profiles.taus", data.taus());
  cfg.finish();

  const auto sets = all_curves(data, taus, alpha, kappa);
  // The echoed input path is left out of the CSV so that curves stay
  // comparable across locations.
  ConfigEcho csv_echo;
  for (const auto& kv : cfg.resolved()) {
    if (kv.first != "profiles.input") csv_echo.push_back(kv);
  }
  write_file(output_path(common, "curves.csv"),
             [&](std::ostream& os) { write_curves_csv(os, sets, csv_echo); });
  Json j;
  j["curves"] = curves_json(sets);
  j["config"] = config_json(cfg.resolved());
  write_json(output_path(common, "curves.json"), j);
  out << "problems " << data.problems().size() << " solvers " << data.solvers().size() << '\n';
  return 0;
}

int cmd_verify_bounds(const Common& common, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, false);
  cfg.set_echo("command", "verify-bounds");
  TailSpec s;
  s.seed = resolve_seed(cfg, common);
  s.jobs = common.jobs;
  s.dim = static_cast<int>(cfg.integer("tail.dim", s.dim));
  s.L1 = cfg.num("tail.L1", s.L1);
  s.x0_value = cfg.num("tail.x0", s.x0_value);
  s.eps_f = cfg.num("tail.eps_f", s.eps_f);
  s.gradient.eps = cfg.num("tail.eps_g", s.gradient.eps);
  s.gradient.kappa = cfg.num("tail.kappa_eg", s.gradient.kappa);
  s.gradient.p = cfg.num("tail.p", s.gradient.p);
  s.gradient.outlier_scale = cfg.num("tail.outlier_scale", s.gradient.outlier_scale);
  const double epsilon = cfg.num("tail.epsilon", 1.0);
  const double p_hat = cfg.num("tail.p_hat_design", 0.5 * (0.5 + s.gradient.p));
  const int runs = static_cast<int>(cfg.integer("tail.runs", 200));
  const long T = cfg.integer("tail.T", 0);
  s.params = read_params(cfg);
  cfg.finish();

  const TailResult res = monte_carlo_tail(s, epsilon, T, runs, p_hat);
  write_json(output_path(common, "bounds.json"), tail_result_json(res, cfg.resolved()));
  out << "T " << res.report.T << " empirical " << format_double(res.empirical_prob) << " bound "
      << format_double(res.report.theoretical_bound) << (res.pass ? " PASS" : " FAIL") << '\n';
  return res.pass ? 0 : 1;
}

int cmd_fd_check(const Common& common, std::ostream& out) {
  Config cfg;
  load_config(cfg, common, false);
  cfg.set_echo("command", "fd-check");
  FdCheckSpec s;
  s.seed = resolve_seed(cfg, common);
  s.objective = read_objective(cfg, "scaled_sphere", 20);
  s.x_value = cfg.num("fd_check.x", s.x_value);
  s.eps_f = cfg.num("fd_check.eps_f", s.eps_f);
  s.grid_points = static_cast<int>(cfg.integer("fd_check.grid_points", s.grid_points));
  s.span = cfg.num("fd_check.span", s.span);
  cfg.finish();

  const auto rows = fd_check(s);
  bool all = true;
  for (const auto& r : rows) {
    all = all && r.pass;
    out << r.kind << " sigma " << format_double(r.sigma) << " error " << format_double(r.error)
        << " bound " << format_double(r.bound) << (r.pass ? " ok" : " VIOLATED") << '\n';
  }
  write_json(output_path(common, "fd_check.json"), fd_check_json(rows, cfg.resolved()));
  return all ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy trust-region experiments"};
  app.require_subcommand(1);
  Common common;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "INI configuration file");
    sub->add_option("--seed", seed_value, "Master seed (overrides NOISYTR_SEED and run.seed)");
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "Run one trust-region solve");
  add_common(solve);

  AdversarialFlags aflags;
  auto* adv = app.add_subcommand("adversarial", "Worst-case oracle experiment");
  add_common(adv);
  adv->add_option("--eps-f", aflags.eps_f, "Zeroth-order noise bound");
  adv->add_option("--eps-g", aflags.eps_g, "Gradient error floor");
  adv->add_option("--r", aflags.r, "Relaxation in the ratio test");
  adv->add_option("--iters", aflags.iters, "Iterations");

  auto* sweep = app.add_subcommand("sweep-r", "Profile the second-order method over relaxation values");
  add_common(sweep);

  std::string input;
  auto* prof = app.add_subcommand("profiles", "Performance and data profiles from a CSV");
  add_common(prof);
  prof->add_option("--input", input, "Convergence table CSV");

  auto* verify = app.add_subcommand("verify-bounds", "Monte-Carlo check of the iteration bound");
  add_common(verify);

  auto* fdc = app.add_subcommand("fd-check", "Finite-difference error bounds under noise");
  add_common(fdc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (auto* sub : {solve, adv, sweep, prof, verify, fdc}) {
    if (sub->parsed() && sub->count("--seed") > 0) common.seed_flag = seed_value;
  }

  try {
    if (solve->parsed()) return cmd_solve(common, out);
    if (adv->parsed()) return cmd_adversarial(common, aflags, out);
    if (sweep->parsed()) return cmd_sweep(common, out);
    if (prof->parsed()) return cmd_profiles(common, input, out);
    if (verify->parsed()) return cmd_verify_bounds(common, out);
    if (fdc->parsed()) return cmd_fd_check(common, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

}  // namespace noisytr
