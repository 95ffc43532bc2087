#include "noisytr/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace noisytr {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_config_comments(std::ostream& os, const ConfigEcho& echo) {
  for (const auto& [k, v] : echo) os << "# " << k << " = " << v << '\n';
}

Json config_json(const ConfigEcho& echo) {
  Json j = Json::object();
  for (const auto& [k, v] : echo) j[k] = v;
  return j;
}

namespace {

// JSON has no NaN/inf; those become null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

const char* b(bool v) { return v ? "1" : "0"; }

}  // namespace

void write_trace_csv(std::ostream& os, const RunTrace& trace, const ConfigEcho& echo) {
  write_config_comments(os, echo);
  os << "k,delta,g_norm,h_norm,h_lambda_min,beta_m,step_norm,model_decrease,rho,accepted,"
        "success,true_grad_norm,phi,phi_trial,f_k,f_k_plus,e_k,e_k_plus,g_error,h_error,"
        "g_in_spec,h_in_spec,I_k,J_k,beta,branch,y1,y2\n";
  for (const auto& r : trace.records) {
    os << r.k << ',' << format_double(r.delta) << ',' << format_double(r.g_norm) << ','
       << format_double(r.h_norm) << ',' << format_double(r.h_lambda_min) << ','
       << format_double(r.beta_m) << ',' << format_double(r.step_norm) << ','
       << format_double(r.model_decrease) << ',' << format_double(r.rho) << ',' << b(r.accepted)
       << ',' << b(r.success) << ',' << format_double(r.true_grad_norm) << ','
       << format_double(r.phi_value) << ',' << format_double(r.phi_trial) << ','
       << format_double(r.f_k) << ',' << format_double(r.f_k_plus) << ','
       << format_double(r.e_k) << ',' << format_double(r.e_k_plus) << ','
       << format_double(r.g_error) << ',' << format_double(r.h_error) << ',' << b(r.g_in_spec)
       << ',' << b(r.h_in_spec) << ',' << b(r.I_k) << ',' << b(r.J_k) << ','
       << format_double(r.beta) << ',' << r.adversary_branch << ','
       << format_double(r.adversary_y1) << ',' << format_double(r.adversary_y2) << '\n';
  }
}

Json trace_summary_json(const RunTrace& trace, const ConfigEcho& echo) {
  long n_i = 0, n_j = 0, n_s = 0, n_acc = 0;
  for (const auto& r : trace.records) {
    n_i += r.I_k;
    n_j += r.J_k;
    n_s += r.success;
    n_acc += r.accepted;
  }
  Json j;
  j["seed"] = trace.seed;
  j["iterations"] = trace.records.size();
  j["evaluations"] = trace.phi_per_evaluation.size();
  j["min_true_grad_norm"] = num(trace.summary.min_true_grad_norm);
  j["min_beta"] = num(trace.summary.min_beta);
  j["final_phi"] = num(trace.final_phi);
  j["final_delta"] = num(trace.final_delta);
  j["radius_underflow"] = trace.radius_underflow;
  j["accepted"] = n_acc;
  j["successful"] = n_s;
  j["I_true"] = n_i;
  j["J_true"] = n_j;
  Json x = Json::array();
  for (Eigen::Index i = 0; i < trace.final_x.size(); ++i) x.push_back(num(trace.final_x(i)));
  j["final_x"] = x;
  j["config"] = config_json(echo);
  return j;
}

void write_profile_csv(std::ostream& os, const ProfileData& data, const ConfigEcho& echo) {
  write_config_comments(os, echo);
  os << "solver,problem,dim,tau,evals,ratio\n";
  for (const auto& e : data.entries) {
    const auto r = data.ratio(e);
    os << e.solver << ',' << e.problem << ',' << e.dim << ',' << format_double(e.tau) << ',';
    if (e.evals) {
      os << *e.evals;
    } else {
      os << "DNF";
    }
    os << ',' << format_double(r ? *r : std::numeric_limits<double>::infinity()) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto z = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, z - a + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("profile csv: bad " + what + " '" + s + "'");
  }
}

}  // namespace

ProfileData read_profile_csv(std::istream& is) {
  std::string line;
  std::map<std::string, std::size_t> col;
  ProfileData data;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (col.empty()) {
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const char* need : {"solver", "problem", "dim", "tau", "evals"}) {
        if (!col.count(need)) throw ConfigError(std::string("profile csv: missing column ") + need);
      }
      continue;
    }
    auto at = [&](const char* name) -> const std::string& {
      const std::size_t i = col.at(name);
      if (i >= cells.size()) throw ConfigError("profile csv: short row: " + line);
      return cells[i];
    };
    ProfileEntry e;
    e.solver = at("solver");
    e.problem = at("problem");
    e.dim = static_cast<int>(parse_num(at("dim"), "dim"));
    e.tau = parse_num(at("tau"), "tau");
    const std::string& ev = at("evals");
    if (ev != "DNF") {
      const double v = parse_num(ev, "evals");
      if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("profile csv: evals must be a positive integer");
      e.evals = static_cast<long>(v);
    }
    data.entries.push_back(std::move(e));
  }
  if (col.empty()) throw ConfigError("profile csv: no header");
  return data;
}

void write_curves_csv(std::ostream& os, const std::vector<CurveSet>& sets, const ConfigEcho& echo) {
  write_config_comments(os, echo);
  os << "kind,tau,solver,x,value\n";
  for (const auto& s : sets) {
    for (const auto& c : s.curves) {
      for (const auto& [x, v] : c.points) {
        os << s.kind << ',' << format_double(s.tau) << ',' << c.solver << ',' << format_double(x)
           << ',' << format_double(v) << '\n';
      }
    }
  }
}

Json curves_json(const std::vector<CurveSet>& sets) {
  Json out = Json::array();
  for (const auto& s : sets) {
    Json js;
    js["kind"] = s.kind;
    js["tau"] = s.tau;
    Json cs = Json::array();
    for (const auto& c : s.curves) {
      Json jc;
      jc["solver"] = c.solver;
      Json pts = Json::array();
      for (const auto& [x, v] : c.points) pts.push_back({num(x), num(v)});
      jc["points"] = pts;
      cs.push_back(jc);
    }
    js["curves"] = cs;
    out.push_back(js);
  }
  return out;
}

Json bound_report_json(const BoundReport& r) {
  Json j;
  j["regime"] = regime_name(r.regime);
  j["epsilon"] = num(r.epsilon);
  j["epsilon_floor"] = num(r.floor.value);
  j["floor_valid"] = r.floor.valid;
  if (!r.floor.reason.empty()) j["floor_reason"] = r.floor.reason;
  j["T"] = r.T;
  j["p_hat_design"] = num(r.p_hat_design);
  j["p_hat"] = {{"value", num(r.p_hat.value)},
                {"raw", num(r.p_hat.raw)},
                {"lower", num(r.p_hat.lower)},
                {"upper", num(r.p_hat.upper)},
                {"clipped", r.p_hat.clipped}};
  j["failure_prob"] = num(r.failure_prob);
  j["theoretical_bound"] = num(r.theoretical_bound);
  j["constants"] = {{"C1", num(r.constants.C1)}, {"C2", num(r.constants.C2)}, {"C3", num(r.constants.C3)}};
  j["inputs"] = {{"L1", num(r.constants.in.L1)},
                 {"kappa_bhm", num(r.constants.in.kappa_bhm)},
                 {"kappa_eg", num(r.constants.in.kappa_eg)},
                 {"kappa_fcd", num(r.constants.in.kappa_fcd)},
                 {"eta1", num(r.params.eta1)},
                 {"eta2", num(r.params.eta2)},
                 {"gamma", num(r.params.gamma)},
                 {"r", num(r.params.r)},
                 {"p1", num(r.params.p1)},
                 {"eps_f", num(r.noise.eps_f)},
                 {"eps_g", num(r.noise.eps_g)},
                 {"grad_norm0", num(r.anchors.stationarity0)},
                 {"delta0", num(r.anchors.delta0)},
                 {"phi0", num(r.anchors.phi0)},
                 {"phi_hat", num(r.anchors.phi_hat)}};
  return j;
}

Json tail_result_json(const TailResult& res, const ConfigEcho& echo) {
  Json j;
  j["bound"] = bound_report_json(res.report);
  j["n_runs"] = res.n_runs;
  j["successes"] = res.successes;
  j["empirical_prob"] = num(res.empirical_prob);
  j["margin"] = num(res.margin);
  j["pass"] = res.pass;
  j["config"] = config_json(echo);
  return j;
}

Json fd_check_json(const std::vector<FdCheckRow>& rows, const ConfigEcho& echo) {
  Json j;
  Json arr = Json::array();
  bool all = true;
  for (const auto& r : rows) {
    arr.push_back({{"kind", r.kind}, {"sigma", num(r.sigma)}, {"error", num(r.error)},
                   {"bound", num(r.bound)}, {"pass", r.pass}});
    all = all && r.pass;
  }
  j["rows"] = arr;
  j["pass"] = all;
  j["config"] = config_json(echo);
  return j;
}

}  // namespace noisytr
