#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "noisytr/bench.hpp"
#include "noisytr/core.hpp"

namespace noisytr {

using Json = nlohmann::ordered_json;

// Resolved configuration as ordered (key, value) pairs, echoed into every
// output file.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

// %.17g; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double v);

// Writes "# key = value" lines.
void write_config_comments(std::ostream& os, const ConfigEcho& echo);
Json config_json(const ConfigEcho& echo);

// One row per iteration. Columns: k, delta, g_norm, h_norm, h_lambda_min,
// beta_m, step_norm, model_decrease, rho, accepted, success, true_grad_norm,
// phi, phi_trial, f_k, f_k_plus, e_k, e_k_plus, g_error, h_error, g_in_spec,
// h_in_spec, I_k, J_k, beta, branch, y1, y2.
void write_trace_csv(std::ostream& os, const RunTrace& trace, const ConfigEcho& echo);

// Summary fields, counts of I_k/J_k/success events and the config echo.
Json trace_summary_json(const RunTrace& trace, const ConfigEcho& echo);

// Columns: solver, problem, dim, tau, evals, ratio. DNF entries are written
// as "DNF" with ratio "inf".
void write_profile_csv(std::ostream& os, const ProfileData& data, const ConfigEcho& echo);
// Reads the columns solver, problem, dim, tau, evals (others ignored). Lines
// starting with '#' are skipped. Throws ConfigError on malformed input.
ProfileData read_profile_csv(std::istream& is);

// Columns: kind, tau, solver, x, value.
struct CurveSet {
  std::string kind;
  double tau = 0.0;
  std::vector<Curve> curves;
};
void write_curves_csv(std::ostream& os, const std::vector<CurveSet>& sets, const ConfigEcho& echo);
Json curves_json(const std::vector<CurveSet>& sets);

Json bound_report_json(const BoundReport& report);
Json tail_result_json(const TailResult& result, const ConfigEcho& echo);
Json fd_check_json(const std::vector<FdCheckRow>& rows, const ConfigEcho& echo);

}  // namespace noisytr
