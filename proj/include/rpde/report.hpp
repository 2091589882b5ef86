#pragma once

#include "rpde/checks.hpp"
#include "rpde/config.hpp"
#include "rpde/solver.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace rpde {

using Json = nlohmann::ordered_json;

Json config_json(const RunConfig& cfg);
Json checks_json(const RunConfig& cfg, const std::vector<CheckResult>& results);
Json solve_json(const RunConfig& cfg, const SolveReport& rep, const LemmaDiagnostics& diag);

/// "t_index,s_index,a_1_1..a_m_m" rows of the second level, 17 significant digits.
std::string area_csv(const RoughLift& lift);
Json lift_meta_json(const RunConfig& cfg, const RoughLift& lift, int level);

struct ConvergeRow {
  int level = 0;
  std::size_t steps = 0;
  double horizon = 0.0;
  double lift_distance = 0.0;  ///< rough distance to the finest lift of the same draw
  double solution_error = 0.0; ///< sup error against the reference solution
  double euler_error = 0.0;    ///< coarse exponential Euler against the same reference (sine noise only)
  int iterations = 0;
};

/// Refinement table over cfg.converge.levels.  Sine noise is compared with
/// exponential Euler at reference_level and reference_level + 1,
/// Richardson-extrapolated.  fBm is compared with the rough solution at the
/// finest listed level of the same draw.
std::vector<ConvergeRow> converge_table(const RunConfig& cfg);
/// "level,steps,horizon,lift_distance,solution_error,euler_error,iterations".
std::string converge_csv(const std::vector<ConvergeRow>& rows);

/// %.17g.
std::string format_double(double v);

}  // namespace rpde
