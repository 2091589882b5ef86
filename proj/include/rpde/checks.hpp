#pragma once

#include "rpde/config.hpp"

#include <string>
#include <vector>

namespace rpde {

/// One named invariant: pass iff value <= threshold (or >= when lower_bound).
struct CheckResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool lower_bound = false;
  bool pass = false;
};

/// The invariant suite run by the `check` subcommand.  Sizes follow the
/// configuration (modes, kernel, seed); grid levels are capped so that a run
/// stays within a few seconds.
std::vector<CheckResult> run_check_suite(const RunConfig& cfg);

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace rpde
