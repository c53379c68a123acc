#pragma once

#include <json.hpp>
#include <string>

#include "mpradon/report.hpp"

namespace mpradon::cli {

/// Runs one experiment described by a flat JSON config. Throws
/// std::invalid_argument on schema problems (mapped to exit 2 by the
/// driver). The returned bundle carries PASS/FAIL checks; newton-verdict
/// experiments also set a dedicated exit code.
struct RunOutcome {
  report::ReportBundle bundle;
  int exit_code = 0;
};

RunOutcome run_experiment(const std::string& kind, const nlohmann::json& config,
                          const std::string& out_dir);

/// Writes the fixture corpus of ready-to-run configs; returns the count.
int emit_gallery(const std::string& out_dir);

}  // namespace mpradon::cli
