#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace emm {

/// Runs one `emm` command line. Returns the process exit status: 0 on
/// success, 2 when a solve stops at max_iters, 1 on any error (diagnostic on
/// `err`).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// One row of a verification suite.
struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  std::string relation;  // how value is compared with limit
  bool pass = false;
};

std::vector<std::string> suite_names();

/// Runs the named suite ("all" runs every suite). UnknownSuite otherwise.
std::vector<CheckResult> run_suite(const std::string& suite, unsigned long long seed = 0);

/// Recomputes the input hashes recorded in a JSON or CSV artifact. Returns
/// one row per recorded input.
std::vector<CheckResult> check_artifact_hashes(const std::string& artifact_path);

nlohmann::json to_json(const std::vector<CheckResult>& rows);

}  // namespace emm
