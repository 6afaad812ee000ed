#pragma once

// Acceptance bundles shared by `kpplab verify` and the acceptance test binary.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace kpplab {

struct Criterion {
  std::string suite;
  std::string id;
  std::string description;
  bool passed = false;
  /// Reported but not gated.
  bool soft = false;
  std::string measured;
  double seconds = 0.0;
};

struct SuiteOptions {
  /// Run artifacts go to <out_root>/verify/<suite>/...; nullopt keeps runs in memory.
  std::optional<std::filesystem::path> out_root;
  /// Called as each criterion completes.
  std::function<void(const Criterion&)> on_result;
};

/// formulas, waves, oracles, fronts-fast, fronts-full.
const std::vector<std::string>& suite_names();

/// Throws ValidationError for an unknown suite.
std::vector<Criterion> run_suite(const std::string& suite, const SuiteOptions& options = {});

/// One line: `PASS|FAIL|INFO  <suite>/<id>  <description>  [<measured>]`.
std::string format_criterion(const Criterion& c);

}  // namespace kpplab
