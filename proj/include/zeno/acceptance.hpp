#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace zeno {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct Criterion {
  int id;
  std::string name;
  /// Runtime budget in seconds; exceeding it fails the criterion.  0 means none.
  double time_limit;
  /// Fills passed and detail.
  std::function<void(CriterionResult&)> check;
};

const std::vector<Criterion>& acceptance_criteria();

/// Criterion selection: empty matches all; otherwise the id or a substring of the name.
bool criterion_matches(const Criterion& c, const std::string& filter);

/// Runs the selected criteria in order.  When `log` is set, one
/// "PASS|FAIL <id> <name>: <detail> (<seconds> s)" line is written per
/// criterion as it finishes.  Exceptions inside a check count as failures.
std::vector<CriterionResult> run_acceptance(const std::string& filter, std::ostream* log = nullptr);

std::string format_result(const CriterionResult& r);

}  // namespace zeno
