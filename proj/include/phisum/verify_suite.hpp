#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phisum {

/// One measured quantity of a criterion; it passes when value <= tol.
struct Check {
  std::string label;
  double value = 0.0;
  double tol = 0.0;
  /// Wall-clock measurements are excluded from determinism comparisons.
  bool timing = false;

  bool pass() const { return value <= tol; }
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<Check> checks;  // checks[0] is the headline row
  std::string error;
  double seconds = 0.0;

  bool pass() const;
};

struct SuiteOptions {
  /// Criterion ids to run; empty runs all of them.
  std::vector<int> filter;
  /// Replaces every tolerance (harness self-test).
  std::optional<double> tol_override;
};

std::vector<int> criterion_ids();
std::string criterion_title(int id);

/// Runs one criterion; never throws, failures are recorded in the result.
CriterionResult run_criterion(int id, const SuiteOptions& opt = {});

/// `on_row` sees each result as soon as it is available.
std::vector<CriterionResult> verify_suite(const SuiteOptions& opt = {},
                                          const std::function<void(const CriterionResult&)>& on_row = {});

/// "id status value tol title" rows; values use %.10g.
std::string format_row(const CriterionResult& r);
std::string format_table(const std::vector<CriterionResult>& rows);

}  // namespace phisum
