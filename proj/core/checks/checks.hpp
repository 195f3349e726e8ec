#ifndef POLARCBO_CHECKS_HPP
#define POLARCBO_CHECKS_HPP

#include <string>
#include <vector>

namespace polarcbo::checks {

struct CheckResult {
  std::string name;
  bool pass = false;
  bool informational = false;
  std::string detail;
  double seconds = 0.0;
};

/// Names in execution order:
/// reduction-equivalence, gaussian-stationarity, table1-desk, table2-desk,
/// unimodal-consistency, lyapunov-decay, invariant-suites, scope-exclusions.
std::vector<std::string> check_names();

CheckResult run_check(const std::string& name, int jobs = 0);

std::vector<CheckResult> run_all(int jobs = 0);

/// One "name: PASS/FAIL (detail)" line.
std::string format_result(const CheckResult& result);

}  // namespace polarcbo::checks

#endif
