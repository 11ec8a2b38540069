#include <cstdio>

#include "cli_commands.hpp"
#include "xugt/errors.hpp"
#include "xugt/selfcheck.hpp"

namespace xugt::cli {

int run_selfcheck_cmd(const SelfcheckOptions& opt) {
  apply_threads(opt.threads);

  CheckOptions check;
  check.seed = opt.seed;
  if (opt.inject_fault.empty()) {
    check.fault = Fault::kNone;
  } else if (opt.inject_fault == "shift-direction") {
    check.fault = Fault::kShiftDirection;
  } else {
    throw ConfigError("unknown --inject-fault value: " + opt.inject_fault);
  }

  const std::vector<CheckResult> results = run_selfcheck(check);
  int failures = 0;
  for (const CheckResult& r : results) {
    std::printf("[%s] %-26s (%.2fs) %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(), r.seconds,
                r.detail.c_str());
    if (!r.pass) ++failures;
  }
  if (failures == 0) {
    std::printf("selfcheck: %zu/%zu suites passed\n", results.size(), results.size());
    return 0;
  }
  std::printf("selfcheck: %d suite%s failed:", failures, failures == 1 ? "" : "s");
  for (const CheckResult& r : results) {
    if (!r.pass) std::printf(" %s", r.name.c_str());
  }
  std::printf("\n");
  return 5;
}

}  // namespace xugt::cli
