#pragma once

#include <string>
#include <vector>

#include "xugt/model.hpp"

namespace xugt {

// Fault injection for exercising the failure path: kShiftDirection makes the
// shift suite validate against a deliberately reversed direction convention,
// simulating a broken implementation.
enum class Fault { kNone, kShiftDirection };

struct CheckOptions {
  uint64_t seed = 20260822;
  Fault fault = Fault::kNone;
};

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// The six oracle suites, also runnable individually:
//   conv-oracle-equivalence  fast paths + composites vs the naive reference
//   shift-permutation        permutation-with-zero-fill + interior recovery
//   tada-identity            alpha=0 model bitwise equals gate-free model
//   simam-closed-form        zero params, constant case, scalar oracle
//   poly1-gradient           analytic value/gradient vs finite differences
//   analyzer-enumeration     closed forms vs buffer sums and tap counter
CheckResult check_conv_oracle(const CheckOptions& opt);
CheckResult check_shift_permutation(const CheckOptions& opt);
CheckResult check_tada_identity(const CheckOptions& opt);
CheckResult check_simam_closed_form(const CheckOptions& opt);
CheckResult check_poly1_gradient(const CheckOptions& opt);
CheckResult check_analyzer_enumeration(const CheckOptions& opt);

std::vector<CheckResult> run_selfcheck(const CheckOptions& opt);

}  // namespace xugt
