#pragma once

#include <string>
#include <vector>

namespace corrbandit {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast self-check used by `corrbandit validate`: scalarization properties, budget and
// identity audits on short episodes, the negative audit and determinism.
std::vector<CheckResult> run_quick_validation();

}  // namespace corrbandit
