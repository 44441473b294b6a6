#pragma once

#include <string>
#include <vector>

namespace igs {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const;
};

// Fast structural and numerical invariants (a few seconds in total).
ValidationReport run_validation_suite();

}  // namespace igs
