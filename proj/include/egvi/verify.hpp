#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace egvi {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Suite {
  std::string name;
  std::string description;
  std::function<std::vector<CheckResult>()> run;
};

// Acceptance suites in a fixed order.
const std::vector<Suite>& theory_suites();

// "all" runs every suite; otherwise the named suite. Unknown names raise ConfigError.
std::vector<CheckResult> verify_theory(std::string_view selector);

// One line per check: "PASS <suite> <name> <detail>".
std::string format_check(const CheckResult& check);

}  // namespace egvi
