#pragma once

#include <string>
#include <vector>

namespace hmln {

struct CheckInfo {
    std::string name;
    std::string description;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    /// Worst observed error and the tolerance it was held to.
    double worst = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

/// Built-in oracle checks, in execution order.
const std::vector<CheckInfo>& oracle_checks();

/// Runs the named check on its built-in fixtures. Throws InvalidArgument for unknown names.
CheckResult run_check(const std::string& name, std::uint64_t seed = 1);

}  // namespace hmln
