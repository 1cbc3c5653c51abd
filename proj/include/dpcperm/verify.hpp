#pragma once

// Self-check suites behind `dpcperm verify`. Each suite draws seeded channels
// and compares the library against its own algebraic identities; a check passes
// when err < tolerance * scale, so scale 0 forces every measured check to fail.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dpcperm {

struct SuiteResult {
    std::string name;
    bool passed = true;
    std::size_t checks = 0;
    std::size_t failures = 0;
    double worst_ratio = 0.0;  // max err / tolerance over measured checks
    std::string first_failure;
};

const std::vector<std::string_view>& verify_suite_names();

/// Throws Error(InvalidArgument) for an unknown suite.
SuiteResult run_verify_suite(std::string_view name, double tolerance_scale = 1.0);

/// DPC_PERM_VERIFY_TOLERANCE_SCALE if set and parseable as a finite value >= 0.
std::optional<double> tolerance_scale_from_env();

}  // namespace dpcperm
