#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fpme {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // measured value vs bound
};

struct ValidateOptions {
    bool quick = false;           // smaller grids and sample counts
    std::uint64_t seed = 20240u;  // drives every randomized probe
};

/// Runs the invariant suite: theta properties, kernel closed form and symmetry,
/// duality identity, action homogeneity/convexity, transport estimate, metric
/// axioms, rescaling, constant-speed profile, JKO energy inequality, and the
/// oracle agreements.
std::vector<CheckResult> run_validation(const ValidateOptions& opts);

}  // namespace fpme
