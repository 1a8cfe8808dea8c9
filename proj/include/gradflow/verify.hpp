#pragma once

#include <string>
#include <vector>

#include "gradflow/cases.hpp"

namespace gradflow {

struct CheckResult {
    std::string name;
    double value = 0;
    double tol = 0;
    bool below = true;  // pass when value < tol (otherwise value > tol)
    bool pass = false;
    std::string note;
};

struct VerifyOptions {
    int frame_points = 50;
    int surface_points = 10;
    std::uint64_t seed = 2024;
};

// Invariant suite for one built-in case: self-test, frame and helicity
// identities, conservation along the flow, Poisson pair construction,
// surface curvature and bracket identities.
std::vector<CheckResult> verify_case(const CaseSystem& cs, const VerifyOptions& opts = {});

} // namespace gradflow
