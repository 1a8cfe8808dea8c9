#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gradflow/expr.hpp"

namespace gradflow {

struct NamedExpr {
    std::string name;
    Expr expr;
    std::string source;  // text as written
};

// Built-in gradient systems with their potentials, Hamiltonians and
// conserved quantities.
struct CaseSystem {
    std::string name;
    FieldDef field;
    NamedExpr potential;
    std::vector<NamedExpr> hamiltonians;
    std::vector<NamedExpr> conserved;
    ParamMap params;

    // Domain predicate and a human-readable description of what it excludes.
    std::function<bool(const Vec3&)> admissible;
    std::string exclusion;
    // Positive inside the admissible region, growing with the distance from
    // the excluded set; used to keep random samples away from singular loci.
    std::function<double(const Vec3&)> margin;
    Vec3 sample_lo = Vec3::Constant(-2), sample_hi = Vec3::Constant(2);

    Vec3 default_seed = Vec3::Ones();
    // Seed for frame-based checks. Differs from default_seed only when the
    // latter sits on a locus where the frame case changes.
    Vec3 frame_seed = Vec3::Ones();
    // Level of the potential used for the surface checks and a
    // parametrization (a, b) -> point of that level set, when available.
    double surface_level = 0;
    std::function<Vec3(double, double)> surface_point;

    // Hamiltonian without a closed form, evaluated numerically (aristotle).
    std::function<double(const Vec3&)> computed_hamiltonian;
    std::string computed_hamiltonian_name;
};

std::vector<std::string> case_names();

// Builds the case and runs its self-test; throws ConfigError for an unknown
// name or invalid parameters and Error if the self-test fails.
CaseSystem get_case(std::string_view name, const ParamMap& params = {});

// Uniform sample in the case box with margin(x) >= min_margin.
Vec3 random_admissible_point(const CaseSystem& cs, std::mt19937_64& rng, double min_margin = 0.1);

struct SelfTestReport {
    int points = 0;
    double max_gradient_mismatch = 0;  // |grad F - v| / (1 + |v|)
    double max_conserved_rate = 0;     // |grad H . v| / (1 + |grad H| |v|)
    bool ok = false;
};

SelfTestReport self_test(const CaseSystem& cs, int points = 100, std::uint64_t seed = 12345);

// Aristotelian surface F = 1 in the coordinates (u, w) of the ruled
// parametrization: x - z = (u + 1/2) f(u), y - z = f(u), with
// f(u) = e / ((u + 1/2)^b (u - 1/2)^c), u > 1/2.
double aristotle_f(double u, double b, double c);

// Second Hamiltonian: arclength integral of |alpha'(t)| from u0 to the u
// coordinate of the point obtained by following the flow back to F = 1.
double aristotle_h2(const CaseSystem& cs, const Vec3& x, double u0 = 1.0);

} // namespace gradflow
