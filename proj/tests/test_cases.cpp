#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gradflow/cases.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/trajectory.hpp"

using namespace gradflow;

TEST_CASE("sphere case") {
    const CaseSystem cs = get_case("sphere");
    const Vec3 x(0.3, -1.2, 0.8);
    CHECK(cs.field.value(x) == x);
    CHECK(eval_value(cs.potential.expr, x) == doctest::Approx(x.squaredNorm() / 2));
    REQUIRE(cs.conserved.size() == 2);
    CHECK(cs.conserved[0].name == "y/x");
    CHECK(cs.conserved[1].name == "z/x");
    // Hamiltonians are the distances to (0,0,1) and (1,0,0) on the unit sphere
    const Vec3 p = Vec3(0.5, 0.3, 0.7).normalized();
    CHECK(eval_value(cs.hamiltonians[0].expr, p) == doctest::Approx(std::acos(p[2])));
    CHECK(eval_value(cs.hamiltonians[1].expr, p) == doctest::Approx(std::acos(p[0])));
    CHECK_THROWS_AS(get_case("sphere", {{"a", 1}}), ConfigError);
}

TEST_CASE("euler-like case") {
    const CaseSystem cs = get_case("euler-like");
    CHECK(cs.field.value({1, 2, 3}) == Vec3(6, 3, 2));
    CHECK(eval_value(cs.potential.expr, {1, 2, 3}) == 6.0);
    REQUIRE(cs.hamiltonians.size() == 2);
    const Vec3 x(0.7, -1.1, 1.9);
    CHECK(eval_value(cs.hamiltonians[0].expr, x) ==
          doctest::Approx((x[0] * x[0] + x[1] * x[1] - 2 * x[2] * x[2]) / 2));
    CHECK(eval_value(cs.hamiltonians[1].expr, x) == doctest::Approx((x[2] * x[2] - x[0] * x[0]) / 2));
}

TEST_CASE("aristotle case") {
    const CaseSystem cs = get_case("aristotle", {{"a", 1.0 / 3}, {"b", 1.0 / 3}, {"c", 1.0 / 3}});
    CHECK(cs.admissible({3, 2, 1}));
    CHECK_FALSE(cs.admissible({2, 2, 1}));
    CHECK_FALSE(cs.admissible({3, 1, 1}));
    CHECK_FALSE(cs.admissible({1, 2, 3}));
    for (const char* pole : {"x = y", "y = z", "x = z"}) CHECK(cs.exclusion.find(pole) != std::string::npos);
    // field as the sum of pairwise attractions, with a = b = c = 1/3
    const Vec3 x(4, 2.5, 1);
    const double a = 1.0 / 3;
    const Vec3 expect(a / (x[0] - x[1]) + a / (x[0] - x[2]), a / (x[1] - x[0]) + a / (x[1] - x[2]),
                      a / (x[2] - x[0]) + a / (x[2] - x[1]));
    CHECK((cs.field.value(x) - expect).norm() < 1e-15);
    CHECK(cs.default_seed == Vec3(3, 2, 1));
    CHECK(cs.surface_level == 1.0);
}

TEST_CASE("aristotle parameters") {
    CHECK_NOTHROW(get_case("aristotle", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}}));
    CHECK_THROWS_AS(get_case("aristotle", {{"a", 0.5}, {"b", 0.5}, {"c", 0.5}}), ConfigError);
    CHECK_THROWS_AS(get_case("aristotle", {{"a", -0.2}, {"b", 0.6}, {"c", 0.6}}), ConfigError);
    CHECK_THROWS_AS(get_case("aristotle", {{"d", 1}}), ConfigError);
    const CaseSystem cs = get_case("aristotle", {{"a", 0.5}, {"b", 0.3}, {"c", 0.2}});
    CHECK(cs.params.at("a") == 0.5);
    CHECK(cs.params.at("c") == 0.2);
}

TEST_CASE("unknown case") {
    CHECK_THROWS_AS(get_case("unknown"), ConfigError);
    CHECK(case_names() == std::vector<std::string>{"sphere", "euler-like", "aristotle"});
}

TEST_CASE("self-tests: potential gradient and conserved quantities") {
    for (const std::string& name : case_names()) {
        const SelfTestReport r = self_test(get_case(name), 100, 99);
        CHECK(r.ok);
        CHECK(r.points == 100);
        CHECK(r.max_gradient_mismatch < 1e-10);
        CHECK(r.max_conserved_rate < 1e-10);
    }
}

TEST_CASE("random admissible points respect the margin") {
    std::mt19937_64 rng(61);
    for (const std::string& name : case_names()) {
        const CaseSystem cs = get_case(name);
        for (int k = 0; k < 200; ++k) {
            const Vec3 x = random_admissible_point(cs, rng, 0.25);
            CHECK(cs.admissible(x));
            CHECK(cs.margin(x) >= 0.25);
        }
    }
}

TEST_CASE("aristotle surface parametrization lies on F = 1") {
    for (const auto& params : {ParamMap{}, ParamMap{{"a", 0.5}, {"b", 0.3}, {"c", 0.2}}}) {
        const CaseSystem cs = get_case("aristotle", params);
        for (double u : {0.6, 1.0, 2.5})
            for (double z : {-1.0, 0.0, 2.0}) {
                const Vec3 x = cs.surface_point(u, z);
                CHECK(cs.admissible(x));
                CHECK(eval_value(cs.potential.expr, x, cs.params) == doctest::Approx(1.0).epsilon(1e-13));
            }
    }
    CHECK_THROWS_AS(aristotle_f(0.5, 1.0 / 3, 1.0 / 3), DomainError);
}

TEST_CASE("aristotle second Hamiltonian") {
    const CaseSystem cs = get_case("aristotle");
    REQUIRE(cs.computed_hamiltonian);
    SUBCASE("zero at the base coordinate") {
        CHECK(std::abs(cs.computed_hamiltonian(cs.surface_point(1.0, 0.3))) < 1e-12);
    }
    SUBCASE("equals the arclength of the projected ruling curve") {
        // independent oracle: polyline length of the curve u -> surface_point(u, 0)
        // projected onto the plane normal to (1,1,1)
        const Vec3 w = Vec3::Ones().normalized();
        const auto proj = [&](double u) {
            const Vec3 p = cs.surface_point(u, 0.0);
            return Vec3(p - p.dot(w) * w);
        };
        for (double u1 : {0.8, 1.7, 3.0}) {
            const int m = 200000;
            double len = 0;
            Vec3 prev = proj(1.0);
            for (int i = 1; i <= m; ++i) {
                const Vec3 q = proj(1.0 + (u1 - 1.0) * i / m);
                len += (q - prev).norm();
                prev = q;
            }
            const double h = cs.computed_hamiltonian(cs.surface_point(u1, 0.4));
            CHECK(std::abs(std::abs(h) - len) < 1e-7 * (1 + len));
            CHECK((h > 0) == (u1 > 1.0));
        }
    }
    SUBCASE("conserved along the flow off the surface") {
        const Trajectory tr = integrate_flow(cs.field, cs.default_seed, 0, 1);
        CHECK(conservation_drift(tr, cs.computed_hamiltonian) < 1e-6);
        CHECK(conservation_drift(tr, cs.conserved[0].expr, cs.params) < 1e-8);
    }
    SUBCASE("outside the region") {
        CHECK_THROWS_AS(cs.computed_hamiltonian({1, 2, 3}), DomainError);
    }
}
