#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gradflow/cases.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/poisson.hpp"

using namespace gradflow;

namespace {

Helicities hel(double n, double b, double nb_plus_bn) {
    Helicities h;
    h.n = n;
    h.b = b;
    h.nb = nb_plus_bn;
    return h;
}

double rel_cross(const Vec3& a, const Vec3& b) { return a.cross(b).norm() / (a.norm() * b.norm()); }

} // namespace

TEST_CASE("riccati_rhs examples") {
    CHECK(riccati_rhs(2.0, hel(1, 0, 0)) == 1.0);
    CHECK(riccati_rhs(1.0, hel(1, 1, 0)) == 2.0);
    Helicities h;
    h.n = 0.3;
    h.b = -1.2;
    h.nb = 0.7;
    h.bn = -0.1;
    CHECK(riccati_rhs(0.5, h) == doctest::Approx(0.3 + 0.5 * 0.6 - 0.25 * 1.2));
}

TEST_CASE("property: the angle form is the Riccati equation on the chart") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> d(-2, 2), a(-1.5, 1.5);
    for (int k = 0; k < 200; ++k) {
        Helicities h;
        h.n = d(rng);
        h.b = d(rng);
        h.nb = d(rng);
        h.bn = d(rng);
        const double psi = a(rng);
        const double c = std::cos(psi);
        CHECK(riccati_angle_rhs(psi, h) / (c * c) ==
              doctest::Approx(riccati_rhs(std::tan(psi), h)).epsilon(1e-12));
    }
    // regular at mu = infinity
    Helicities h;
    h.b = 0.8;
    CHECK(riccati_angle_rhs(M_PI / 2, h) == doctest::Approx(0.8));
}

TEST_CASE("jacobi_residual examples") {
    const FieldDef grad_g = gradient_field(parse_expr("x^2+y*z"));
    CHECK(std::abs(jacobi_residual(grad_g, {0.3, 1.2, -0.7})) < 1e-12);
    CHECK(jacobi_residual(parse_field("-y", "x", "0"), {0.5, 0.5, 2}) == 0.0);
    CHECK(jacobi_residual(parse_field("y", "z", "x"), {1, 1, 1}) == -3.0);
}

TEST_CASE("pencil_compatibility examples") {
    const FieldDef j1 = gradient_field(parse_expr("x")), j2 = gradient_field(parse_expr("y"));
    for (double r : pencil_compatibility(j1, j2, {-1, 0.5, 2, 10}, {1, 2, 3})) CHECK(r == 0.0);

    const CaseSystem cs = get_case("euler-like");
    const FieldDef g1 = gradient_field(cs.hamiltonians[0].expr);
    FieldDef g2 = gradient_field(cs.hamiltonians[1].expr);
    for (auto& c : g2.components) c = -c;
    std::mt19937_64 rng(32);
    for (int k = 0; k < 50; ++k) {
        const Vec3 x = random_admissible_point(cs, rng);
        for (double r : pencil_compatibility(g1, g2, {-1, 0.5, 2}, x)) CHECK(std::abs(r) < 1e-10);
    }
}

TEST_CASE("bihamiltonian_residual examples") {
    SUBCASE("linear system: grad H1 x grad H2 = v") {
        const CaseSystem cs = get_case("euler-like");
        std::mt19937_64 rng(33);
        std::uniform_real_distribution<double> d(-2, 2);
        for (int k = 0; k < 100; ++k) {
            const Vec3 x(d(rng), d(rng), d(rng));
            if (cs.field.value(x).norm() < 1e-3) continue;
            const auto r = bihamiltonian_residual(cs.field, cs.hamiltonians[0].expr,
                                                  cs.hamiltonians[1].expr, x);
            CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(r.residual.norm() < 1e-12);
        }
    }
    SUBCASE("sphere with y/x, z/x: lambda = x^3") {
        const CaseSystem cs = get_case("sphere");
        for (const Vec3& x : {Vec3(1, 2, 3), Vec3(0.5, -0.2, 0.1), Vec3(1.7, 0.3, -1.1)}) {
            const auto r = bihamiltonian_residual(cs.field, parse_expr("y/x"), parse_expr("z/x"), x);
            CHECK(r.lambda == doctest::Approx(std::pow(x[0], 3)).epsilon(1e-12));
            CHECK(r.residual.norm() < 1e-12);
        }
    }
    SUBCASE("H1 = H2 is degenerate") {
        const Expr h = parse_expr("y/x");
        CHECK_THROWS_AS(bihamiltonian_residual(parse_field("x", "y", "z"), h, h, {1, 2, 3}),
                        DegeneracyError);
    }
}

TEST_CASE("mu_from_hamiltonian examples") {
    Frame fr;  // t = x, n = y, b = z
    CHECK(mu_from_hamiltonian(fr.b, fr) == doctest::Approx(M_PI / 2));
    CHECK(mu_from_hamiltonian(-3 * fr.b, fr) == doctest::Approx(M_PI / 2));
    CHECK(mu_from_hamiltonian(fr.n + fr.t, fr) == 0.0);
    CHECK(mu_from_hamiltonian(fr.n + fr.b, fr) == doctest::Approx(M_PI / 4));
    CHECK_THROWS_AS(mu_from_hamiltonian(fr.t, fr), DegeneracyError);

    const CaseSystem cs = get_case("euler-like");
    const Vec3 x(1, 1, 1);
    const Frame f1 = classify_and_build(cs.field, x);
    const double p1 = mu_from_hamiltonian(eval_jet2(cs.hamiltonians[0].expr, x).grad, f1);
    const double p2 = mu_from_hamiltonian(eval_jet2(cs.hamiltonians[1].expr, x).grad, f1);
    CHECK(projective_distance(p1, p2) > 0.1);
}

TEST_CASE("projective_distance") {
    CHECK(projective_distance(0, M_PI) == doctest::Approx(0.0));
    CHECK(projective_distance(0.1, M_PI - 0.1) == doctest::Approx(0.2));
    CHECK(projective_distance(0, M_PI / 2) == doctest::Approx(M_PI / 2));
}

TEST_CASE("mu from known Hamiltonians satisfies the Riccati equation") {
    // sphere: H1 = polar angle; then the other built-in Hamiltonians
    const CaseSystem sphere = get_case("sphere");
    const Expr polar = parse_expr("arccos(z/sqrt(x^2+y^2+z^2))");
    for (const Vec3& x : {Vec3(1, 2, 3), Vec3(1.1, 2.2, 3.3), Vec3(0.4, -0.9, 0.5)})
        CHECK(hamiltonian_riccati_residual(sphere.field, polar, x) < 1e-5);
    for (const std::string& name : case_names()) {
        const CaseSystem cs = get_case(name);
        std::mt19937_64 rng(34);
        for (const auto& h : cs.hamiltonians)
            for (int k = 0; k < 10; ++k) {
                const Vec3 x = random_admissible_point(cs, rng, 0.3);
                double r = 0;
                try {
                    r = hamiltonian_riccati_residual(cs.field, h.expr, x);
                } catch (const CaseInstabilityError&) {
                    continue;
                }
                CHECK_MESSAGE(r < 1e-5, name << " " << h.name);
            }
    }
}

TEST_CASE("Poisson pair along streamlines of every built-in case") {
    for (const std::string& name : case_names()) {
        CAPTURE(name);
        const CaseSystem cs = get_case(name);
        const PoissonPair pair =
            integrate_poisson_pair(cs.field, cs.frame_seed, {0.0, M_PI / 4}, 0.2, 0.05);
        REQUIRE(pair.samples.size() == 5);
        for (std::size_t k = 0; k < pair.samples.size(); ++k) {
            const PoissonSample& s = pair.samples[k];
            CHECK(s.s == doctest::Approx(0.05 * k));
            const Vec3 v = cs.field.value(s.x);
            for (int i = 0; i < 2; ++i) {
                CHECK(std::abs(s.J[i].dot(v)) / (s.J[i].norm() * v.norm()) < 1e-10);
                CHECK(std::abs(tube_jacobi_residual(s, i)) < 1e-6);
            }
            for (double r : tube_pencil_residuals(s, {-1, 0.5, 2})) CHECK(std::abs(r) < 1e-6);
            const LawResiduals law = law_residuals(s);
            CHECK(law.riccati[0] < 1e-5);
            CHECK(law.riccati[1] < 1e-5);
            if (!std::isnan(law.separation)) CHECK(law.separation < 1e-5);
            CHECK(law.divergence < 1e-5);

            const auto [g1, g2] = conserved_covariants(pair, k);
            CHECK(std::abs(g1.dot(v)) < 1e-10 * g1.norm() * v.norm());
            CHECK(std::abs(g2.dot(v)) < 1e-10 * g2.norm() * v.norm());
            CHECK((s.J[0].cross(g2) - v).norm() < 1e-8 * v.norm());
            CHECK((s.J[1].cross(g1) - v).norm() < 1e-8 * v.norm());
            CHECK((s.J[0] - s.phi * g1).norm() < 1e-8 * s.J[0].norm());
            CHECK((s.J[1] + s.phi * g2).norm() < 1e-8 * s.J[1].norm());
        }
    }
}

TEST_CASE("linear system: pair seeded from H1, H2 stays parallel to their gradients") {
    const CaseSystem cs = get_case("euler-like");
    const Vec3 x0 = cs.frame_seed;
    const Frame fr = classify_and_build(cs.field, x0);
    const Expr h1 = cs.hamiltonians[0].expr, h2 = cs.hamiltonians[1].expr;
    const double p1 = mu_from_hamiltonian(eval_jet2(h1, x0).grad, fr);
    const double p2 = mu_from_hamiltonian(eval_jet2(h2, x0).grad, fr);
    PoissonOptions opts;
    opts.tube = false;
    const PoissonPair pair = integrate_poisson_pair(cs.field, x0, {p1, p2}, 0.3, 0.05, opts);
    for (std::size_t k = 0; k < pair.samples.size(); ++k) {
        const PoissonSample& s = pair.samples[k];
        const Vec3 x = s.x;
        CHECK(rel_cross(s.J[0], eval_jet2(h1, x).grad) < 1e-6);
        CHECK(rel_cross(s.J[1], eval_jet2(h2, x).grad) < 1e-6);
        const auto [g1, g2] = conserved_covariants(pair, k);
        CHECK(rel_cross(g1, Vec3(x[0], x[1], -2 * x[2])) < 1e-6);
        CHECK(rel_cross(g2, Vec3(-x[0], 0, x[2])) < 1e-6);
    }
}

TEST_CASE("Poisson pair errors") {
    const FieldDef f = parse_field("x", "y", "z");
    CHECK_THROWS_AS(integrate_poisson_pair(f, {1, 2, 3}, {0.3, 0.3 + M_PI}, 0.1, 0.05),
                    DegeneracyError);
    CHECK_THROWS_AS(integrate_poisson_pair(f, {0, 0, 0}, {0.0, 0.5}, 0.1, 0.05), StagnationError);
    CHECK_THROWS_AS(integrate_poisson_pair(f, {1, 2, 3}, {0.0, 0.5}, 0.1, 0.0), ConfigError);
}
