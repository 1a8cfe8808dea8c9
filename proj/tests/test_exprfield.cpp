#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gradflow/cases.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/expr.hpp"

using namespace gradflow;

namespace {

Vec3 random_point(std::mt19937_64& rng, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return {d(rng), d(rng), d(rng)};
}

// Central-difference gradient of the plain evaluator.
Vec3 fd_grad(const Expr& e, const Vec3& x, double h, const ParamMap& p = {}) {
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        g[k] = (eval_value(e, xp, p) - eval_value(e, xm, p)) / (2 * h);
    }
    return g;
}

Mat3 fd_hess(const Expr& e, const Vec3& x, double h, const ParamMap& p = {}) {
    Mat3 hs;
    for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        hs.col(k) = (eval_jet2(e, xp, p).grad - eval_jet2(e, xm, p).grad) / (2 * h);
    }
    return hs;
}

} // namespace

TEST_CASE("parse_field: Euler-top-like field at (1,2,3)") {
    const FieldDef f = parse_field("y*z", "x*z", "x*y");
    const Vec3 v = f.value({1, 2, 3});
    CHECK(v[0] == 6.0);
    CHECK(v[1] == 3.0);
    CHECK(v[2] == 2.0);
}

TEST_CASE("precedence: * over +, ^ over *, ^ right-associative") {
    const FieldDef f = parse_field("x+y*z", "2*x^2", "2^3^2");
    const Vec3 v = f.value({1, 2, 3});
    CHECK(v[0] == 7.0);
    CHECK(v[1] == 2.0);
    CHECK(v[2] == 512.0);
    CHECK(eval_value(parse_expr("-x^2"), Vec3(3, 0, 0)) == -9.0);
    CHECK(eval_value(parse_expr("2^-1"), Vec3::Zero()) == 0.5);
    CHECK(eval_value(parse_expr("8/4/2"), Vec3::Zero()) == 1.0);
    CHECK(eval_value(parse_expr("5-3-1"), Vec3::Zero()) == 1.0);
}

TEST_CASE("syntax errors carry the offset") {
    try {
        parse_field("x +", "0", "0");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
    }
    CHECK_THROWS_AS(parse_expr("x * (y"), ParseError);
    CHECK_THROWS_AS(parse_expr("1.2.3"), ParseError);
    CHECK_THROWS_AS(parse_expr("x $ y"), ParseError);
    CHECK_THROWS_AS(parse_expr(""), ParseError);
}

TEST_CASE("unknown identifiers and arity mismatches are rejected") {
    try {
        parse_expr("x + q");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
    CHECK_THROWS_AS(parse_expr("sin(x, y)"), ParseError);
    CHECK_THROWS_AS(parse_expr("sin()"), ParseError);
}

TEST_CASE("parameters resolve against the supplied map") {
    const ParamMap p{{"a", 2.0}, {"k", 0.5}};
    const Expr e = parse_expr("a*x + k", p);
    CHECK(eval_value(e, Vec3(3, 0, 0), p) == doctest::Approx(6.5));
    CHECK(eval_value(e, Vec3(3, 0, 0), {{"a", 1.0}, {"k", 0.0}}) == doctest::Approx(3.0));
    CHECK(eval_value(parse_expr("pi"), Vec3::Zero()) == doctest::Approx(M_PI));
}

TEST_CASE("jet of x*y*z at (1,2,3)") {
    const Jet2 j = eval_jet2(parse_expr("x*y*z"), {1, 2, 3});
    CHECK(j.value == 6.0);
    CHECK(j.grad == Vec3(6, 3, 2));
    CHECK(j.hess(0, 1) == 3.0);
    CHECK(j.hess(0, 2) == 2.0);
    CHECK(j.hess(1, 2) == 1.0);
    for (int i = 0; i < 3; ++i) CHECK(j.hess(i, i) == 0.0);
}

TEST_CASE("jet of sin(x) at the origin") {
    const Jet2 j = eval_jet2(parse_expr("sin(x)"), Vec3::Zero());
    CHECK(j.value == 0.0);
    CHECK(j.grad == Vec3(1, 0, 0));
    CHECK(j.hess(0, 0) == 0.0);
}

TEST_CASE("gradient of xyz equals (yz, xz, xy) at random points") {
    std::mt19937_64 rng(7);
    const Expr f = parse_expr("x*y*z");
    for (int k = 0; k < 100; ++k) {
        const Vec3 x = random_point(rng, -2, 2);
        const Vec3 g = eval_jet2(f, x).grad;
        CHECK((g - Vec3(x[1] * x[2], x[0] * x[2], x[0] * x[1])).norm() < 1e-14);
    }
}

TEST_CASE("domain errors name the subexpression") {
    CHECK_THROWS_AS(eval_jet2(parse_expr("log(x)"), Vec3(-1, 0, 0)), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expr("1/x"), Vec3::Zero()), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expr("sqrt(x)"), Vec3(-1, 0, 0)), DomainError);
    CHECK_THROWS_AS(eval_value(parse_expr("arccos(x)"), Vec3(2, 0, 0)), DomainError);
    try {
        eval_value(parse_expr("y + log(x)"), Vec3(-1, 0, 0));
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("log") != std::string::npos);
    }
}

TEST_CASE("integer powers stay valid for non-positive bases") {
    const Jet2 j = eval_jet2(parse_expr("x^3"), Vec3(-2, 0, 0));
    CHECK(j.value == -8.0);
    CHECK(j.grad[0] == doctest::Approx(12.0));
    CHECK(j.hess(0, 0) == doctest::Approx(-12.0));
    CHECK(eval_value(parse_expr("x^0"), Vec3::Zero()) == 1.0);
    CHECK(eval_value(parse_expr("x^-2"), Vec3(-2, 0, 0)) == doctest::Approx(0.25));
}

TEST_CASE("hessians are exactly symmetric") {
    std::mt19937_64 rng(3);
    const Expr e = parse_expr("sin(x*y)*exp(z) + sqrt(1 + x^2*z^2) + arcsin(y/3)");
    for (int k = 0; k < 50; ++k) {
        const Jet2 j = eval_jet2(e, random_point(rng, -1, 1));
        CHECK(j.hess == j.hess.transpose());
    }
}

TEST_CASE("property: AD matches central differences on the built-in expressions") {
    std::mt19937_64 rng(11);
    for (const std::string& name : case_names()) {
        const CaseSystem cs = get_case(name);
        std::vector<Expr> exprs{cs.potential.expr};
        for (const auto& c : cs.field.components) exprs.push_back(c);
        for (const auto& h : cs.hamiltonians) exprs.push_back(h.expr);
        for (const auto& h : cs.conserved) exprs.push_back(h.expr);
        for (int k = 0; k < 100; ++k) {
            const Vec3 x = random_admissible_point(cs, rng, 0.3);
            for (const Expr& e : exprs) {
                const Jet2 j = eval_jet2(e, x, cs.params);
                const Vec3 g = fd_grad(e, x, 1e-5, cs.params);
                const Mat3 h = fd_hess(e, x, 1e-4, cs.params);
                const double scale = 1 + j.grad.cwiseAbs().maxCoeff();
                CHECK((j.grad - g).cwiseAbs().maxCoeff() < 1e-6 * scale);
                CHECK((j.hess - h).cwiseAbs().maxCoeff() < 1e-4 * (1 + j.hess.cwiseAbs().maxCoeff()));
            }
        }
    }
}

TEST_CASE("property: print then parse is structurally identical") {
    const std::vector<std::string> srcs{
        "x*y*z", "-(x^2)+y", "2^3^2", "(x+y)*(y-z)/(1+z^2)", "arccos(x/sqrt(x^2+y^2+z^2))",
        "-x^-2", "a*x", "x - (y - z)", "abs(sin(x))*tan(y)", "1.5e-3*exp(-x)"};
    const ParamMap p{{"a", 1.0}};
    for (const auto& s : srcs) {
        const Expr e = parse_expr(s, p);
        const Expr again = parse_expr(e.to_string(), p);
        CHECK_MESSAGE(e == again, s << " -> " << e.to_string());
        CHECK(again.to_string() == e.to_string());
    }
    for (const std::string& name : case_names()) {
        const CaseSystem cs = get_case(name);
        for (const auto& c : cs.field.components)
            CHECK(parse_expr(c.to_string(), cs.params) == c);
        CHECK(parse_expr(cs.potential.expr.to_string(), cs.params) == cs.potential.expr);
    }
}

TEST_CASE("symbolic derivative agrees with the jet gradient") {
    std::mt19937_64 rng(5);
    const Expr e = parse_expr("x^2*sin(y) + log(1 + z^2)*exp(x*y) + abs(z)");
    for (int k = 0; k < 20; ++k) {
        const Vec3 x = random_point(rng, 0.1, 1);
        const Jet2 j = eval_jet2(e, x);
        for (int i = 0; i < 3; ++i)
            CHECK(eval_value(differentiate(e, i), x) == doctest::Approx(j.grad[i]).epsilon(1e-13));
    }
}

TEST_CASE("gradient_field builds v = grad F") {
    const FieldDef f = gradient_field(parse_expr("x*y*z"));
    CHECK((f.value({1, 2, 3}) - Vec3(6, 3, 2)).norm() < 1e-15);
}
