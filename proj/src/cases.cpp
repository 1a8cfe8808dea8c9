#include "gradflow/cases.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gradflow/errors.hpp"
#include "gradflow/surfgeo.hpp"

namespace gradflow {

namespace {

NamedExpr named(std::string name, std::string src, const ParamMap& params) {
    Expr e = parse_expr(src, params);
    return {std::move(name), std::move(e), std::move(src)};
}

void reject_params(std::string_view name, const ParamMap& params) {
    if (!params.empty())
        throw ConfigError("case '" + std::string(name) + "' takes no parameters, got '" +
                          params.begin()->first + "'");
}

CaseSystem sphere(const ParamMap& params) {
    reject_params("sphere", params);
    CaseSystem cs;
    cs.name = "sphere";
    cs.field = parse_field("x", "y", "z");
    cs.potential = named("F", "(x^2 + y^2 + z^2)/2", {});
    cs.conserved = {named("y/x", "y/x", {}), named("z/x", "z/x", {})};
    // Distances on the unit sphere to (0,0,1) and (1,0,0), valid for x > 0, z > 0.
    cs.hamiltonians = {
        named("H1", "arccos(1/sqrt((x/z)^2 + (y/x)^2*(x/z)^2 + 1))", {}),
        named("H2", "arccos(1/sqrt(1 + (y/x)^2 + (z/x)^2))", {}),
    };
    cs.admissible = [](const Vec3& x) { return x[0] > 0 && x[2] > 0; };
    cs.exclusion = "x <= 0 or z <= 0 (y/x and z/x need x != 0; the arccos Hamiltonians need x > 0, z > 0)";
    cs.margin = [](const Vec3& x) {
        const double r = x.norm();
        return std::min({x[0] / std::max(r, 1e-300), x[2] / std::max(r, 1e-300), r - 0.5, 2.0 - r});
    };
    cs.sample_lo = Vec3(0, -2, 0);
    cs.sample_hi = Vec3(2, 2, 2);
    cs.default_seed = Vec3(1, 2, 3);
    cs.frame_seed = cs.default_seed;
    cs.surface_level = 0.5;
    cs.surface_point = [](double phi, double theta) {
        return Vec3(std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi));
    };
    return cs;
}

CaseSystem euler_like(const ParamMap& params) {
    reject_params("euler-like", params);
    CaseSystem cs;
    cs.name = "euler-like";
    cs.field = parse_field("y*z", "x*z", "x*y");
    cs.potential = named("F", "x*y*z", {});
    cs.hamiltonians = {named("H1", "(x^2 + y^2 - 2*z^2)/2", {}), named("H2", "(z^2 - x^2)/2", {})};
    cs.conserved = cs.hamiltonians;
    cs.admissible = [](const Vec3& x) {
        const Vec3 v(x[1] * x[2], x[0] * x[2], x[0] * x[1]);
        return v.norm() > kDefaultStagnationEps;
    };
    cs.exclusion = "stagnation lines where two coordinates vanish";
    cs.margin = [](const Vec3& x) { return Vec3(x[1] * x[2], x[0] * x[2], x[0] * x[1]).norm(); };
    cs.default_seed = Vec3(0.5, 0.4, 0.3);
    cs.frame_seed = cs.default_seed;
    cs.surface_level = 0.0;
    cs.surface_point = [](double a, double b) { return Vec3(a, b, 0.0); };
    return cs;
}

CaseSystem aristotle(const ParamMap& given) {
    ParamMap params{{"a", 1.0 / 3}, {"b", 1.0 / 3}, {"c", 1.0 / 3}};
    for (const auto& [k, v] : given) {
        if (!params.contains(k)) throw ConfigError("aristotle: unknown parameter '" + k + "'");
        params[k] = v;
    }
    const double a = params["a"], b = params["b"], c = params["c"];
    if (!(a > 0 && b > 0 && c > 0))
        throw ConfigError("aristotle: parameters a, b, c must be positive");
    if (std::abs(a + b + c - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "aristotle: parameters must satisfy a + b + c = 1, got " << a + b + c;
        throw ConfigError(os.str());
    }
    CaseSystem cs;
    cs.name = "aristotle";
    cs.params = params;
    cs.field = parse_field("c/(x - y) + b/(x - z)", "a/(y - z) + c/(y - x)", "b/(z - x) + a/(z - y)",
                           params);
    cs.potential = named("F", "a*log(y - z) + b*log(x - z) + c*log(x - y)", params);
    cs.conserved = {named("w", "(x + y + z)/sqrt(3)", params)};
    cs.hamiltonians = cs.conserved;
    cs.admissible = [](const Vec3& x) { return x[0] > x[1] && x[1] > x[2]; };
    cs.exclusion = "outside the ordered region x > y > z (poles at x = y, y = z, x = z)";
    cs.margin = [](const Vec3& x) { return std::min(x[0] - x[1], x[1] - x[2]); };
    cs.default_seed = Vec3(3, 2, 1);
    // (3, 2, 1) lies on x + z = 2y where curl t vanishes and the frame case
    // switches, so frame constructions start slightly off that plane.
    cs.frame_seed = Vec3(3, 1.7, 1);
    cs.surface_level = 1.0;
    cs.surface_point = [b, c](double u, double z) {
        const double f = aristotle_f(u, b, c);
        return Vec3(f * (u + 0.5) + z, f + z, z);
    };
    cs.computed_hamiltonian_name = "H2";
    return cs;
}

} // namespace

std::vector<std::string> case_names() { return {"sphere", "euler-like", "aristotle"}; }

double aristotle_f(double u, double b, double c) {
    if (!(u > 0.5)) throw DomainError("aristotle surface coordinate needs u > 1/2");
    return std::numbers::e / (std::pow(u + 0.5, b) * std::pow(u - 0.5, c));
}

double aristotle_h2(const CaseSystem& cs, const Vec3& x, double u0) {
    if (!cs.admissible(x)) throw DomainError("point outside the aristotle region x > y > z");
    const double b = cs.params.at("b"), c = cs.params.at("c");
    const Vec3 p = flow_to_level(cs.field, cs.potential.expr, 1.0, x);
    const double u = (p[0] - p[2]) / (p[1] - p[2]) - 0.5;
    const auto integrand = [b, c](double t) {
        const double f = aristotle_f(t, b, c);
        const double fp = -f * (b / (t + 0.5) + c / (t - 0.5));
        const double g = t * fp + f;
        return std::sqrt(2.0 / 3.0 * g * g + 0.5 * fp * fp);
    };
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, u0, u, 15,
                                                                          1e-14, &err);
}

Vec3 random_admissible_point(const CaseSystem& cs, std::mt19937_64& rng, double min_margin) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int tries = 0; tries < 100000; ++tries) {
        Vec3 x;
        for (int i = 0; i < 3; ++i) x[i] = cs.sample_lo[i] + unit(rng) * (cs.sample_hi[i] - cs.sample_lo[i]);
        if (cs.admissible(x) && cs.margin(x) >= min_margin) return x;
    }
    throw Error("could not sample an admissible point for case " + cs.name);
}

SelfTestReport self_test(const CaseSystem& cs, int points, std::uint64_t seed) {
    SelfTestReport rep;
    std::mt19937_64 rng(seed);
    const FieldDef grad = gradient_field(cs.potential.expr, cs.params);
    for (int k = 0; k < points; ++k) {
        const Vec3 x = random_admissible_point(cs, rng);
        const Vec3 v = cs.field.value(x);
        rep.max_gradient_mismatch =
            std::max(rep.max_gradient_mismatch, (grad.value(x) - v).norm() / (1 + v.norm()));
        const auto rate = [&](const NamedExpr& h) {
            const Vec3 g = eval_jet2(h.expr, x, cs.params).grad;
            return std::abs(g.dot(v)) / (1 + g.norm() * v.norm());
        };
        for (const NamedExpr& h : cs.conserved) rep.max_conserved_rate = std::max(rep.max_conserved_rate, rate(h));
        for (const NamedExpr& h : cs.hamiltonians) rep.max_conserved_rate = std::max(rep.max_conserved_rate, rate(h));
        ++rep.points;
    }
    rep.ok = rep.max_gradient_mismatch < 1e-10 && rep.max_conserved_rate < 1e-10;
    return rep;
}

CaseSystem get_case(std::string_view name, const ParamMap& params) {
    CaseSystem cs;
    if (name == "sphere") {
        cs = sphere(params);
    } else if (name == "euler-like") {
        cs = euler_like(params);
    } else if (name == "aristotle") {
        cs = aristotle(params);
        const CaseSystem copy = cs;
        cs.computed_hamiltonian = [copy](const Vec3& x) { return aristotle_h2(copy, x); };
    } else {
        throw ConfigError("unknown case '" + std::string(name) +
                          "' (expected sphere, euler-like or aristotle)");
    }
    const SelfTestReport rep = self_test(cs, 100);
    if (!rep.ok) {
        std::ostringstream os;
        os << "self-test of case " << cs.name << " failed: gradient mismatch "
           << rep.max_gradient_mismatch << ", conserved rate " << rep.max_conserved_rate;
        throw Error(os.str());
    }
    return cs;
}

} // namespace gradflow
