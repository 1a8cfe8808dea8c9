#include "gradflow/surfgeo.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <sstream>

#include "gradflow/errors.hpp"
#include "gradflow/trajectory.hpp"

namespace gradflow {

namespace {

std::string point_text(const Vec3& x) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x[0] << ", " << x[1] << ", " << x[2] << ")";
    return os.str();
}

Mat3 cofactor(const Mat3& a) {
    Mat3 c;
    c(0, 0) = a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1);
    c(0, 1) = a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2);
    c(0, 2) = a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0);
    c(1, 0) = a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2);
    c(1, 1) = a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0);
    c(1, 2) = a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1);
    c(2, 0) = a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1);
    c(2, 1) = a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2);
    c(2, 2) = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return c;
}

// Unit vector orthogonal to the unit vector nrm.
Vec3 any_orthogonal(const Vec3& nrm) {
    const Vec3 axis = std::abs(nrm[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    return (axis - axis.dot(nrm) * nrm).normalized();
}

} // namespace

FundamentalForms fundamental_forms(const FieldDef& f, const Vec3& x, SecondFormSign sign,
                                   const FrameOptions& opts) {
    const Mat3 jv = f.jacobian(x);
    if (curl(jv).norm() > 1e-8 * (1.0 + jv.norm()))
        throw DomainError("fundamental forms need a gradient field; curl v = " +
                          point_text(curl(jv)) + " at " + point_text(x));
    const Frame fr = classify_and_build(f, x, opts.tol_case, opts.eps_v);
    const Helicities h = helicities(f, x, fr, opts);
    FundamentalForms ff;
    ff.L = h.bn;
    ff.M = 0.5 * (h.b - h.n);
    ff.N = -h.nb;
    if (sign == SecondFormSign::Standard) {
        ff.L = -ff.L;
        ff.M = -ff.M;
        ff.N = -ff.N;
    }
    return ff;
}

double implicit_gaussian_curvature(const Expr& potential, const Vec3& x, const ParamMap& params) {
    const Jet2 j = eval_jet2(potential, x, params);
    const double g2 = j.grad.squaredNorm();
    if (!(g2 > 0.0)) throw DomainError("gradient of the potential vanishes at " + point_text(x));
    return j.grad.dot(cofactor(j.hess) * j.grad) / (g2 * g2);
}

Curvatures curvatures(double xi, double eta, const Helicities& h, double dxi_db, double deta_dn) {
    Curvatures c;
    const double cross = xi * eta * (h.n - h.b);
    c.kappa_n = -xi * xi * h.bn + cross + eta * eta * h.nb;
    c.kappa_n_printed = xi * xi * h.bn + cross + eta * eta * h.nb;
    c.kappa_g = dxi_db - deta_dn - xi * h.tn - eta * h.tb;
    return c;
}

double kappa_g_mu_form(double mu, double dmu_dn, double dmu_db, const Helicities& h) {
    const double q = 1.0 + mu * mu;
    return (dmu_dn + mu * dmu_db + q * (h.tn + mu * h.tb)) / std::pow(q, 1.5);
}

Curvatures direction_field_curvatures(const FieldDef& f, const PointMap& direction, const Vec3& x,
                                      double h, const FrameOptions& opts) {
    const Frame fr = classify_and_build(f, x, opts.tol_case, opts.eps_v);
    const Helicities hel = helicities(f, x, fr, opts);
    const auto components = [&](const Vec3& p) {
        const Frame fp = frame_like(f, p, fr, opts);
        const Vec3 T = direction(p);
        return std::pair{fp.n.dot(T), fp.b.dot(T)};
    };
    const auto [xi, eta] = components(x);
    const double dxi_db =
        (components(x + h * fr.b).first - components(x - h * fr.b).first) / (2 * h);
    const double deta_dn =
        (components(x + h * fr.n).second - components(x - h * fr.n).second) / (2 * h);
    return curvatures(xi, eta, hel, dxi_db, deta_dn);
}

CurveCurvature curve_curvatures(const std::function<Vec3(double)>& curve, double sigma,
                                const Vec3& normal, double h) {
    const Vec3 p2 = curve(sigma + 2 * h), p1 = curve(sigma + h), p0 = curve(sigma);
    const Vec3 m1 = curve(sigma - h), m2 = curve(sigma - 2 * h);
    const Vec3 d1 = (-p2 + 8 * p1 - 8 * m1 + m2) / (12 * h);
    const Vec3 d2 = (-p2 + 16 * p1 - 30 * p0 + 16 * m1 - m2) / (12 * h * h);
    const Vec3 N = normal.normalized();
    const Vec3 T = d1.normalized();
    return {d2.dot(N), d2.dot(N.cross(T))};
}

// ---------------------------------------------------------------- geodesics

Vec3 project_to_level(const Expr& potential, double c, const Vec3& x, const GeodesicOptions& opts) {
    Vec3 y = x;
    for (int it = 0; it <= opts.max_newton; ++it) {
        const Jet2 j = eval_jet2(potential, y, opts.params);
        const double r = j.value - c;
        if (std::abs(r) < opts.tol_surface) return y;
        if (it == opts.max_newton) break;
        const double g2 = j.grad.squaredNorm();
        if (!(g2 > opts.eps_grad * opts.eps_grad))
            throw DomainError("left the regular region: grad F vanishes at " + point_text(y));
        y -= (r / g2) * j.grad;
    }
    throw ConvergenceError("projection onto the level set did not converge from " + point_text(x));
}

namespace {

struct GeoPoint {
    Vec3 x;
    Vec3 T;
};

Eigen::Matrix<double, 6, 1> geodesic_rhs(const Expr& potential, const Eigen::Matrix<double, 6, 1>& s,
                                         const GeodesicOptions& opts) {
    const Vec3 x = s.head<3>(), T = s.tail<3>();
    const Jet2 j = eval_jet2(potential, x, opts.params);
    const double g2 = j.grad.squaredNorm();
    if (!(g2 > opts.eps_grad * opts.eps_grad))
        throw DomainError("left the regular region: grad F vanishes at " + point_text(x));
    const double lambda = -T.dot(j.hess * T) / g2;
    Eigen::Matrix<double, 6, 1> d;
    d.head<3>() = T;
    d.tail<3>() = lambda * j.grad;
    return d;
}

GeoPoint geodesic_step(const Expr& potential, double c, const GeoPoint& p, double h,
                       const GeodesicOptions& opts) {
    Eigen::Matrix<double, 6, 1> s;
    s << p.x, p.T;
    const auto k1 = geodesic_rhs(potential, s, opts);
    const auto k2 = geodesic_rhs(potential, s + 0.5 * h * k1, opts);
    const auto k3 = geodesic_rhs(potential, s + 0.5 * h * k2, opts);
    const auto k4 = geodesic_rhs(potential, s + h * k3, opts);
    s += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
    GeoPoint out;
    out.x = project_to_level(potential, c, s.head<3>(), opts);
    const Vec3 nrm = eval_jet2(potential, out.x, opts.params).grad.normalized();
    Vec3 T = s.tail<3>();
    T -= T.dot(nrm) * nrm;
    out.T = T.normalized();
    return out;
}

GeoPoint start_point(const Expr& potential, double c, const Vec3& x0, const Vec3& T0,
                     const GeodesicOptions& opts) {
    const double r = eval_value(potential, x0, opts.params) - c;
    if (std::abs(r) > 1e-6)
        throw DomainError("start point is not on the level set: F - c = " + std::to_string(r));
    GeoPoint p;
    p.x = project_to_level(potential, c, x0, opts);
    const Vec3 nrm = eval_jet2(potential, p.x, opts.params).grad.normalized();
    const Vec3 T = T0 - T0.dot(nrm) * nrm;
    if (!(T.norm() > 1e-8 * T0.norm()))
        throw DomainError("initial direction is normal to the surface");
    p.T = T.normalized();
    return p;
}

// End point of the geodesic of the given length (no samples kept).
GeoPoint shoot(const Expr& potential, double c, const GeoPoint& start, double length,
               const GeodesicOptions& opts) {
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(length) / opts.step)));
    const double h = length / double(n);
    GeoPoint p = start;
    for (long i = 0; i < n; ++i) p = geodesic_step(potential, c, p, h, opts);
    return p;
}

} // namespace

std::vector<GeodesicState> geodesic_integrate(const Expr& potential, double c, const Vec3& x0,
                                              const Vec3& T0, double length,
                                              const GeodesicOptions& opts) {
    if (!(opts.step > 0.0)) throw ConfigError("geodesic step must be positive");
    GeoPoint p = start_point(potential, c, x0, T0, opts);
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(length) / opts.step)));
    const double h = length / double(n);

    std::vector<GeodesicState> out;
    out.reserve(n + 1);
    const auto record = [&](const GeoPoint& g, double sigma) {
        GeodesicState st;
        st.x = g.x;
        st.T = g.T;
        st.sigma = sigma;
        st.surface_residual = std::abs(eval_value(potential, g.x, opts.params) - c);
        out.push_back(st);
    };
    record(p, 0.0);
    for (long i = 0; i < n; ++i) {
        p = geodesic_step(potential, c, p, h, opts);
        record(p, h * double(i + 1));
    }

    if (opts.frame_components) {
        const FieldDef grad = gradient_field(potential, opts.params);
        for (GeodesicState& st : out) {
            const Frame fr = classify_and_build(grad, st.x);
            st.xi = fr.n.dot(st.T);
            st.eta = fr.b.dot(st.T);
        }
    }
    if (opts.measure_curvature && out.size() >= 5) {
        const std::size_t m = out.size();
        for (std::size_t i = 0; i < m; ++i) {
            Vec3 dT;
            const auto T = [&](std::size_t k) -> const Vec3& { return out[k].T; };
            if (i >= 2 && i + 2 < m) {
                dT = (-T(i + 2) + 8 * T(i + 1) - 8 * T(i - 1) + T(i - 2)) / (12 * h);
            } else if (i < 2) {
                dT = (-25 * T(i) + 48 * T(i + 1) - 36 * T(i + 2) + 16 * T(i + 3) - 3 * T(i + 4)) /
                     (12 * h);
            } else {
                dT = (25 * T(i) - 48 * T(i - 1) + 36 * T(i - 2) - 16 * T(i - 3) + 3 * T(i - 4)) /
                     (12 * h);
            }
            const Vec3 nrm = eval_jet2(potential, out[i].x, opts.params).grad.normalized();
            out[i].kappa_g = dT.dot(nrm.cross(out[i].T));
        }
    }
    return out;
}

DistanceResult geodesic_distance(const Expr& potential, double c, const Vec3& p, const Vec3& x,
                                 const DistanceOptions& opts) {
    const GeodesicOptions& go = opts.geodesic;
    const Vec3 ps = project_to_level(potential, c, p, go);
    const Vec3 xs = project_to_level(potential, c, x, go);
    DistanceResult best;
    const double chord = (xs - ps).norm();
    if (chord < 1e-13) {
        best.converged_starts = 1;
        return best;
    }
    const Vec3 nrm = eval_jet2(potential, ps, go.params).grad.normalized();
    Vec3 e1 = xs - ps - (xs - ps).dot(nrm) * nrm;
    e1 = e1.norm() > 1e-12 * chord ? e1.normalized() : any_orthogonal(nrm);
    const Vec3 e2 = nrm.cross(e1);
    const auto direction = [&](double a) { return Vec3(std::cos(a) * e1 + std::sin(a) * e2); };

    struct Attempt {
        bool ok = false;
        double length = 0;
        double angle = 0;
        double miss = 0;
    };
    const auto attempt = [&](double a) {
        Attempt res;
        double L = chord;
        for (int it = 0; it < opts.max_iterations; ++it) {
            const GeoPoint start{ps, direction(a)};
            const GeoPoint end = shoot(potential, c, start, L, go);
            const Vec3 r = end.x - xs;
            res.miss = r.norm();
            if (res.miss < opts.tol) {
                res.ok = L > 0;
                res.length = L;
                res.angle = a;
                return res;
            }
            const double da = opts.angle_step;
            const GeoPoint ep = shoot(potential, c, {ps, direction(a + da)}, L, go);
            const GeoPoint em = shoot(potential, c, {ps, direction(a - da)}, L, go);
            Eigen::Matrix<double, 3, 2> jac;
            jac.col(0) = (ep.x - em.x) / (2 * da);
            jac.col(1) = end.T;
            Eigen::Matrix2d nrm_eq = jac.transpose() * jac;
            nrm_eq.diagonal().array() += 1e-14 * nrm_eq.trace();
            Eigen::Vector2d step = -nrm_eq.ldlt().solve(jac.transpose() * r);
            if (!step.allFinite()) return res;
            // Keep the iteration in a trust region.
            const double scale =
                std::min({1.0, 0.5 / std::max(std::abs(step[0]), 1e-300),
                          0.5 * std::max(L, chord) / std::max(std::abs(step[1]), 1e-300)});
            step *= scale;
            a += step[0];
            L += step[1];
            if (L <= 0.0) L = 0.5 * chord;
            if (L > opts.max_length) return res;
        }
        return res;
    };

    const int m = std::max(1, opts.multistarts);
    std::vector<std::future<Attempt>> jobs;
    jobs.reserve(m);
    for (int k = 0; k < m; ++k) {
        const double a0 = 2.0 * std::numbers::pi * double(k) / double(m);
        jobs.push_back(std::async(std::launch::async, attempt, a0));
    }
    bool found = false;
    std::string failure;
    for (auto& j : jobs) {
        Attempt r;
        try {
            r = j.get();
        } catch (const Error& e) {
            failure = e.what();
            continue;
        }
        if (!r.ok) continue;
        ++best.converged_starts;
        if (!found || r.length < best.distance) {
            found = true;
            best.distance = r.length;
            best.initial_direction = direction(r.angle);
            best.miss = r.miss;
        }
    }
    if (!found)
        throw ConvergenceError("geodesic shooting from " + point_text(p) + " to " + point_text(x) +
                               " did not converge" + (failure.empty() ? "" : ": " + failure));
    return best;
}

Vec3 flow_to_level(const FieldDef& f, const Expr& potential, double c, const Vec3& x, double rtol,
                   double atol) {
    const double f0 = eval_value(potential, x, f.params);
    if (f0 == c) return x;
    const OdeRhs rhs = [&](double, const State& y) {
        const Vec3 p = y;
        const Vec3 v = f.value(p);
        const double rate = eval_jet2(potential, p, f.params).grad.dot(v);
        if (!(std::abs(rate) > 0.0)) throw DomainError("flow is tangent to the level sets");
        return State(v / rate);
    };
    OdeOptions o;
    o.rtol = rtol;
    o.atol = atol;
    State y = x;
    integrate_dopri(rhs, f0, State(x), c, o, [&](double, const State& st, const State&) { y = st; });
    GeodesicOptions go;
    go.params = f.params;
    return project_to_level(potential, c, y, go);
}

DistanceHamiltonianReport distance_hamiltonian_check(const FieldDef& f, const Expr& potential,
                                                     double c, const Vec3& p1, const Vec3& p2,
                                                     const std::vector<Vec3>& samples,
                                                     const DistanceCheckOptions& opts) {
    if ((p1 - p2).norm() < 1e-12) throw DomainError("distance base points coincide");
    const GeodesicOptions& go = opts.distance.geodesic;
    const auto dist = [&](const Vec3& base, const Vec3& y) {
        return geodesic_distance(potential, c, base, y, opts.distance).distance;
    };

    DistanceHamiltonianReport rep;
    for (const Vec3& raw : samples) {
        DistanceHamiltonianSample smp;
        smp.x = project_to_level(potential, c, raw, go);
        smp.d1 = dist(p1, smp.x);
        smp.d2 = dist(p2, smp.x);

        const Vec3 nrm = eval_jet2(potential, smp.x, go.params).grad.normalized();
        const Vec3 e1 = any_orthogonal(nrm);
        const Vec3 e2 = nrm.cross(e1);
        Eigen::Vector2d g1, g2;
        const double h = opts.fd_step;
        for (int k = 0; k < 2; ++k) {
            const Vec3 e = k == 0 ? e1 : e2;
            const Vec3 xp = project_to_level(potential, c, smp.x + h * e, go);
            const Vec3 xm = project_to_level(potential, c, smp.x - h * e, go);
            // Tangential separation of the projected pair.
            const double sep = (xp - xm).dot(e);
            g1[k] = (dist(p1, xp) - dist(p1, xm)) / sep;
            g2[k] = (dist(p2, xp) - dist(p2, xm)) / sep;
        }
        smp.grad_norm1 = g1.norm();
        smp.grad_norm2 = g2.norm();
        smp.cross_norm = std::abs(g1[0] * g2[1] - g1[1] * g2[0]);

        FlowOptions fo;
        const Trajectory traj = integrate_flow(f, smp.x, 0.0, opts.flow_time, fo);
        for (int k = 1; k <= opts.flow_samples; ++k) {
            const double t = opts.flow_time * double(k) / double(opts.flow_samples);
            const Vec3 back = flow_to_level(f, potential, c, traj.position_at(t));
            smp.drift1 = std::max(smp.drift1, std::abs(dist(p1, back) - smp.d1));
            smp.drift2 = std::max(smp.drift2, std::abs(dist(p2, back) - smp.d2));
        }

        rep.max_grad_norm_error = std::max(
            {rep.max_grad_norm_error, std::abs(smp.grad_norm1 - 1), std::abs(smp.grad_norm2 - 1)});
        rep.max_drift = std::max({rep.max_drift, smp.drift1, smp.drift2});
        rep.min_cross_norm = std::min(rep.min_cross_norm, smp.cross_norm);
        rep.samples.push_back(smp);
    }
    rep.unit_gradient_ok = rep.max_grad_norm_error < opts.grad_tol;
    rep.conserved_ok = rep.max_drift < opts.drift_tol;
    rep.independent_ok = rep.min_cross_norm > opts.independence_tol;
    return rep;
}

// ---------------------------------------------------------------- geodesic coordinates

MetricPatch make_metric_patch(std::string_view g_uu, std::string_view g_vv, GeodesicTarget target,
                              std::string_view g_other, const ParamMap& params) {
    MetricPatch m;
    m.g_uu = parse_expr(g_uu, params, uv_names());
    m.g_vv = parse_expr(g_vv, params, uv_names());
    m.g_other = parse_expr(g_other, params, uv_names());
    m.target = target;
    m.params = params;
    return m;
}

namespace {

struct Gammas {
    Jet2 qu, qv, pu, pv;  // gamma_u^q, gamma_v^q, gamma_u^p, gamma_v^p
    double g_uu, g_vv;
};

Gammas gammas(const MetricPatch& m, double u, double v) {
    const Vec3 at(u, v, 0.0);
    const Jet2 guu = eval_jet2(m.g_uu, at, m.params);
    const Jet2 gvv = eval_jet2(m.g_vv, at, m.params);
    const Jet2 other = eval_jet2(m.g_other, at, m.params);
    const Jet2 one(1.0);
    const Jet2& gqq = m.target == GeodesicTarget::First ? one : other;
    const Jet2& gpp = m.target == GeodesicTarget::First ? other : one;
    if (!(guu.value > 0 && gvv.value > 0 && gqq.value > 0 && gpp.value > 0)) {
        std::ostringstream os;
        os << "metric degeneracy at (u, v) = (" << u << ", " << v << ")";
        throw DomainError(os.str());
    }
    return {sqrt(guu / gqq), sqrt(gvv / gqq), sqrt(guu / gpp), sqrt(gvv / gpp), guu.value, gvv.value};
}

bool inside(const MetricPatch& m, double u, double v) {
    return u >= m.u_lo && u <= m.u_hi && v >= m.v_lo && v <= m.v_hi;
}

} // namespace

std::vector<CharacteristicState> characteristic_flow(const MetricPatch& m, Characteristic which,
                                                     const CharacteristicState& s0, double t_max,
                                                     const OdeOptions& ode) {
    if (!inside(m, s0.u, s0.v)) throw DomainError("initial state outside the coordinate patch");
    if (std::isfinite(m.u_lo) && std::isfinite(m.u_hi) && std::isfinite(m.v_lo) &&
        std::isfinite(m.v_hi) && m.u_hi - m.u_lo < 1e299) {
        constexpr int k = 9;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                gammas(m, m.u_lo + (m.u_hi - m.u_lo) * i / (k - 1),
                       m.v_lo + (m.v_hi - m.v_lo) * j / (k - 1));
    }

    const OdeRhs rhs = [&](double, const State& y) {
        const double u = y[0], v = y[1], th = y[2];
        const Gammas g = gammas(m, u, v);
        const double c = std::cos(th), s = std::sin(th);
        State d(5);
        if (which == Characteristic::First) {
            d[0] = -g.qv.value * c;
            d[1] = g.qu.value * s;
            d[2] = g.qu.grad[1] * c + g.qv.grad[0] * s;
            d[3] = std::sqrt(g.g_vv) * g.qu.value;
        } else {
            d[0] = g.pv.value * s;
            d[1] = g.pu.value * c;
            d[2] = g.pv.grad[0] * c - g.pu.grad[1] * s;
            d[3] = std::sqrt(g.g_uu) * g.pv.value;
        }
        d[4] = std::sqrt(g.g_uu * d[0] * d[0] + g.g_vv * d[1] * d[1]);
        return d;
    };

    std::vector<CharacteristicState> out;
    State y(5);
    y << s0.u, s0.v, s0.theta, s0.sigma, s0.rho;
    integrate_dopri(rhs, s0.t, y, s0.t + t_max, ode,
                    [&](double t, const State& st, const State&) {
                        if (!inside(m, st[0], st[1])) {
                            std::ostringstream os;
                            os << "characteristic left the coordinate patch at t = " << t;
                            throw DomainError(os.str());
                        }
                        out.push_back({t, st[0], st[1], st[2], st[3], st[4]});
                    });
    return out;
}

// ---------------------------------------------------------------- extension bracket

ExtensionBracket extension_bracket_check(const FieldDef& f, const PoissonSample& smp) {
    if (!smp.has_tube) throw Error("extension bracket needs tube data");
    const FieldJets vj = f.jets(smp.x);
    const VectorJet v = vector_jet(vj);
    const double n2 = v.value.squaredNorm();
    const double speed = std::sqrt(n2);
    const Vec3 t = v.value / speed;
    const Mat3& jt = smp.jt;

    // U = t/|v| = v/|v|^2
    VectorJet U;
    U.value = v.value / n2;
    const Vec3 grad_n2 = 2.0 * v.jacobian.transpose() * v.value;
    U.jacobian = v.jacobian / n2 - U.value * grad_n2.transpose() / n2;
    const Vec3 grad_w = -0.5 * grad_n2 / (n2 * speed);  // grad (1/|v|)

    VectorJet T;
    T.value = t;
    T.jacobian = jt;

    ExtensionBracket out;
    for (int i = 0; i < 2; ++i) {
        const Vec3& J = smp.J[i];
        const Mat3& G = smp.grad_j[i];
        VectorJet Wraw;
        Wraw.value = J.cross(t);
        for (int k = 0; k < 3; ++k)
            Wraw.jacobian.col(k) = Vec3(G.col(k)).cross(t) + J.cross(Vec3(jt.col(k)));
        VectorJet W;
        W.value = Wraw.value / speed;
        W.jacobian = Wraw.jacobian / speed + Wraw.value * grad_w.transpose();

        const double scaled = lie_bracket(U, W).norm() / (U.value.norm() * W.value.norm());
        const double raw = lie_bracket(T, Wraw).norm() / Wraw.value.norm();
        out.residual_scaled = std::max(out.residual_scaled, scaled);
        out.residual_raw = std::max(out.residual_raw, raw);
    }
    return out;
}

OrtgradCheck ortgrad_check(const FieldDef& f, const Expr& h, const Vec3& x, const FrameOptions& opts) {
    const Jet2 hj = eval_jet2(h, x, f.params);
    const VectorJet T = unit_tangent_jet(f, x, opts.eps_v);
    const Frame fr = classify_and_build(f, x, opts.tol_case, opts.eps_v);
    const Vec3& t = T.value;
    VectorJet W;
    W.value = hj.grad.cross(t);
    for (int k = 0; k < 3; ++k)
        W.jacobian.col(k) = Vec3(hj.hess.col(k)).cross(t) + hj.grad.cross(Vec3(T.jacobian.col(k)));
    const Vec3 bracket = lie_bracket(T, W);
    const double h_bt = fr.b.dot(curl(T.jacobian));
    const Vec3 div_term = -T.jacobian.trace() * W.value;
    const Vec3 predicted = -h_bt * fr.b.dot(hj.grad) * t + div_term;
    return {(bracket - predicted).norm(), bracket.norm(), div_term.norm()};
}

} // namespace gradflow
