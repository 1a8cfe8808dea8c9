#include "gradflow/frame.hpp"

#include <sstream>

#include "gradflow/errors.hpp"

namespace gradflow {

std::string_view to_string(FrameCase c) {
    switch (c) {
    case FrameCase::Case1: return "Case1";
    case FrameCase::Case2a: return "Case2a";
    case FrameCase::Case2bi: return "Case2bi";
    case FrameCase::Case2bii: return "Case2bii";
    }
    return "?";
}

namespace {

struct Classification {
    FrameCase tag;
    Vec3 t;
    Vec3 curl_t;
    double ht;
    Vec3 grad_ht;
};

Classification classify(const FieldDef& f, const Vec3& x, double tol, double eps_v) {
    const FieldJets tj = unit_tangent_jets(f, x, eps_v);
    const VectorJet t = vector_jet(tj);
    const CurlJet c = curl_jet(tj);

    Classification out;
    out.t = t.value;
    out.curl_t = c.value;
    out.ht = t.value.dot(c.value);
    out.grad_ht = t.jacobian.transpose() * c.value + c.jacobian.transpose() * t.value;

    if (c.value.cross(t.value).norm() > tol * (1.0 + c.value.norm())) {
        out.tag = FrameCase::Case1;
    } else if (out.grad_ht.cross(t.value).norm() > tol * (1.0 + out.grad_ht.norm())) {
        out.tag = FrameCase::Case2a;
    } else if (std::abs(out.ht) > tol) {
        out.tag = FrameCase::Case2bi;
    } else {
        out.tag = FrameCase::Case2bii;
    }
    return out;
}

Frame complete(const Vec3& t, const Vec3& n_raw, FrameCase tag, std::optional<Vec3> aux) {
    Frame fr;
    fr.t = t;
    fr.n = n_raw.normalized();
    fr.b = t.cross(fr.n);
    fr.case_tag = tag;
    fr.aux = aux;
    return fr;
}

Vec3 axis_maximizing_cross(const Vec3& t) {
    Vec3 best = Vec3::UnitX();
    double best_norm = -1;
    for (int k = 0; k < 3; ++k) {
        const Vec3 e = Vec3::Unit(k);
        const double m = e.cross(t).norm();
        if (m > best_norm) {
            best_norm = m;
            best = e;
        }
    }
    return best;
}

Vec3 reference_axis(const Vec3& t, double tol) {
    for (int k = 2; k >= 0; --k)
        if (Vec3::Unit(k).cross(t).norm() >= tol) return Vec3::Unit(k);
    // Unreachable for a unit t: some coordinate axis makes an angle >= 54 deg with it.
    throw DegeneracyError("no reference axis transverse to t");
}

Frame build(const Classification& c, std::optional<Vec3> aux, double tol) {
    switch (c.tag) {
    case FrameCase::Case1:
        return complete(c.t, c.curl_t.cross(c.t), c.tag, std::nullopt);
    case FrameCase::Case2a:
        return complete(c.t, c.grad_ht.cross(c.t), c.tag, std::nullopt);
    case FrameCase::Case2bi: {
        const Vec3 a = aux ? *aux : axis_maximizing_cross(c.t);
        const Vec3 axt = a.cross(c.t);
        if (axt.norm() < tol) throw CaseInstabilityError("Case2bi axis parallel to t");
        return complete(c.t, axt, c.tag, a);
    }
    case FrameCase::Case2bii: {
        const Vec3 e = aux ? *aux : reference_axis(c.t, tol);
        const Vec3 ext = e.cross(c.t);
        if (ext.norm() < tol) throw CaseInstabilityError("Case2bii reference axis parallel to t");
        return complete(c.t, ext, c.tag, e);
    }
    }
    throw Error("unknown frame case");
}

struct Diff {
    Vec3 t, n, b;
};

// Derivative of the frame field along dir. Fourth-order central stencil:
// near Case1 points where curl t is almost parallel to t the normal turns
// fast and the plain two-point stencil loses the 1e-6 budget.
Diff along(const FieldDef& f, const Vec3& x, const Vec3& dir, const Frame& fr,
           const FrameOptions& opts) {
    const double h = opts.h_frame;
    const Frame p1 = frame_like(f, x + h * dir, fr, opts), m1 = frame_like(f, x - h * dir, fr, opts);
    const Frame p2 = frame_like(f, x + 2 * h * dir, fr, opts),
                m2 = frame_like(f, x - 2 * h * dir, fr, opts);
    const auto d = [h](const Vec3& a2, const Vec3& a1, const Vec3& b1, const Vec3& b2) -> Vec3 {
        return (8 * (a1 - b1) - (a2 - b2)) / (12 * h);
    };
    return {d(p2.t, p1.t, m1.t, m2.t), d(p2.n, p1.n, m1.n, m2.n), d(p2.b, p1.b, m1.b, m2.b)};
}

} // namespace

Frame classify_and_build(const FieldDef& f, const Vec3& x, double tol_case, double eps_v) {
    return build(classify(f, x, tol_case, eps_v), std::nullopt, tol_case);
}

Frame frame_like(const FieldDef& f, const Vec3& x, const Frame& reference, const FrameOptions& opts) {
    const Classification c = classify(f, x, opts.tol_case, opts.eps_v);
    if (c.tag != reference.case_tag) {
        std::ostringstream os;
        os << "case instability at (" << x[0] << ", " << x[1] << ", " << x[2] << "): "
           << to_string(c.tag) << " vs reference " << to_string(reference.case_tag);
        throw CaseInstabilityError(os.str());
    }
    return build(c, reference.aux, opts.tol_case);
}

FrameDerivatives frame_derivatives(const FieldDef& f, const Vec3& x, const Frame& fr,
                                   const FrameOptions& opts) {
    FrameDerivatives d;
    d.frame = fr;
    d.jt = unit_tangent_jet(f, x, opts.eps_v).jacobian;
    for (int k = 0; k < 3; ++k) {
        const Diff dk = along(f, x, Vec3::Unit(k), fr, opts);
        d.jn.col(k) = dk.n;
        d.jb.col(k) = dk.b;
    }
    const Vec3 ct = curl(d.jt), cn = curl(d.jn), cb = curl(d.jb);
    Helicities& hl = d.h;
    hl.t = fr.t.dot(ct);
    hl.nt = fr.n.dot(ct);
    hl.bt = fr.b.dot(ct);
    hl.n = fr.n.dot(cn);
    hl.tn = fr.t.dot(cn);
    hl.bn = fr.b.dot(cn);
    hl.b = fr.b.dot(cb);
    hl.tb = fr.t.dot(cb);
    hl.nb = fr.n.dot(cb);
    return d;
}

Helicities helicities(const FieldDef& f, const Vec3& x, const Frame& fr, const FrameOptions& opts) {
    return frame_derivatives(f, x, fr, opts).h;
}

Vec3 helicity_divergences(const Helicities& h) {
    return {h.bn - h.nb, h.tb - h.bt, h.nt - h.tn};
}

std::array<Vec3, 9> frame_derivative_formulas(const Frame& fr, const Helicities& h) {
    const Vec3 &t = fr.t, &n = fr.n, &b = fr.b;
    return {
        n * h.bt - b * h.nt,                                  // ds t
        b * h.tn - t * h.bn,                                  // dn n
        t * h.nb - n * h.tb,                                  // db b
        h.bn * n + 0.5 * (h.t - h.n + h.b) * b,               // dn t
        -0.5 * (h.t + h.n - h.b) * n - h.nb * b,              // db t
        -h.bt * t + 0.5 * (h.t - h.n - h.b) * b,              // dt n
        0.5 * (h.t + h.n - h.b) * t + h.tb * b,               // db n
        h.nt * t - 0.5 * (h.t - h.n - h.b) * n,               // dt b
        // n . dn b = -b . dn n = -H_tn; printed with the opposite sign in the source.
        -0.5 * (h.t - h.n + h.b) * t - h.tn * n,              // dn b
    };
}

std::array<double, 9> frame_derivative_residuals(const FieldDef& f, const Vec3& x,
                                                 const FrameOptions& opts) {
    const Frame fr = classify_and_build(f, x, opts.tol_case, opts.eps_v);
    const Helicities h = helicities(f, x, fr, opts);

    // Directional derivatives along the frame directions themselves.
    const Diff dt = along(f, x, fr.t, fr, opts), dn = along(f, x, fr.n, fr, opts),
               db = along(f, x, fr.b, fr, opts);
    const std::array<Vec3, 9> measured{dt.t, dn.n, db.b, dn.t, db.t, dt.n, db.n, dt.b, dn.b};
    const std::array<Vec3, 9> predicted = frame_derivative_formulas(fr, h);
    std::array<double, 9> r{};
    for (int i = 0; i < 9; ++i) r[i] = (measured[i] - predicted[i]).norm();
    return r;
}

CkField ck_field(const Expr& psi, const Vec3& a, double lambda, const CkOptions& opts,
                 const ParamMap& params) {
    if (lambda == 0.0) throw DomainError("Chandrasekhar-Kendall field requires lambda != 0");

    const auto g = gradient_exprs(psi);
    const Expr laplacian = differentiate(g[0], 0) + differentiate(g[1], 1) + differentiate(g[2], 2);

    CkField out;
    const int m = std::max(2, opts.samples_per_axis);
    const auto grid_point = [&](int i, int j, int k) {
        const Vec3 s(double(i) / (m - 1), double(j) / (m - 1), double(k) / (m - 1));
        return Vec3(opts.box_lo.array() + s.array() * (opts.box_hi - opts.box_lo).array());
    };
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const Vec3 p = grid_point(i, j, k);
                const double value = eval_value(psi, p, params);
                const double res = eval_value(laplacian, p, params) + lambda * lambda * value;
                out.max_helmholtz_residual = std::max(out.max_helmholtz_residual, std::abs(res));
                if (std::abs(res) > opts.helmholtz_tol * (1.0 + lambda * lambda * std::abs(value))) {
                    std::ostringstream os;
                    os << "psi does not satisfy the Helmholtz equation: residual " << res << " at ("
                       << p[0] << ", " << p[1] << ", " << p[2] << ")";
                    throw DomainError(os.str());
                }
            }

    const std::array<Expr, 3> ac{Expr::constant(a[0]), Expr::constant(a[1]), Expr::constant(a[2])};
    const Expr a_dot_grad = ac[0] * g[0] + ac[1] * g[1] + ac[2] * g[2];
    const std::array<Expr, 3> grad_cross_a{g[1] * ac[2] - g[2] * ac[1], g[2] * ac[0] - g[0] * ac[2],
                                           g[0] * ac[1] - g[1] * ac[0]};
    const Expr inv_lambda = Expr::constant(1.0 / lambda);
    for (int i = 0; i < 3; ++i) {
        const Expr curl_curl = differentiate(a_dot_grad, i) - ac[i] * laplacian;
        out.field.components[i] = inv_lambda * (grad_cross_a[i] + curl_curl);
    }
    out.field.params = params;

    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                const double dev = std::abs(out.field.value(grid_point(i, j, k)).norm() - 1.0);
                out.max_norm_deviation = std::max(out.max_norm_deviation, dev);
            }
    out.norm_warning = out.max_norm_deviation > opts.norm_tol;
    return out;
}

} // namespace gradflow
