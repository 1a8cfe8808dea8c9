#include "gradflow/diffcalc.hpp"

#include <sstream>

#include "gradflow/errors.hpp"

namespace gradflow {

VectorJet vector_jet(const FieldJets& jets) {
    VectorJet out;
    for (int i = 0; i < 3; ++i) {
        out.value[i] = jets[i].value;
        out.jacobian.row(i) = jets[i].grad.transpose();
    }
    return out;
}

Vec3 curl(const Mat3& j) {
    return {j(2, 1) - j(1, 2), j(0, 2) - j(2, 0), j(1, 0) - j(0, 1)};
}

double divergence(const Mat3& j) { return j.trace(); }

Vec3 curl(const FieldDef& f, const Vec3& x) { return curl(f.jacobian(x)); }

double divergence(const FieldDef& f, const Vec3& x) { return divergence(f.jacobian(x)); }

Vec3 gradient(const Expr& e, const Vec3& x, const ParamMap& params) {
    return eval_jet2(e, x, params).grad;
}

Vec3 lie_bracket(const VectorJet& u, const VectorJet& w) {
    return w.jacobian * u.value - u.jacobian * w.value;
}

Vec3 lie_bracket(const FieldDef& u, const FieldDef& w, const Vec3& x) {
    return lie_bracket(vector_jet(u.jets(x)), vector_jet(w.jets(x)));
}

FieldJets unit_tangent_jets(const FieldDef& f, const Vec3& x, double eps) {
    const FieldJets v = f.jets(x);
    const Jet2 norm2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    const double norm = std::sqrt(norm2.value);
    if (!(norm > eps)) {
        std::ostringstream os;
        os << "stagnation point: |v| = " << norm << " at (" << x[0] << ", " << x[1] << ", "
           << x[2] << ")";
        throw StagnationError(os.str());
    }
    const Jet2 inv = pow(norm2, -0.5);
    return {v[0] * inv, v[1] * inv, v[2] * inv};
}

VectorJet unit_tangent_jet(const FieldDef& f, const Vec3& x, double eps) {
    return vector_jet(unit_tangent_jets(f, x, eps));
}

CurlJet curl_jet(const FieldJets& jets) {
    // d/dx_k of d_j f_i is hess_i(j, k).
    const auto dd = [&](int i, int j, int k) { return jets[i].hess(j, k); };
    CurlJet c;
    const Mat3 jac = vector_jet(jets).jacobian;
    c.value = curl(jac);
    for (int k = 0; k < 3; ++k) {
        c.jacobian(0, k) = dd(2, 1, k) - dd(1, 2, k);
        c.jacobian(1, k) = dd(0, 2, k) - dd(2, 0, k);
        c.jacobian(2, k) = dd(1, 0, k) - dd(0, 1, k);
    }
    return c;
}

Mat3 fd_jacobian(const PointMap& f, const Vec3& x, double h) {
    Mat3 j;
    for (int k = 0; k < 3; ++k) {
        Vec3 xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        j.col(k) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return j;
}

} // namespace gradflow
