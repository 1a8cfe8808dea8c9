#pragma once

#include <array>
#include <functional>

#include "gradflow/expr.hpp"
#include "gradflow/jet.hpp"
#include "gradflow/types.hpp"

namespace gradflow {

inline constexpr double kDefaultStagnationEps = 1e-12;

// Value and Jacobian (row i = gradient of component i) of a vector field.
struct VectorJet {
    Vec3 value = Vec3::Zero();
    Mat3 jacobian = Mat3::Zero();
};

using FieldJets = std::array<Jet2, 3>;

// Plain point map used for fields that exist only numerically.
using PointMap = std::function<Vec3(const Vec3&)>;

VectorJet vector_jet(const FieldJets& jets);

Vec3 curl(const Mat3& jacobian);
double divergence(const Mat3& jacobian);

Vec3 curl(const FieldDef& f, const Vec3& x);
double divergence(const FieldDef& f, const Vec3& x);
Vec3 gradient(const Expr& e, const Vec3& x, const ParamMap& params = {});

// (u . grad) w - (w . grad) u
Vec3 lie_bracket(const FieldDef& u, const FieldDef& w, const Vec3& x);
Vec3 lie_bracket(const VectorJet& u, const VectorJet& w);

// Second-order jets of t = v/|v|. Throws StagnationError if |v(x)| <= eps.
FieldJets unit_tangent_jets(const FieldDef& f, const Vec3& x, double eps = kDefaultStagnationEps);
VectorJet unit_tangent_jet(const FieldDef& f, const Vec3& x, double eps = kDefaultStagnationEps);

// Curl of a field given its component jets, together with the Jacobian of
// the curl (row i = gradient of curl component i) from the Hessians.
struct CurlJet {
    Vec3 value;
    Mat3 jacobian;
};
CurlJet curl_jet(const FieldJets& jets);

// Central-difference Jacobian of a point map (row i = gradient of component i).
Mat3 fd_jacobian(const PointMap& f, const Vec3& x, double h);

} // namespace gradflow
