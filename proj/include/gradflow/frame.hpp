#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "gradflow/diffcalc.hpp"
#include "gradflow/expr.hpp"
#include "gradflow/types.hpp"

namespace gradflow {

// Which construction produced the normal vector n.
//   Case1    curl t not parallel to t:      n ~ (curl t) x t
//   Case2a   curl t = H_t t, grad H_t x t != 0: n ~ grad H_t x t
//   Case2bi  curl t = H_t t, H_t const != 0:  n ~ a x t, a a constant axis
//   Case2bii curl t = 0:                    Darboux frame of the level set,
//                                           n ~ e x t with a fixed reference axis e
enum class FrameCase { Case1, Case2a, Case2bi, Case2bii };

std::string_view to_string(FrameCase c);

struct Frame {
    Vec3 t = Vec3::UnitX();
    Vec3 n = Vec3::UnitY();
    Vec3 b = Vec3::UnitZ();
    FrameCase case_tag = FrameCase::Case1;
    // Constant axis a (Case2bi) or reference axis (Case2bii).
    std::optional<Vec3> aux;
};

struct FrameOptions {
    double tol_case = 1e-8;
    double h_frame = 1e-5;
    double eps_v = kDefaultStagnationEps;
};

// H_t = t . curl t, H_nt = n . curl t, and so on.
struct Helicities {
    double t = 0, n = 0, b = 0;
    double tn = 0, nt = 0, nb = 0, bn = 0, tb = 0, bt = 0;
};

Frame classify_and_build(const FieldDef& f, const Vec3& x, double tol_case = 1e-8,
                         double eps_v = kDefaultStagnationEps);

// Frame at x built with the same rule (case and axis) as `reference`.
// Throws CaseInstabilityError if x classifies into a different case.
Frame frame_like(const FieldDef& f, const Vec3& x, const Frame& reference,
                 const FrameOptions& opts = {});

// Helicity data at x together with the Jacobians used to compute it.
// jt is exact (jets); jn and jb are fourth-order central differences of the
// frame field with step h_frame.
struct FrameDerivatives {
    Frame frame;
    Helicities h;
    Mat3 jt, jn, jb;
};

FrameDerivatives frame_derivatives(const FieldDef& f, const Vec3& x, const Frame& fr,
                                   const FrameOptions& opts = {});

Helicities helicities(const FieldDef& f, const Vec3& x, const Frame& fr,
                      const FrameOptions& opts = {});

// Divergences predicted by the helicities: (div t, div n, div b).
Vec3 helicity_divergences(const Helicities& h);

// Frame directional derivatives predicted by the helicity formulas, in the
// order ds t, dn n, db b, dn t, db t, dt n, db n, dt b, dn b.
std::array<Vec3, 9> frame_derivative_formulas(const Frame& fr, const Helicities& h);

inline constexpr std::array<std::string_view, 9> kFrameDerivativeNames{
    "ds_t", "dn_n", "db_b", "dn_t", "db_t", "dt_n", "db_n", "dt_b", "dn_b"};

// |central-difference directional derivative - helicity formula| for each of
// the nine derivatives above.
std::array<double, 9> frame_derivative_residuals(const FieldDef& f, const Vec3& x,
                                                 const FrameOptions& opts = {});

// Chandrasekhar-Kendall field t = (1/lambda) curl(psi a + curl(psi a)),
// built symbolically from psi.
struct CkOptions {
    Vec3 box_lo = Vec3::Zero();
    Vec3 box_hi = Vec3::Constant(3.141592653589793);
    int samples_per_axis = 4;
    double helmholtz_tol = 1e-8;
    double norm_tol = 1e-9;
};

struct CkField {
    FieldDef field;
    double max_helmholtz_residual = 0;
    double max_norm_deviation = 0;
    bool norm_warning = false;
};

CkField ck_field(const Expr& psi, const Vec3& a, double lambda, const CkOptions& opts = {},
                 const ParamMap& params = {});

} // namespace gradflow
