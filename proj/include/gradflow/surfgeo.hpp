#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "gradflow/expr.hpp"
#include "gradflow/frame.hpp"
#include "gradflow/ode.hpp"
#include "gradflow/poisson.hpp"

namespace gradflow {

// ---------------------------------------------------------------- forms

enum class SecondFormSign {
    FlowNormal,  // II = dt . dX, normal t
    Standard,    // II = -dt . dX
};

// In (n, b) coordinates of the potential surface through x.
struct FundamentalForms {
    double E = 1, F = 0, G = 1;
    double L = 0, M = 0, N = 0;
    double gaussian() const { return (L * N - M * M) / (E * G - F * F); }
};

// Throws DomainError when v is not a gradient field (|curl v| > 1e-8 (1 + |Dv|)).
FundamentalForms fundamental_forms(const FieldDef& f, const Vec3& x,
                                   SecondFormSign sign = SecondFormSign::FlowNormal,
                                   const FrameOptions& opts = {});

// Gaussian curvature of the level set of F through x from the gradient and
// Hessian of F (independent of any frame).
double implicit_gaussian_curvature(const Expr& potential, const Vec3& x,
                                   const ParamMap& params = {});

// ---------------------------------------------------------------- curvatures

struct Curvatures {
    // Normal component of dT/dsigma along t:
    //   -xi^2 H_bn + xi eta (H_n - H_b) + eta^2 H_nb
    double kappa_n = 0;
    // The printed variant  xi^2 H_bn + xi eta (H_n - H_b) + eta^2 H_nb.
    double kappa_n_printed = 0;
    // d_b xi - d_n eta - xi H_tn - eta H_tb
    double kappa_g = 0;
};

// dxi_db = b . grad xi and deta_dn = n . grad eta of the caller's direction field.
Curvatures curvatures(double xi, double eta, const Helicities& h, double dxi_db = 0.0,
                      double deta_dn = 0.0);

// Geodesic-curvature expression in terms of mu = eta/xi. Equals -kappa_g.
double kappa_g_mu_form(double mu, double dmu_dn, double dmu_db, const Helicities& h);

// Curvatures of the integral curves of a unit tangent direction field on the
// potential surfaces of f, with d_b xi and d_n eta by central differences.
Curvatures direction_field_curvatures(const FieldDef& f, const PointMap& direction, const Vec3& x,
                                      double h = 1e-5, const FrameOptions& opts = {});

// Curvatures of an explicit arclength-parametrized curve at sigma, relative to
// the unit surface normal `normal` (4th-order central differences).
struct CurveCurvature {
    double kappa_n = 0;
    double kappa_g = 0;
};
CurveCurvature curve_curvatures(const std::function<Vec3(double)>& curve, double sigma,
                                const Vec3& normal, double h = 1e-3);

// ---------------------------------------------------------------- geodesics

struct GeodesicState {
    Vec3 x = Vec3::Zero();
    Vec3 T = Vec3::Zero();
    double sigma = 0;
    double xi = 0, eta = 0;  // T in the (n, b) basis of the frame of grad F
    double kappa_g = std::numeric_limits<double>::quiet_NaN();  // measured by differences of T
    double surface_residual = 0;  // |F(x) - c|
};

struct GeodesicOptions {
    double step = 1e-3;
    double tol_surface = 1e-10;
    int max_newton = 10;
    double eps_grad = kDefaultStagnationEps;
    bool frame_components = true;  // fill xi, eta
    bool measure_curvature = true;  // fill kappa_g
    ParamMap params{};
};

// Projects x onto F = c along grad F by Newton iteration.
Vec3 project_to_level(const Expr& potential, double c, const Vec3& x, const GeodesicOptions& opts);

std::vector<GeodesicState> geodesic_integrate(const Expr& potential, double c, const Vec3& x0,
                                              const Vec3& T0, double length,
                                              const GeodesicOptions& opts = {});

struct DistanceOptions {
    GeodesicOptions geodesic{.step = 5e-3};
    int multistarts = 16;
    int max_iterations = 40;
    double tol = 1e-10;       // on the miss distance
    double angle_step = 1e-6; // for the miss derivative in the shooting angle
    double max_length = 1e3;
};

struct DistanceResult {
    double distance = 0;
    Vec3 initial_direction = Vec3::Zero();
    double miss = 0;
    int converged_starts = 0;
};

// Length of the shortest connecting geodesic found by shooting from p.
DistanceResult geodesic_distance(const Expr& potential, double c, const Vec3& p, const Vec3& x,
                                 const DistanceOptions& opts = {});

// Moves x along the field lines of v to the level set F = c
// (dx/dtau = v / (grad F . v), tau running from F(x) to c).
Vec3 flow_to_level(const FieldDef& f, const Expr& potential, double c, const Vec3& x,
                   double rtol = 1e-12, double atol = 1e-14);

struct DistanceHamiltonianSample {
    Vec3 x = Vec3::Zero();
    double d1 = 0, d2 = 0;
    double grad_norm1 = 0, grad_norm2 = 0;
    double cross_norm = 0;
    double drift1 = 0, drift2 = 0;
};

struct DistanceHamiltonianReport {
    std::vector<DistanceHamiltonianSample> samples;
    double max_grad_norm_error = 0;
    double max_drift = 0;
    double min_cross_norm = std::numeric_limits<double>::infinity();
    bool unit_gradient_ok = false;
    bool conserved_ok = false;
    bool independent_ok = false;
};

struct DistanceCheckOptions {
    DistanceOptions distance;
    double fd_step = 1e-3;
    double flow_time = 1.0;
    int flow_samples = 4;
    double grad_tol = 1e-4;
    double drift_tol = 1e-6;
    double independence_tol = 1e-6;
};

// Distances to p1 and p2 as Hamiltonians of the flow of f (a gradient field
// of `potential`): unit surface gradients, conservation along the flow
// (distances extended off S_c by flow_to_level), and independence.
DistanceHamiltonianReport distance_hamiltonian_check(const FieldDef& f, const Expr& potential,
                                                     double c, const Vec3& p1, const Vec3& p2,
                                                     const std::vector<Vec3>& samples,
                                                     const DistanceCheckOptions& opts = {});

// ---------------------------------------------------------------- geodesic coordinates

enum class GeodesicTarget {
    First,   // G_qq = 1
    Second,  // G_pp = 1
};

// Orthogonal metric diag(g_uu, g_vv) in (u, v) and the target metric of the
// transformed coordinates, with the non-unit coefficient (G_pp for First,
// G_qq for Second) expressed as a function of (u, v). Expressions use the
// variable names u and v.
struct MetricPatch {
    Expr g_uu, g_vv;
    GeodesicTarget target = GeodesicTarget::First;
    Expr g_other;
    ParamMap params{};
    double u_lo = -1e300, u_hi = 1e300, v_lo = -1e300, v_hi = 1e300;
};

inline const VarNames& uv_names() {
    static const VarNames names{"u", "v", "w"};
    return names;
}

MetricPatch make_metric_patch(std::string_view g_uu, std::string_view g_vv, GeodesicTarget target,
                              std::string_view g_other, const ParamMap& params = {});

enum class Characteristic { First, Second };

struct CharacteristicState {
    double t = 0;
    double u = 0, v = 0, theta = 0;
    double sigma = 0;  // from the gamma formula
    double rho = 0;    // metric arclength of the (u, v) curve
};

std::vector<CharacteristicState> characteristic_flow(const MetricPatch& m, Characteristic which,
                                                     const CharacteristicState& s0, double t_max,
                                                     const OdeOptions& ode = {});

// ---------------------------------------------------------------- extension bracket

struct ExtensionBracket {
    // |[t/|v|, (J_i x t)/|v|]| / (|t/|v|| |(J_i x t)/|v||), max over i
    double residual_scaled = 0;
    // the same without the 1/|v| factors
    double residual_raw = 0;
};

ExtensionBracket extension_bracket_check(const FieldDef& f, const PoissonSample& smp);

// |[t, grad H x t] - (-H_bt d_b H t - (div t)(grad H x t))| for a conserved
// H, together with the norm of the bracket for scale.
struct OrtgradCheck {
    double residual = 0;
    double bracket_norm = 0;
    double divergence_term_norm = 0;
};
OrtgradCheck ortgrad_check(const FieldDef& f, const Expr& h, const Vec3& x,
                           const FrameOptions& opts = {});

} // namespace gradflow
