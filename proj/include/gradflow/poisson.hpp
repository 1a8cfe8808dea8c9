#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "gradflow/expr.hpp"
#include "gradflow/frame.hpp"

namespace gradflow {

// d mu/ds = H_n + mu (H_nb + H_bn) + mu^2 H_b
double riccati_rhs(double mu, const Helicities& h);

// The same equation for the projective angle psi, mu = tan psi.
double riccati_angle_rhs(double psi, const Helicities& h);

// d ln(rho)/ds where (A, B) = rho (cos psi, sin psi), B = A mu, and A obeys
// d ln A/ds = d ln|v|/ds - mu H_b - H_nb.
double log_rho_rhs(double psi, double dlog_speed, const Helicities& h);

struct PoissonOptions {
    FrameOptions frame;
    double rtol = 1e-10;
    double atol = 1e-12;
    // Half-width of the streamline tube used for transverse derivatives of J.
    double tube_h = 1e-4;
    // Arclength offset of the extra states kept at every sample for
    // derivatives in s.
    double fd_delta = 1e-4;
    double collision_tol = 1e-10;
    bool tube = true;
};

struct PoissonSample {
    double s = 0;
    double t = 0;  // flow time
    Vec3 x = Vec3::Zero();
    Frame frame;
    Helicities h;
    double speed = 0;       // |v|
    double dlog_speed = 0;  // d ln|v| / ds
    double div_t = 0;       // from the exact Jacobian of t
    std::array<double, 2> psi{};
    std::array<double, 2> log_rho{};
    std::array<Vec3, 2> J{Vec3::Zero(), Vec3::Zero()};
    // Jacobians of J_1, J_2 (row i = gradient of component i) from the tube.
    std::array<Mat3, 2> grad_j{Mat3::Zero(), Mat3::Zero()};
    bool has_tube = false;
    double phi = 0;  // conformal factor, J_1 = phi grad H_1
    Mat3 jt = Mat3::Zero();  // exact Jacobian of t

    // Center-streamline data at s - delta and s + delta.
    double delta = 0;
    std::array<double, 2> psi_minus{}, psi_plus{}, log_rho_minus{}, log_rho_plus{};
    double speed_minus = 0, speed_plus = 0;

    double mu(int i) const;
    double log_a(int i) const;  // ln|A_i|
};

struct PoissonPair {
    Frame reference;
    std::vector<PoissonSample> samples;
};

// Two Riccati/conformal-factor tracks started with angles psi0 (and
// ln rho = 0) at x0, sampled every `step` in arclength up to s_max. With
// opts.tube the four neighbouring streamlines x0 +- h n, x0 +- h b carry the
// same initial data and are integrated in the same ODE system.
PoissonPair integrate_poisson_pair(const FieldDef& f, const Vec3& x0,
                                   std::array<double, 2> psi0, double s_max, double step,
                                   const PoissonOptions& opts = {});

// J . curl J by AD.
double jacobi_residual(const FieldDef& j, const Vec3& x);

// jacobi_residual(J1 + c J2, x) for every c.
std::vector<double> pencil_compatibility(const FieldDef& j1, const FieldDef& j2,
                                         const std::vector<double>& c_list, const Vec3& x);

// J_i . curl J_i / |J_i|^2 from the tube Jacobian at a sample.
double tube_jacobi_residual(const PoissonSample& smp, int i);

// Same for J_1 + c J_2, normalized by |J_1 + c J_2|^2.
std::vector<double> tube_pencil_residuals(const PoissonSample& smp,
                                          const std::vector<double>& c_list);

// Gradients of the two Hamiltonians recovered from the pair, normalized so
// that J_1 x grad H_2 = J_2 x grad H_1 = v.
std::pair<Vec3, Vec3> conserved_covariants(const PoissonPair& pair, std::size_t sample_index);

struct BihamiltonianResidual {
    Vec3 residual = Vec3::Zero();  // v - lambda (grad H1 x grad H2)
    double lambda = 0;
};

BihamiltonianResidual bihamiltonian_residual(const FieldDef& f, const Expr& h1, const Expr& h2,
                                             const Vec3& x);

// Angle psi in (-pi/2, pi/2] with tan psi = (b . grad H)/(n . grad H).
double mu_from_hamiltonian(const Vec3& grad_h, const Frame& fr);

// Central differences in s at a sample.
struct LawResiduals {
    // |d(tan psi)/ds - riccati_rhs| where |cos psi| >= 0.1, otherwise the
    // angle-form residual |d psi/ds - riccati_angle_rhs|.
    std::array<double, 2> riccati{};
    // d/ds ln|mu2 - mu1| against (H_nb + H_bn) + (mu1 + mu2) H_b. NaN when
    // either |cos psi| < 0.1 (mu near infinity).
    double separation = 0;
    // d/ds ln|phi/|v|| against div t.
    double divergence = 0;
};

LawResiduals law_residuals(const PoissonSample& smp);

// Riccati residual for the angle field psi(x) = mu_from_hamiltonian(grad H(x))
// at x, by central differences of step delta along t.
double hamiltonian_riccati_residual(const FieldDef& f, const Expr& h, const Vec3& x,
                                    double delta = 1e-4, const FrameOptions& opts = {});

// Distance between two angles on the projective line, in [0, pi/2].
double projective_distance(double a, double b);

} // namespace gradflow
