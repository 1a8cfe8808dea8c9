#include "gradflow/poisson.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gradflow/errors.hpp"
#include "gradflow/ode.hpp"

namespace gradflow {

double riccati_rhs(double mu, const Helicities& h) {
    return h.n + mu * (h.nb + h.bn) + mu * mu * h.b;
}

double riccati_angle_rhs(double psi, const Helicities& h) {
    const double c = std::cos(psi), s = std::sin(psi);
    return h.n * c * c + (h.nb + h.bn) * s * c + h.b * s * s;
}

double log_rho_rhs(double psi, double dlog_speed, const Helicities& h) {
    const double c = std::cos(psi), s = std::sin(psi);
    return dlog_speed - h.nb * c * c + h.bn * s * s + (h.n - h.b) * s * c;
}

double PoissonSample::mu(int i) const { return std::tan(psi[i]); }

double PoissonSample::log_a(int i) const { return log_rho[i] + std::log(std::abs(std::cos(psi[i]))); }

double projective_distance(double a, double b) {
    const double d = std::fmod(std::abs(a - b), std::numbers::pi);
    return std::min(d, std::numbers::pi - d);
}

namespace {

constexpr int kPerLine = 7;  // x(3), psi1, psi2, log rho1, log rho2

struct LocalData {
    Frame frame;
    FrameDerivatives fd;
    double speed;
    double dlog_speed;
};

LocalData local_data(const FieldDef& f, const Vec3& x, const Frame& ref, const FrameOptions& fo) {
    LocalData d;
    d.frame = frame_like(f, x, ref, fo);
    d.fd = frame_derivatives(f, x, d.frame, fo);
    const FieldJets v = f.jets(x);
    Vec3 val, grad_norm2 = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
        val[i] = v[i].value;
        grad_norm2 += 2.0 * v[i].value * v[i].grad;
    }
    d.speed = val.norm();
    d.dlog_speed = d.frame.t.dot(grad_norm2) / (2.0 * val.squaredNorm());
    return d;
}

Vec3 poisson_vector(const Frame& fr, double psi, double log_rho) {
    return std::exp(log_rho) * (std::cos(psi) * fr.n + std::sin(psi) * fr.b);
}

} // namespace

PoissonPair integrate_poisson_pair(const FieldDef& f, const Vec3& x0, std::array<double, 2> psi0,
                                   double s_max, double step, const PoissonOptions& opts) {
    if (!(step > 0.0)) throw ConfigError("sampling step must be positive");
    if (!(s_max >= 0.0)) throw ConfigError("arclength span must be non-negative");
    if (projective_distance(psi0[0], psi0[1]) < opts.collision_tol)
        throw DegeneracyError("initial Riccati solutions coincide on the projective line");

    PoissonPair pair;
    pair.reference = classify_and_build(f, x0, opts.frame.tol_case, opts.frame.eps_v);
    const Frame& ref = pair.reference;
    const FrameOptions& fo = opts.frame;

    const int lines = opts.tube ? 5 : 1;
    // The last component is the flow time of the center streamline, dt/ds = 1/|v|.
    State y(kPerLine * lines + 1);
    y[kPerLine * lines] = 0.0;
    const std::array<Vec3, 5> offsets{Vec3::Zero(), opts.tube_h * ref.n, -opts.tube_h * ref.n,
                                      opts.tube_h * ref.b, -opts.tube_h * ref.b};
    for (int k = 0; k < lines; ++k) {
        y.segment<3>(kPerLine * k) = x0 + offsets[k];
        y[kPerLine * k + 3] = psi0[0];
        y[kPerLine * k + 4] = psi0[1];
        y[kPerLine * k + 5] = 0.0;
        y[kPerLine * k + 6] = 0.0;
    }

    const OdeRhs rhs = [&](double, const State& st) {
        State d(st.size());
        for (int k = 0; k < lines; ++k) {
            const int o = kPerLine * k;
            const Vec3 x = st.segment<3>(o);
            const LocalData ld = local_data(f, x, ref, fo);
            const Helicities& h = ld.fd.h;
            d.segment<3>(o) = ld.frame.t;
            if (k == 0) d[kPerLine * lines] = 1.0 / ld.speed;
            for (int i = 0; i < 2; ++i) {
                d[o + 3 + i] = riccati_angle_rhs(st[o + 3 + i], h);
                d[o + 5 + i] = log_rho_rhs(st[o + 3 + i], ld.dlog_speed, h);
            }
        }
        return d;
    };

    const auto assemble = [&](double s, const State& st) {
        PoissonSample smp;
        smp.s = s;
        smp.t = st[kPerLine * lines];
        smp.x = st.head<3>();
        const LocalData ld = local_data(f, smp.x, ref, fo);
        smp.frame = ld.frame;
        smp.h = ld.fd.h;
        smp.speed = ld.speed;
        smp.dlog_speed = ld.dlog_speed;
        smp.jt = ld.fd.jt;
        smp.div_t = ld.fd.jt.trace();
        for (int i = 0; i < 2; ++i) {
            smp.psi[i] = st[3 + i];
            smp.log_rho[i] = st[5 + i];
            smp.J[i] = poisson_vector(smp.frame, smp.psi[i], smp.log_rho[i]);
        }
        if (projective_distance(smp.psi[0], smp.psi[1]) < opts.collision_tol) {
            std::ostringstream os;
            os << "Riccati solutions collide at s = " << s << ": loss of independence";
            throw DegeneracyError(os.str());
        }
        smp.phi = -std::exp(smp.log_rho[0] + smp.log_rho[1]) * std::sin(smp.psi[1] - smp.psi[0]) /
                  smp.speed;

        smp.delta = opts.fd_delta;
        const State yp = rk4_step(rhs, s, st, smp.delta);
        const State ym = rk4_step(rhs, s, st, -smp.delta);
        for (int i = 0; i < 2; ++i) {
            smp.psi_plus[i] = yp[3 + i];
            smp.psi_minus[i] = ym[3 + i];
            smp.log_rho_plus[i] = yp[5 + i];
            smp.log_rho_minus[i] = ym[5 + i];
        }
        smp.speed_plus = f.value(yp.head<3>()).norm();
        smp.speed_minus = f.value(ym.head<3>()).norm();

        if (opts.tube) {
            const auto j_at = [&](const State& z, int k, int i) {
                const Vec3 x = z.segment<3>(kPerLine * k);
                const Frame fr = frame_like(f, x, ref, fo);
                return poisson_vector(fr, z[kPerLine * k + 3 + i], z[kPerLine * k + 5 + i]);
            };
            Mat3 dx;
            dx.col(0) = st.segment<3>(kPerLine * 1) - st.segment<3>(kPerLine * 2);
            dx.col(1) = st.segment<3>(kPerLine * 3) - st.segment<3>(kPerLine * 4);
            dx.col(2) = yp.head<3>() - ym.head<3>();
            const Eigen::PartialPivLU<Mat3> lu(dx.transpose());
            for (int i = 0; i < 2; ++i) {
                Mat3 dj;
                dj.col(0) = j_at(st, 1, i) - j_at(st, 2, i);
                dj.col(1) = j_at(st, 3, i) - j_at(st, 4, i);
                dj.col(2) = j_at(yp, 0, i) - j_at(ym, 0, i);
                // G dx = dj  <=>  dx^T G^T = dj^T
                smp.grad_j[i] = lu.solve(dj.transpose()).transpose();
            }
            smp.has_tube = true;
        }
        return smp;
    };

    OdeOptions oo;
    oo.rtol = opts.rtol;
    oo.atol = opts.atol;
    oo.h_max = step;

    double s = 0.0;
    pair.samples.push_back(assemble(s, y));
    while (s < s_max - 1e-12 * std::max(1.0, s_max)) {
        const double s_next = std::min(s_max, s + step);
        State last = y;
        integrate_dopri(rhs, s, y, s_next, oo, [&](double, const State& st, const State&) { last = st; });
        y = last;
        s = s_next;
        pair.samples.push_back(assemble(s, y));
    }
    return pair;
}

double jacobi_residual(const FieldDef& j, const Vec3& x) {
    const Mat3 jac = j.jacobian(x);
    return j.value(x).dot(curl(jac));
}

std::vector<double> pencil_compatibility(const FieldDef& j1, const FieldDef& j2,
                                         const std::vector<double>& c_list, const Vec3& x) {
    const Vec3 v1 = j1.value(x), v2 = j2.value(x);
    const Mat3 g1 = j1.jacobian(x), g2 = j2.jacobian(x);
    std::vector<double> out;
    for (double c : c_list) out.push_back((v1 + c * v2).dot(curl(Mat3(g1 + c * g2))));
    return out;
}

double tube_jacobi_residual(const PoissonSample& smp, int i) {
    if (!smp.has_tube) throw Error("sample carries no tube data");
    return smp.J[i].dot(curl(smp.grad_j[i])) / smp.J[i].squaredNorm();
}

std::vector<double> tube_pencil_residuals(const PoissonSample& smp,
                                          const std::vector<double>& c_list) {
    if (!smp.has_tube) throw Error("sample carries no tube data");
    std::vector<double> out;
    for (double c : c_list) {
        const Vec3 j = smp.J[0] + c * smp.J[1];
        const Mat3 g = smp.grad_j[0] + c * smp.grad_j[1];
        out.push_back(j.dot(curl(g)) / j.squaredNorm());
    }
    return out;
}

std::pair<Vec3, Vec3> conserved_covariants(const PoissonPair& pair, std::size_t sample_index) {
    if (sample_index >= pair.samples.size()) throw Error("sample index out of range");
    const PoissonSample& smp = pair.samples[sample_index];
    // A1 A2 (mu2 - mu1) = rho1 rho2 sin(psi2 - psi1), regular where mu is not.
    const double sep = std::exp(smp.log_rho[0] + smp.log_rho[1]) * std::sin(smp.psi[1] - smp.psi[0]);
    if (projective_distance(smp.psi[0], smp.psi[1]) < 1e-10 || sep == 0.0)
        throw DegeneracyError("mu1 = mu2 at the requested sample");
    return {-smp.speed * smp.J[0] / sep, smp.speed * smp.J[1] / sep};
}

BihamiltonianResidual bihamiltonian_residual(const FieldDef& f, const Expr& h1, const Expr& h2,
                                             const Vec3& x) {
    const Vec3 g1 = eval_jet2(h1, x, f.params).grad;
    const Vec3 g2 = eval_jet2(h2, x, f.params).grad;
    const Vec3 c = g1.cross(g2);
    const double scale = g1.norm() * g2.norm();
    if (!(c.norm() > 1e-12 * scale) || scale == 0.0)
        throw DegeneracyError("Hamiltonian gradients are parallel");
    const Vec3 v = f.value(x);
    BihamiltonianResidual r;
    r.lambda = v.dot(c) / c.squaredNorm();
    r.residual = v - r.lambda * c;
    return r;
}

double mu_from_hamiltonian(const Vec3& grad_h, const Frame& fr) {
    const double pn = fr.n.dot(grad_h), pb = fr.b.dot(grad_h);
    if (!(std::hypot(pn, pb) > 1e-12 * grad_h.norm()) || grad_h.norm() == 0.0)
        throw DegeneracyError("Hamiltonian gradient has no component in the (n, b) plane");
    double psi = std::atan2(pb, pn);
    if (psi > std::numbers::pi / 2) psi -= std::numbers::pi;
    if (psi <= -std::numbers::pi / 2) psi += std::numbers::pi;
    return psi;
}

namespace {

// a - b reduced to (-pi/2, pi/2].
double angle_step(double a, double b) {
    double d = std::remainder(a - b, std::numbers::pi);
    if (d <= -std::numbers::pi / 2) d += std::numbers::pi;
    return d;
}

double riccati_fd_residual(double psi, double psi_m, double psi_p, double delta,
                           const Helicities& h) {
    const double c = std::cos(psi);
    if (std::abs(c) >= 0.1) {
        const double dmu = (std::tan(psi_p) - std::tan(psi_m)) / (2 * delta);
        return std::abs(dmu - riccati_rhs(std::tan(psi), h));
    }
    const double dpsi = angle_step(psi_p, psi_m) / (2 * delta);
    return std::abs(dpsi - riccati_angle_rhs(psi, h));
}

} // namespace

LawResiduals law_residuals(const PoissonSample& smp) {
    LawResiduals r;
    const double d = smp.delta;
    for (int i = 0; i < 2; ++i)
        r.riccati[i] = riccati_fd_residual(smp.psi[i], smp.psi_minus[i], smp.psi_plus[i], d, smp.h);

    const bool regular = std::abs(std::cos(smp.psi[0])) >= 0.1 && std::abs(std::cos(smp.psi[1])) >= 0.1;
    if (regular) {
        const auto lsep = [](double a, double b) { return std::log(std::abs(std::tan(b) - std::tan(a))); };
        const double lhs = (lsep(smp.psi_plus[0], smp.psi_plus[1]) -
                            lsep(smp.psi_minus[0], smp.psi_minus[1])) / (2 * d);
        const double rhs = (smp.h.nb + smp.h.bn) + (smp.mu(0) + smp.mu(1)) * smp.h.b;
        r.separation = std::abs(lhs - rhs);
    } else {
        r.separation = std::numeric_limits<double>::quiet_NaN();
    }

    const auto lphi = [](double l1, double l2, double p1, double p2, double speed) {
        return l1 + l2 + std::log(std::abs(std::sin(p2 - p1))) - 2 * std::log(speed);
    };
    const double dl = (lphi(smp.log_rho_plus[0], smp.log_rho_plus[1], smp.psi_plus[0],
                            smp.psi_plus[1], smp.speed_plus) -
                       lphi(smp.log_rho_minus[0], smp.log_rho_minus[1], smp.psi_minus[0],
                            smp.psi_minus[1], smp.speed_minus)) / (2 * d);
    r.divergence = std::abs(dl - smp.div_t);
    return r;
}

double hamiltonian_riccati_residual(const FieldDef& f, const Expr& h, const Vec3& x, double delta,
                                    const FrameOptions& opts) {
    const Frame fr = classify_and_build(f, x, opts.tol_case, opts.eps_v);
    const Helicities hel = helicities(f, x, fr, opts);
    const auto psi_at = [&](const Vec3& p) {
        const Frame fp = frame_like(f, p, fr, opts);
        return mu_from_hamiltonian(eval_jet2(h, p, f.params).grad, fp);
    };
    const double psi = psi_at(x);
    double psi_p = psi_at(x + delta * fr.t);
    double psi_m = psi_at(x - delta * fr.t);
    // Keep the three samples on one branch.
    psi_p = psi + angle_step(psi_p, psi);
    psi_m = psi + angle_step(psi_m, psi);
    return riccati_fd_residual(psi, psi_m, psi_p, delta, hel);
}

} // namespace gradflow
