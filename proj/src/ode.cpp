#include "gradflow/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gradflow/errors.hpp"

namespace gradflow {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

double error_norm(const State& err, const State& y0, const State& y1, const OdeOptions& o) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = err[i] / sc;
        sum += r * r;
    }
    return std::sqrt(sum / std::max<Eigen::Index>(1, err.size()));
}

std::string describe(double t, const State& y) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << ", y = (";
    for (Eigen::Index i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
    os << ")";
    return os.str();
}

// One Dormand-Prince step from (t, y) with slope k1; returns the fifth-order
// solution and fills the slope there (k7) and the embedded error estimate.
State dopri_step(const OdeRhs& rhs, double t, const State& y, const State& k1, double hs,
                 State& k7, State& err) {
    const State k2 = rhs(t + c2 * hs, y + hs * (a21 * k1));
    const State k3 = rhs(t + c3 * hs, y + hs * (a31 * k1 + a32 * k2));
    const State k4 = rhs(t + c4 * hs, y + hs * (a41 * k1 + a42 * k2 + a43 * k3));
    const State k5 = rhs(t + c5 * hs, y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const State k6 = rhs(t + hs, y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    State y_new = y + hs * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + hs, y_new);
    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return y_new;
}

} // namespace

OdeStats integrate_dopri(const OdeRhs& rhs, double t0, const State& y0, double t1,
                         const OdeOptions& opts, const OdeObserver& observer) {
    OdeStats st;
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double t = t0;
    State y = y0;
    State k1 = rhs(t, y);
    ++st.rhs_evals;
    if (observer) observer(t, y, k1);
    if (span == 0.0) return st;

    double h = opts.h_init;
    if (h <= 0.0) {
        // Hairer-Norsett-Wanner starting step heuristic.
        State sc = (opts.atol + opts.rtol * y.array().abs()).matrix();
        const double d0 = (y.array() / sc.array()).matrix().norm() / std::sqrt(double(y.size()));
        const double d1 = (k1.array() / sc.array()).matrix().norm() / std::sqrt(double(y.size()));
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        double h1;
        try {
            const State k2 = rhs(t + dir * h0, y + dir * h0 * k1);
            ++st.rhs_evals;
            const double d2 =
                ((k2 - k1).array() / sc.array()).matrix().norm() / std::sqrt(double(y.size())) / h0;
            h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                           : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        } catch (const DomainError&) {
            h1 = h0 * 1e-3;
        }
        h = std::min(100 * h0, h1);
    }
    h = std::min({h, span, opts.h_max});

    double err_prev = 1e-4;
    constexpr double beta = 0.04, alpha = 0.2 - 0.75 * beta, safety = 0.9;
    bool last_rejected = false;

    while (dir * (t1 - t) > 0.0) {
        if (st.accepted + st.rejected > opts.max_steps)
            throw IntegrationError("maximum number of steps exceeded; last good state " +
                                   describe(t, y));
        bool final_step = false;
        if (h >= dir * (t1 - t)) {
            h = dir * (t1 - t);
            final_step = true;
        }
        // a short closing step is fine; only a shrinking controller is an underflow
        if (!final_step && h < opts.h_min * std::max(1.0, std::abs(t)))
            throw IntegrationError("step size underflow; last good state " + describe(t, y));
        const double hs = dir * h;
        State k7, err, y_new;
        bool domain_failure = false;
        try {
            y_new = dopri_step(rhs, t, y, k1, hs, k7, err);
            st.rhs_evals += 6;
        } catch (const DomainError&) {
            domain_failure = true;
        }
        if (domain_failure || !y_new.allFinite() || !k7.allFinite()) {
            ++st.rejected;
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        const double en = error_norm(err, y, y_new, opts);
        if (en <= 1.0) {
            t = final_step ? t1 : t + hs;
            y = y_new;
            k1 = k7;
            ++st.accepted;
            if (observer) observer(t, y, k1);
            double fac = std::pow(std::max(en, 1e-10), alpha) / std::pow(err_prev, beta);
            fac = std::clamp(fac / safety, 1.0 / 10.0, 5.0);
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            err_prev = std::max(en, 1e-4);
            h = std::min(h_new, opts.h_max);
            last_rejected = false;
        } else {
            ++st.rejected;
            const double fac = std::min(10.0, std::pow(en, alpha) / safety);
            h /= std::max(fac, 1.0 / 0.2 / 5.0);
            last_rejected = true;
        }
    }
    return st;
}

OdeStats integrate_dopri_fixed(const OdeRhs& rhs, double t0, const State& y0, double t1,
                               double h, const OdeObserver& observer) {
    if (!(h > 0.0)) throw ConfigError("fixed step must be positive");
    OdeStats st;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(t1 - t0) / h - 1e-9)));
    const double hs = (t1 - t0) / double(n);
    State y = y0;
    State k1 = rhs(t0, y);
    ++st.rhs_evals;
    if (observer) observer(t0, y, k1);
    for (long i = 0; i < n; ++i) {
        const double t = t0 + hs * double(i);
        State k7, err;
        y = dopri_step(rhs, t, y, k1, hs, k7, err);
        if (!y.allFinite())
            throw IntegrationError("non-finite state; last step from " + describe(t, y));
        k1 = k7;
        ++st.accepted;
        st.rhs_evals += 6;
        const double tn = (i + 1 == n) ? t1 : t0 + hs * double(i + 1);
        if (observer) observer(tn, y, k1);
    }
    return st;
}

State rk4_step(const OdeRhs& rhs, double t, const State& y, double h) {
    const State k1 = rhs(t, y);
    const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
    const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
    const State k4 = rhs(t + h, y + h * k3);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OdeStats integrate_rk4(const OdeRhs& rhs, double t0, const State& y0, double t1, double h,
                       const OdeObserver& observer) {
    if (!(h > 0.0)) throw ConfigError("fixed step must be positive");
    OdeStats st;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(t1 - t0) / h - 1e-9)));
    const double hs = (t1 - t0) / double(n);
    State y = y0;
    if (observer) observer(t0, y, rhs(t0, y));
    for (long i = 0; i < n; ++i) {
        const double t = t0 + hs * double(i);
        y = rk4_step(rhs, t, y, hs);
        if (!y.allFinite())
            throw IntegrationError("non-finite state; last step from " + describe(t, y));
        ++st.accepted;
        st.rhs_evals += 4;
        const double tn = (i + 1 == n) ? t1 : t0 + hs * double(i + 1);
        if (observer) observer(tn, y, rhs(tn, y));
    }
    return st;
}

State hermite(double t0, const State& y0, const State& f0, double t1, const State& y1,
              const State& f1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

} // namespace gradflow
