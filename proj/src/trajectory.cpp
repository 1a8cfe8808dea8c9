#include "gradflow/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "gradflow/errors.hpp"

namespace gradflow {

namespace {

TrajectorySample make_sample(double t, const State& y, const State& dy,
                             const std::vector<Monitor>& monitors, const ParamMap& params) {
    TrajectorySample smp;
    smp.t = t;
    smp.x = y.head<3>();
    smp.dx = dy.head<3>();
    smp.s = y[3];
    smp.monitors.reserve(monitors.size());
    for (const Monitor& m : monitors) smp.monitors.push_back(eval_value(m.expr, smp.x, params));
    return smp;
}

} // namespace

Vec3 Trajectory::position_at(double t) const {
    if (samples.empty()) throw Error("empty trajectory");
    const bool forward = samples.back().t >= samples.front().t;
    const auto before = [forward](const TrajectorySample& a, double tt) {
        return forward ? a.t < tt : a.t > tt;
    };
    auto it = std::lower_bound(samples.begin(), samples.end(), t, before);
    if (it == samples.begin()) return samples.front().x;
    if (it == samples.end()) return samples.back().x;
    const TrajectorySample& b = *it;
    const TrajectorySample& a = *(it - 1);
    const State xa = a.x, xb = b.x, fa = a.dx, fb = b.dx;
    return hermite(a.t, xa, fa, b.t, xb, fb, t);
}

Trajectory integrate_flow(const FieldDef& f, const Vec3& x0, double t0, double t1,
                          const FlowOptions& opts) {
    const double v0 = f.value(x0).norm();
    if (!(v0 > opts.eps_v)) {
        std::ostringstream os;
        os << "stagnation point: |v| = " << v0 << " at (" << x0[0] << ", " << x0[1] << ", "
           << x0[2] << ")";
        throw StagnationError(os.str());
    }
    Trajectory traj;
    for (const Monitor& m : opts.monitors) traj.monitor_names.push_back(m.name);

    const double dir = t1 >= t0 ? 1.0 : -1.0;
    const OdeRhs rhs = [&f, dir](double, const State& y) {
        const Vec3 v = f.value(y.head<3>());
        if (!v.allFinite()) throw DomainError("non-finite field value");
        State d(4);
        d.head<3>() = v;
        d[3] = dir * v.norm();
        return d;
    };
    const OdeObserver obs = [&](double t, const State& y, const State& dy) {
        traj.samples.push_back(make_sample(t, y, dy, opts.monitors, f.params));
    };
    State y0(4);
    y0.head<3>() = x0;
    y0[3] = 0.0;
    if (opts.fixed_step > 0.0) {
        traj.stats = opts.fixed_scheme == FixedScheme::Rk4
                         ? integrate_rk4(rhs, t0, y0, t1, opts.fixed_step, obs)
                         : integrate_dopri_fixed(rhs, t0, y0, t1, opts.fixed_step, obs);
    } else {
        OdeOptions o;
        o.rtol = opts.rtol;
        o.atol = opts.atol;
        o.h_max = opts.h_max;
        traj.stats = integrate_dopri(rhs, t0, y0, t1, o, obs);
    }
    return traj;
}

double conservation_drift(const Trajectory& traj, const Expr& h, const ParamMap& params) {
    if (traj.samples.empty()) return 0.0;
    const double h0 = eval_value(h, traj.samples.front().x, params);
    double drift = 0.0;
    for (const TrajectorySample& smp : traj.samples)
        drift = std::max(drift, std::abs(eval_value(h, smp.x, params) - h0));
    return drift;
}

double conservation_drift(const Trajectory& traj, const std::function<double(const Vec3&)>& h) {
    if (traj.samples.empty()) return 0.0;
    const double h0 = h(traj.samples.front().x);
    double drift = 0.0;
    for (const TrajectorySample& smp : traj.samples) drift = std::max(drift, std::abs(h(smp.x) - h0));
    return drift;
}

double potential_monotonicity(const Trajectory& traj, const Expr& potential,
                              const ParamMap& params) {
    double lo = std::numeric_limits<double>::infinity();
    for (const TrajectorySample& smp : traj.samples) {
        const Vec3 g = eval_jet2(potential, smp.x, params).grad;
        lo = std::min(lo, g.dot(smp.dx));
    }
    return lo;
}

bool potential_nondecreasing(const Trajectory& traj, const Expr& potential,
                             const ParamMap& params) {
    double prev = -std::numeric_limits<double>::infinity();
    for (const TrajectorySample& smp : traj.samples) {
        const double val = eval_value(potential, smp.x, params);
        if (val < prev) return false;
        prev = val;
    }
    return true;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,x,y,z,s";
    for (const std::string& name : traj.monitor_names) os << ',' << name;
    os << '\n';
    for (const TrajectorySample& smp : traj.samples) {
        os << format_number(smp.t) << ',' << format_number(smp.x[0]) << ','
           << format_number(smp.x[1]) << ',' << format_number(smp.x[2]) << ','
           << format_number(smp.s);
        for (double m : smp.monitors) os << ',' << format_number(m);
        os << '\n';
    }
}

} // namespace gradflow
