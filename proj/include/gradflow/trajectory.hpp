#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "gradflow/diffcalc.hpp"
#include "gradflow/expr.hpp"
#include "gradflow/ode.hpp"

namespace gradflow {

struct TrajectorySample {
    double t = 0;
    Vec3 x = Vec3::Zero();
    Vec3 dx = Vec3::Zero();  // v(x), kept for dense output
    double s = 0;            // accumulated arclength
    std::vector<double> monitors;
};

struct Monitor {
    std::string name;
    Expr expr;
};

enum class FixedScheme { Rk4, DormandPrince };

struct FlowOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double fixed_step = 0.0;  // > 0 selects a fixed-step scheme with this step
    FixedScheme fixed_scheme = FixedScheme::Rk4;
    double h_max = std::numeric_limits<double>::infinity();
    double eps_v = kDefaultStagnationEps;
    std::vector<Monitor> monitors;
};

class Trajectory {
public:
    std::vector<std::string> monitor_names;
    std::vector<TrajectorySample> samples;
    OdeStats stats;

    // Cubic Hermite interpolation of x between accepted steps.
    Vec3 position_at(double t) const;
};

// dx/dt = v(x) with ds/dt = |v| co-integrated.
Trajectory integrate_flow(const FieldDef& f, const Vec3& x0, double t0, double t1,
                          const FlowOptions& opts = {});

// max over samples of |H(x(t)) - H(x0)|.
double conservation_drift(const Trajectory& traj, const Expr& h, const ParamMap& params = {});
double conservation_drift(const Trajectory& traj, const std::function<double(const Vec3&)>& h);

// Minimum over samples of dF/dt = grad F . v.
double potential_monotonicity(const Trajectory& traj, const Expr& potential,
                              const ParamMap& params = {});

// True when F(x(t)) never decreases from one sample to the next.
bool potential_nondecreasing(const Trajectory& traj, const Expr& potential,
                             const ParamMap& params = {});

// Decimal text with 17 significant digits; "nan"/"inf" for non-finite values.
std::string format_number(double v);

// CSV with header t,x,y,z,s,<monitors>; LF line endings.
void write_csv(std::ostream& os, const Trajectory& traj);

} // namespace gradflow
