#pragma once

#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace gradflow {

using State = Eigen::VectorXd;
using OdeRhs = std::function<State(double t, const State& y)>;
// Called at the initial point and after every accepted step with (t, y, dy/dt).
using OdeObserver = std::function<void(double t, const State& y, const State& dy)>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 0.0;  // 0 selects an initial step automatically
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-14;
    long max_steps = 2'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

// Embedded Dormand-Prince 5(4) with PI step control and FSAL. Integrates
// from t0 to t1 (either direction). Domain errors thrown by the right-hand
// side during trial stages are treated as step rejections; an
// IntegrationError reporting the last good state is raised when the step
// size underflows.
OdeStats integrate_dopri(const OdeRhs& rhs, double t0, const State& y0, double t1,
                         const OdeOptions& opts, const OdeObserver& observer);

// The Dormand-Prince fifth-order solution with N = ceil(|t1 - t0| / h) equal
// steps and no error control.
OdeStats integrate_dopri_fixed(const OdeRhs& rhs, double t0, const State& y0, double t1,
                               double h, const OdeObserver& observer);

// Classical fixed-step RK4 with N = ceil(|t1 - t0| / h) equal steps.
OdeStats integrate_rk4(const OdeRhs& rhs, double t0, const State& y0, double t1, double h,
                       const OdeObserver& observer);

// A single classical RK4 step of size h.
State rk4_step(const OdeRhs& rhs, double t, const State& y, double h);

// Cubic Hermite interpolation between (t0, y0, f0) and (t1, y1, f1).
State hermite(double t0, const State& y0, const State& f0, double t1, const State& y1,
              const State& f1, double t);

} // namespace gradflow
