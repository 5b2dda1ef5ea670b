#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mgdual {

struct OdeOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    double initial_step = 0.0;  // 0: pick from the first interval
};

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

struct OdeSample {
    double t;
    std::vector<double> y;
    std::vector<double> dy;  // RHS at (t, y), handy for Hermite interpolation
};

// Adaptive Dormand-Prince 5(4) pair from t0 through the given stop times
// (monotone in either direction, first stop may equal t0). Each stop is hit
// exactly. Throws std::runtime_error on step-size collapse, which is how
// finite-time blow-up (e.g. a Riccati escape) surfaces.
std::vector<OdeSample> integrate_rk45(const OdeRhs& rhs, std::vector<double> y0, double t0,
                                      std::span<const double> stops, const OdeOptions& opt = {});

}  // namespace mgdual
