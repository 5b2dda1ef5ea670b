#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mgdual::sim {

struct TimeGrid {
    double T = 1.0;
    int steps = 100;
    double h() const { return T / steps; }
    double t(int i) const { return T * i / steps; }
};

// Row-major [step][path] storage so the kernels stream across paths.
struct Curve {
    int rows = 0;
    std::size_t n_paths = 0;
    std::vector<double> data;
    void init(int r, std::size_t n, double fill = 0.0) {
        rows = r;
        n_paths = n;
        data.assign(static_cast<std::size_t>(r) * n, fill);
    }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * n_paths; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * n_paths; }
    bool empty() const { return rows == 0; }
};

// Simulated path block: Brownian increments per factor plus whatever process
// curves a model installs. Draws are indexed (seed, path, draw), so a given
// path is bitwise identical regardless of block size or traversal order.
// With antithetic on, odd paths negate the draws of the preceding even path.
struct PathBundle {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    bool antithetic = false;
    int n_factors = 0;
    double rho12 = 0.0;

    std::vector<Curve> dw;       // per factor, rows = steps (increments, sqrt(h) scale)
    std::vector<Curve> s_tilde;  // per asset, rows = steps+1 (levels)
    Curve theta;                 // rows = steps+1 when a model installs it
    Curve stoch_exp;             // rows = steps+1 when built
    Curve terminal_aux;          // rows = 1, model-specific terminal functional
};

// Brownian increments for n_factors factors; factor 1 (index 1) is correlated
// with factor 0 at rho12 via the 2x2 Cholesky. Throws if |rho12| >= 1.
PathBundle make_brownian(int n_factors, double rho12, const TimeGrid& grid,
                         std::size_t n_paths, std::uint64_t seed, bool antithetic = false);

struct GbmSpec {
    std::vector<double> s0;                  // d initial levels, > 0
    std::vector<double> drift;               // d
    std::vector<std::vector<double>> sigma;  // d x n_factors loadings
};

// Exact log-space GBM on the bundle's increments.
void add_gbm(PathBundle& paths, const GbmSpec& spec);

// Exact Gaussian OU transition for d theta = -mean_reversion (theta - mean) dt
// + vol dB, where B loads on factor 0 with weight rho and on factor 1 with
// sqrt(1-rho^2). Requires a bundle built with independent factors (rho12 = 0);
// the per-step innovation reproduces the exact joint law with both factor
// increments (a third orthogonal component carries the within-step variance).
void add_ou_exact(PathBundle& paths, double theta0, double mean_reversion, double mean,
                  double vol, double rho);

// Doleans-Dade exponential of M = integral of gamma' dS for a deterministic
// (possibly time-varying) gamma: exp(M - [M]/2) with the quadratic variation
// accumulated from the discretized integrand (left-point rule). Strictly
// positive by construction; overflow reported.
Curve stochastic_exponential(const PathBundle& paths, const GbmSpec& spec,
                             const std::function<void(int step, std::span<double> gamma)>& gamma);

}  // namespace mgdual::sim
