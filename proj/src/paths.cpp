#include "mgdual/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "mgdual/kernels.hpp"
#include "mgdual/rng.hpp"

namespace mgdual::sim {

PathBundle make_brownian(int n_factors, double rho12, const TimeGrid& grid,
                         std::size_t n_paths, std::uint64_t seed, bool antithetic) {
    if (n_factors < 1) throw std::invalid_argument("make_brownian: need >= 1 factor");
    if (n_factors >= 2 && !(std::abs(rho12) < 1.0))
        throw std::invalid_argument("make_brownian: correlation must satisfy |rho| < 1");
    if (n_paths == 0) throw std::invalid_argument("make_brownian: need >= 1 path");

    PathBundle b;
    b.grid = grid;
    b.n_paths = n_paths;
    b.seed = seed;
    b.antithetic = antithetic;
    b.n_factors = n_factors;
    b.dw.resize(n_factors);
    for (auto& c : b.dw) c.init(grid.steps, n_paths);

    const double sqh = std::sqrt(grid.h());
    const double c21 = rho12, c22 = std::sqrt(1.0 - rho12 * rho12);
    std::vector<double> xi(n_factors);
    for (std::size_t pth = 0; pth < n_paths; ++pth) {
        const std::uint64_t draw_path = antithetic ? (pth / 2) : pth;
        const double sign = (antithetic && (pth & 1)) ? -1.0 : 1.0;
        const NormalStream ns{seed, draw_path};
        for (int s = 0; s < grid.steps; ++s) {
            for (int f = 0; f < n_factors; ++f)
                xi[f] = sign * ns(static_cast<std::uint64_t>(s) * n_factors + f);
            b.dw[0].row(s)[pth] = sqh * xi[0];
            if (n_factors >= 2) b.dw[1].row(s)[pth] = sqh * (c21 * xi[0] + c22 * xi[1]);
            for (int f = 2; f < n_factors; ++f) b.dw[f].row(s)[pth] = sqh * xi[f];
        }
    }
    return b;
}

void add_gbm(PathBundle& paths, const GbmSpec& spec) {
    const int d = static_cast<int>(spec.s0.size());
    if (d == 0 || spec.drift.size() != spec.s0.size() || spec.sigma.size() != spec.s0.size())
        throw std::invalid_argument("add_gbm: inconsistent spec");
    for (double s : spec.s0)
        if (!(s > 0.0)) throw std::invalid_argument("add_gbm: s0 must be > 0");

    const auto& k = kernels::active();
    const double h = paths.grid.h();
    const std::size_t n = paths.n_paths;
    paths.s_tilde.assign(d, {});

    Curve logs;
    for (int i = 0; i < d; ++i) {
        auto& lvl = paths.s_tilde[i];
        lvl.init(paths.grid.steps + 1, n);
        logs.init(1, n, std::log(spec.s0[i]));
        k.vexp(lvl.row(0), logs.row(0), n);
        double sig2 = 0.0;
        for (double sj : spec.sigma[i]) sig2 += sj * sj;
        const double drift_h = (spec.drift[i] - 0.5 * sig2) * h;
        for (int s = 0; s < paths.grid.steps; ++s) {
            // log S += (b - sigma^2/2) h + sigma . dW, exact in log space
            k.axpb(logs.row(0), paths.dw[0].row(s), drift_h, spec.sigma[i][0], n);
            for (std::size_t f = 1; f < spec.sigma[i].size(); ++f)
                if (spec.sigma[i][f] != 0.0)
                    k.fma_scalar(logs.row(0), paths.dw[f].row(s), spec.sigma[i][f], n);
            k.vexp(lvl.row(s + 1), logs.row(0), n);
        }
    }
}

void add_ou_exact(PathBundle& paths, double theta0, double mean_reversion, double mean,
                  double vol, double rho) {
    if (!(mean_reversion > 0.0)) throw std::invalid_argument("add_ou_exact: need lambda > 0");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("add_ou_exact: need |rho| < 1");
    if (paths.n_factors < 2)
        throw std::invalid_argument("add_ou_exact: needs two Brownian factors");

    const auto& k = kernels::active();
    const double h = paths.grid.h();
    const std::size_t n = paths.n_paths;
    const double decay = std::exp(-mean_reversion * h);
    const double total_sd = vol * std::sqrt((1.0 - decay * decay) / (2.0 * mean_reversion));
    // exact joint law with the factor-0 increment: Cov(innovation, dW0) =
    // vol * rho * (1-decay)/lambda
    const double a = vol * rho * (1.0 - decay) / (mean_reversion * std::sqrt(h));
    const double b2 = total_sd * total_sd - a * a;
    const double b = std::sqrt(std::max(b2, 0.0));

    paths.theta.init(paths.grid.steps + 1, n, theta0);
    Curve indep;  // orthogonal part of the OU innovation, rebuilt per step
    indep.init(1, n);
    for (int s = 0; s < paths.grid.steps; ++s) {
        double* th = paths.theta.row(s + 1);
        const double* prev = paths.theta.row(s);
        for (std::size_t i = 0; i < n; ++i) th[i] = prev[i];
        // orthogonalize factor 1 against factor 0 (they carry correlation rho12 = rho)
        const double* w0 = paths.dw[0].row(s);
        const double* w1 = paths.dw[1].row(s);
        const double c22 = std::sqrt(1.0 - rho * rho);
        for (std::size_t i = 0; i < n; ++i)
            indep.row(0)[i] = (w1[i] - rho * w0[i]) / (c22 * std::sqrt(h));
        // theta' = mean(1-decay) + decay theta + a dW0 + b xi_perp
        k.affine2(th, w0, mean * (1.0 - decay), decay, a, n);
        k.fma_scalar(th, indep.row(0), b, n);
    }
}

Curve stochastic_exponential(
    const PathBundle& paths, const GbmSpec& spec,
    const std::function<void(int step, std::span<double> gamma)>& gamma) {
    const auto& k = kernels::active();
    const int d = static_cast<int>(spec.s0.size());
    const int nf = paths.n_factors;
    const double h = paths.grid.h();
    const std::size_t n = paths.n_paths;
    if (paths.s_tilde.size() != spec.s0.size())
        throw std::invalid_argument("stochastic_exponential: simulate the assets first");

    Curve out;
    out.init(paths.grid.steps + 1, n);
    Curve M, QV, vf, expo;
    M.init(1, n);
    QV.init(1, n);
    vf.init(1, n);
    expo.init(1, n);
    for (std::size_t i = 0; i < n; ++i) out.row(0)[i] = 1.0;

    std::vector<double> g(d);
    for (int s = 0; s < paths.grid.steps; ++s) {
        gamma(s, g);
        // dM = sum_i g_i S_i (b_i h + sigma_i . dW)
        for (int i = 0; i < d; ++i) {
            const double* lvl = paths.s_tilde[i].row(s);
            if (g[i] == 0.0) continue;
            k.fma_scalar(M.row(0), lvl, g[i] * spec.drift[i] * h, n);
            for (int f = 0; f < nf && f < static_cast<int>(spec.sigma[i].size()); ++f)
                if (spec.sigma[i][f] != 0.0)
                    k.fma_arrays(M.row(0), lvl, paths.dw[f].row(s), g[i] * spec.sigma[i][f], n);
        }
        // d[M] = |sum_i g_i S_i sigma_i.|^2 h, factor by factor
        for (int f = 0; f < nf; ++f) {
            bool any = false;
            for (int i = 0; i < d; ++i)
                if (f < static_cast<int>(spec.sigma[i].size()) && spec.sigma[i][f] != 0.0 &&
                    g[i] != 0.0)
                    any = true;
            if (!any) continue;
            for (std::size_t i = 0; i < n; ++i) vf.row(0)[i] = 0.0;
            for (int i = 0; i < d; ++i)
                if (f < static_cast<int>(spec.sigma[i].size()) && spec.sigma[i][f] != 0.0 &&
                    g[i] != 0.0)
                    k.fma_scalar(vf.row(0), paths.s_tilde[i].row(s), g[i] * spec.sigma[i][f], n);
            k.sq_accum(QV.row(0), vf.row(0), h, n);
        }
        for (std::size_t i = 0; i < n; ++i) expo.row(0)[i] = M.row(0)[i];
        k.fma_scalar(expo.row(0), QV.row(0), -0.5, n);
        k.vexp(out.row(s + 1), expo.row(0), n);
        for (std::size_t i = 0; i < n; ++i)
            if (!(out.row(s + 1)[i] > 0.0) || !std::isfinite(out.row(s + 1)[i]))
                throw std::runtime_error(
                    "stochastic_exponential: overflow or non-positive value");
    }
    return out;
}

}  // namespace mgdual::sim
