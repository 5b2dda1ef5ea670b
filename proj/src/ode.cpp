#include "mgdual/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mgdual {

namespace {

// Dormand-Prince coefficients
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

}  // namespace

std::vector<OdeSample> integrate_rk45(const OdeRhs& rhs, std::vector<double> y0, double t0,
                                      std::span<const double> stops, const OdeOptions& opt) {
    const std::size_t n = y0.size();
    std::vector<OdeSample> out;
    if (stops.empty()) return out;

    const double dir = stops.back() >= t0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < stops.size(); ++i) {
        if (i > 0 && (stops[i] - stops[i - 1]) * dir < 0)
            throw std::invalid_argument("integrate_rk45: stops must be monotone");
    }

    std::vector<double> y = std::move(y0);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n);
    double t = t0;
    const double span = std::abs(stops.back() - t0);
    double h = opt.initial_step > 0 ? opt.initial_step : std::max(span / 100.0, 1e-8);
    const double h_min = std::max(span, 1.0) * 1e-14;

    rhs(t, y, k1);
    for (double target : stops) {
        while ((target - t) * dir > 1e-15 * std::max(1.0, std::abs(target))) {
            double step = std::min(h, std::abs(target - t));
            const double hs = dir * step;
            auto stage = [&](std::vector<double>& k, double frac, auto&&... terms) {
                (void)frac;
                for (std::size_t j = 0; j < n; ++j) yt[j] = y[j] + hs * (... + terms(j));
                rhs(t + frac * hs, yt, k);
            };
            stage(k2, c2, [&](std::size_t j) { return a21 * k1[j]; });
            stage(k3, c3, [&](std::size_t j) { return a31 * k1[j]; },
                  [&](std::size_t j) { return a32 * k2[j]; });
            stage(k4, c4, [&](std::size_t j) { return a41 * k1[j]; },
                  [&](std::size_t j) { return a42 * k2[j]; },
                  [&](std::size_t j) { return a43 * k3[j]; });
            stage(k5, c5, [&](std::size_t j) { return a51 * k1[j]; },
                  [&](std::size_t j) { return a52 * k2[j]; },
                  [&](std::size_t j) { return a53 * k3[j]; },
                  [&](std::size_t j) { return a54 * k4[j]; });
            stage(k6, 1.0, [&](std::size_t j) { return a61 * k1[j]; },
                  [&](std::size_t j) { return a62 * k2[j]; },
                  [&](std::size_t j) { return a63 * k3[j]; },
                  [&](std::size_t j) { return a64 * k4[j]; },
                  [&](std::size_t j) { return a65 * k5[j]; });
            for (std::size_t j = 0; j < n; ++j)
                ynew[j] = y[j] + hs * (b1 * k1[j] + b3 * k3[j] + b4 * k4[j] + b5 * k5[j] +
                                       b6 * k6[j]);
            rhs(t + hs, ynew, k7);

            double err = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double ej = hs * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] +
                                        e6 * k6[j] + e7 * k7[j]);
                const double sc =
                    opt.abs_tol + opt.rel_tol * std::max(std::abs(y[j]), std::abs(ynew[j]));
                err = std::max(err, std::abs(ej) / sc);
            }
            if (err <= 1.0 || step <= h_min) {
                t += hs;
                y = ynew;
                k1 = k7;  // FSAL
                if (err <= 1.0)
                    h = step * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
            } else {
                h = step * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
                if (h < h_min)
                    throw std::runtime_error(
                        "integrate_rk45: step-size collapse (solution blow-up?)");
            }
            if (!std::isfinite(y[0]))
                throw std::runtime_error("integrate_rk45: non-finite state (blow-up)");
        }
        OdeSample smp;
        smp.t = target;
        smp.y = y;
        smp.dy.resize(n);
        rhs(target, y, smp.dy);
        out.push_back(std::move(smp));
    }
    return out;
}

}  // namespace mgdual
