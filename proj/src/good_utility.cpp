#include "mgdual/good_utility.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdual {

double invert_marginal_bisect(const std::function<double(double)>& deriv, double z) {
    if (!(z > 0)) throw std::invalid_argument("invert_marginal_bisect: z must be > 0");
    double lo = 1e-12, hi = 1e12;
    // u' is decreasing: want deriv(lo) >= z >= deriv(hi)
    if (deriv(lo) < z || deriv(hi) > z)
        throw std::runtime_error("invert_marginal_bisect: bracket [1e-12,1e12] exhausted");
    for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);  // log-space bisection
        (deriv(mid) > z ? lo : hi) = mid;
        if (hi - lo <= 1e-12 * hi) break;
    }
    return 0.5 * (lo + hi);
}

GoodUtility GoodUtility::log_utility() {
    GoodUtility u;
    u.name = "log";
    u.eval = [](double c) -> ExtendedReal {
        if (c < 0) return ExtendedReal::neg_inf();
        if (c == 0) return ExtendedReal::neg_inf();
        return std::log(c);
    };
    u.deriv = [](double c) { return 1.0 / c; };
    u.second_deriv = [](double c) { return -1.0 / (c * c); };
    u.inverse_marginal = [](double z) { return 1.0 / z; };
    u.conjugate = [](double z) { return -std::log(z) - 1.0; };
    u.conjugate_deriv = [](double z) { return -1.0 / z; };
    u.conjugate_second = [](double z) { return 1.0 / (z * z); };
    return u;
}

GoodUtility GoodUtility::power_utility(double p) {
    if (!(p < 1.0) || p == 0.0)
        throw std::invalid_argument("power_utility: need p < 1, p != 0");
    GoodUtility u;
    u.name = "power(" + std::to_string(p) + ")";
    u.eval = [p](double c) -> ExtendedReal {
        if (c < 0) return ExtendedReal::neg_inf();
        if (c == 0) return p > 0 ? ExtendedReal(0.0) : ExtendedReal::neg_inf();
        return std::pow(c, p) / p;
    };
    u.deriv = [p](double c) { return std::pow(c, p - 1.0); };
    u.second_deriv = [p](double c) { return (p - 1.0) * std::pow(c, p - 2.0); };
    u.inverse_marginal = [p](double z) { return std::pow(z, 1.0 / (p - 1.0)); };
    // sup_c (c^p/p - cz) at c = z^{1/(p-1)}:  z^{p/(p-1)} (1/p - 1)
    u.conjugate = [p](double z) { return std::pow(z, p / (p - 1.0)) * (1.0 - p) / p; };
    u.conjugate_deriv = [p](double z) { return -std::pow(z, 1.0 / (p - 1.0)); };
    u.conjugate_second = [p](double z) {
        return std::pow(z, (2.0 - p) / (p - 1.0)) / (1.0 - p);
    };
    return u;
}

GoodUtility GoodUtility::custom(std::string name,
                                std::function<ExtendedReal(double)> eval,
                                std::function<double(double)> deriv) {
    GoodUtility u;
    u.name = std::move(name);
    u.eval = std::move(eval);
    u.deriv = std::move(deriv);
    auto d = u.deriv;
    u.second_deriv = [d](double c) {
        const double h = 1e-6 * c;
        return (d(c + h) - d(c - h)) / (2.0 * h);
    };
    u.inverse_marginal = [d](double z) { return invert_marginal_bisect(d, z); };
    auto ev = u.eval;
    u.conjugate = [ev, d](double z) {
        const double c = invert_marginal_bisect(d, z);
        return ev(c).value() - c * z;
    };
    u.conjugate_deriv = [d](double z) { return -invert_marginal_bisect(d, z); };
    u.conjugate_second = [d](double z) {
        const double h = 1e-6 * z;
        return (invert_marginal_bisect(d, z - h) - invert_marginal_bisect(d, z + h)) / (2.0 * h);
    };
    return u;
}

}  // namespace mgdual
