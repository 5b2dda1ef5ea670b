#include "mgdual/utility_field.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdual {

UtilityField make_additive(std::vector<GoodUtility> per_good) {
    if (per_good.empty()) throw std::invalid_argument("make_additive: empty component list");
    UtilityField f;
    f.m = static_cast<int>(per_good.size());
    f.family = UtilityFamily::additive;
    f.components = std::move(per_good);
    const auto* comps = &f.components;
    f.eval = [comps](double, StateId, std::span<const double> c) {
        ExtendedReal v(0.0);
        for (std::size_t i = 0; i < comps->size(); ++i) v += (*comps)[i].eval(c[i]);
        return v;
    };
    f.gradient = [comps](double, StateId, std::span<const double> c, std::span<double> out) {
        for (std::size_t i = 0; i < comps->size(); ++i) out[i] = (*comps)[i].deriv(c[i]);
    };
    f.hessian = [comps](double, StateId, std::span<const double> c, std::span<double> out) {
        const std::size_t m = comps->size();
        for (std::size_t i = 0; i < m * m; ++i) out[i] = 0.0;
        for (std::size_t i = 0; i < m; ++i) out[i * m + i] = (*comps)[i].second_deriv(c[i]);
    };
    return f;
}

UtilityField make_cobb_douglas(double p1, double p2) {
    if (!(p1 < 0.0) || !(p2 < 0.0))
        throw std::invalid_argument("make_cobb_douglas: need p1 < 0 and p2 < 0");
    UtilityField f;
    f.m = 2;
    f.family = UtilityFamily::cobb_douglas;
    f.cd_p1 = p1;
    f.cd_p2 = p2;
    f.eval = [p1, p2](double, StateId, std::span<const double> c) -> ExtendedReal {
        if (c[0] <= 0.0 || c[1] <= 0.0) return ExtendedReal::neg_inf();
        return -std::pow(c[0], p1) * std::pow(c[1], p2) / (p1 * p2);
    };
    f.gradient = [p1, p2](double, StateId, std::span<const double> c, std::span<double> out) {
        const double common = -std::pow(c[0], p1) * std::pow(c[1], p2) / (p1 * p2);
        out[0] = common * p1 / c[0];
        out[1] = common * p2 / c[1];
    };
    f.hessian = [p1, p2](double, StateId, std::span<const double> c, std::span<double> out) {
        const double common = -std::pow(c[0], p1) * std::pow(c[1], p2) / (p1 * p2);
        out[0] = common * p1 * (p1 - 1.0) / (c[0] * c[0]);
        out[1] = out[2] = common * p1 * p2 / (c[0] * c[1]);
        out[3] = common * p2 * (p2 - 1.0) / (c[1] * c[1]);
    };
    return f;
}

UtilityField make_custom(
    int m, std::function<ExtendedReal(double, StateId, std::span<const double>)> eval,
    std::function<void(double, StateId, std::span<const double>, std::span<double>)> gradient) {
    if (m <= 0) throw std::invalid_argument("make_custom: m must be positive");
    UtilityField f;
    f.m = m;
    f.family = UtilityFamily::custom;
    f.eval = std::move(eval);
    f.gradient = std::move(gradient);
    auto grad = f.gradient;
    f.hessian = [m, grad](double t, StateId s, std::span<const double> c, std::span<double> out) {
        std::vector<double> cp(c.begin(), c.end()), gp(m), gm(m);
        for (int j = 0; j < m; ++j) {
            const double h = 1e-6 * cp[j];
            const double cj = cp[j];
            cp[j] = cj + h;
            grad(t, s, cp, gp);
            cp[j] = cj - h;
            grad(t, s, cp, gm);
            cp[j] = cj;
            for (int i = 0; i < m; ++i) out[i * m + j] = (gp[i] - gm[i]) / (2.0 * h);
        }
        // symmetrize
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const double v = 0.5 * (out[i * m + j] + out[j * m + i]);
                out[i * m + j] = out[j * m + i] = v;
            }
    };
    return f;
}

}  // namespace mgdual
