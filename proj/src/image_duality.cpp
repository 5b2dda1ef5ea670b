#include "mgdual/image_duality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mgdual {

namespace {

// Euclidean projection of u onto {u >= 0, sum u = total} (Duchi et al.).
void project_simplex(std::vector<double>& u, double total) {
    std::vector<double> srt(u);
    std::sort(srt.begin(), srt.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    int rho = 0;
    for (std::size_t i = 0; i < srt.size(); ++i) {
        cum += srt[i];
        const double cand = (cum - total) / static_cast<double>(i + 1);
        if (srt[i] - cand > 0) {
            rho = static_cast<int>(i + 1);
            theta = cand;
        }
    }
    (void)rho;
    for (auto& v : u) v = std::max(v - theta, 0.0);
}

Allocation allocate_additive(const UtilityField& U, std::span<const double> S, double x,
                             double t, StateId s) {
    // FOC: dU_i(c_i) = lambda * S_i  =>  c_i = I_i(lambda S_i); choose lambda
    // so that expenditure g(lambda) = sum_i S_i I_i(lambda S_i) equals x.
    const int m = U.m;
    auto spend = [&](double lam) {
        double tot = 0.0;
        for (int i = 0; i < m; ++i) tot += S[i] * U.components[i].inverse_marginal(lam * S[i]);
        return tot;
    };
    double lo = 1.0, hi = 1.0;
    for (int it = 0; spend(lo) < x; ++it) {
        lo *= 0.125;
        if (it > 400) throw std::runtime_error("allocate: multiplier bracket exhausted (low)");
    }
    for (int it = 0; spend(hi) > x; ++it) {
        hi *= 8.0;
        if (it > 400) throw std::runtime_error("allocate: multiplier bracket exhausted (high)");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        (spend(mid) > x ? lo : hi) = mid;
    }
    const double lam = 0.5 * (lo + hi);
    Allocation out;
    out.c.resize(m);
    double tot = 0.0;
    for (int i = 0; i < m; ++i) {
        out.c[i] = U.components[i].inverse_marginal(lam * S[i]);
        tot += S[i] * out.c[i];
    }
    // snap the budget exactly; the FOC perturbation is O(1e-15)
    const double scale = x / tot;
    for (auto& ci : out.c) ci *= scale;
    out.multiplier = lam;
    out.value = U.eval(t, s, out.c).value();
    return out;
}

Allocation allocate_cobb_douglas(const UtilityField& U, std::span<const double> S, double x,
                                 double t, StateId s) {
    const double p = U.cd_p1 + U.cd_p2;
    Allocation out;
    out.c = {x * U.cd_p1 / (p * S[0]), x * U.cd_p2 / (p * S[1])};
    out.value = U.eval(t, s, out.c).value();
    std::vector<double> g(2);
    U.gradient(t, s, out.c, g);
    out.multiplier = g[0] / S[0];
    return out;
}

Allocation allocate_projected_gradient(const UtilityField& U, std::span<const double> S,
                                       double x, double t, StateId s) {
    const int m = U.m;
    // work in expenditure coordinates u_i = S_i c_i on {u >= 0, sum u = x}
    std::vector<double> u(m, x / m), c(m), g(m), gu(m), trial(m), ctrial(m);
    auto to_c = [&](const std::vector<double>& uu, std::vector<double>& cc) {
        for (int i = 0; i < m; ++i) cc[i] = uu[i] / S[i];
    };
    to_c(u, c);
    double f = U.eval(t, s, c).value();
    if (!std::isfinite(f))
        throw std::runtime_error("allocate: utility not finite at the centered bundle");
    double step = x;
    double pg_norm = 0.0;
    for (int it = 0; it < 20000; ++it) {
        U.gradient(t, s, c, g);
        for (int i = 0; i < m; ++i) gu[i] = g[i] / S[i];
        // projected-gradient stationarity: gu minus its mean, restricted to
        // the face (coordinates can only move up when u_i = 0)
        const double mean = std::accumulate(gu.begin(), gu.end(), 0.0) / m;
        pg_norm = 0.0;
        for (int i = 0; i < m; ++i) {
            const double d = gu[i] - mean;
            if (u[i] > 1e-14 * x || d > 0) pg_norm = std::max(pg_norm, std::abs(d));
        }
        if (pg_norm <= 1e-11 * std::max(1.0, std::abs(mean))) break;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (int i = 0; i < m; ++i) trial[i] = u[i] + step * gu[i];
            project_simplex(trial, x);
            to_c(trial, ctrial);
            const ExtendedReal ft = U.eval(t, s, ctrial);
            if (ft.finite() && ft.value() > f) {
                u = trial;
                c = ctrial;
                f = ft.value();
                accepted = true;
                step *= 1.3;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    if (pg_norm > 1e-6)
        throw std::runtime_error("allocate: projected gradient did not converge");
    Allocation out;
    out.c = c;
    out.value = f;
    U.gradient(t, s, c, g);
    double lam = 0.0;
    for (int i = 0; i < m; ++i) lam += g[i] / S[i];
    out.multiplier = lam / m;
    return out;
}

}  // namespace

Allocation allocate(const UtilityField& U, std::span<const double> prices, double budget,
                    double t, StateId s) {
    if (!(budget > 0.0)) throw std::invalid_argument("allocate: budget must be > 0");
    if (static_cast<int>(prices.size()) != U.m)
        throw std::invalid_argument("allocate: price dimension mismatch");
    for (double p : prices)
        if (!(p > 0.0)) throw std::invalid_argument("allocate: prices must be > 0");

    switch (U.family) {
        case UtilityFamily::additive:
            return allocate_additive(U, prices, budget, t, s);
        case UtilityFamily::cobb_douglas:
            return allocate_cobb_douglas(U, prices, budget, t, s);
        case UtilityFamily::custom:
        default:
            return allocate_projected_gradient(U, prices, budget, t, s);
    }
}

ImageUtility::ImageUtility(UtilityField U, GoodsPrices prices)
    : kind_(Kind::numeric), U_(std::move(U)), prices_(std::move(prices)) {
    if (prices_.m != U_.m) throw std::invalid_argument("ImageUtility: dimension mismatch");
    if (U_.family == UtilityFamily::cobb_douglas) {
        kind_ = Kind::cobb_douglas;
        power_p_ = U_.cd_p1 + U_.cd_p2;
    } else if (U_.family == UtilityFamily::additive) {
        bool all_log = true, all_power = true;
        double p0 = 0.0;
        for (std::size_t i = 0; i < U_.components.size(); ++i) {
            const auto& nm = U_.components[i].name;
            if (nm != "log") all_log = false;
            if (nm.rfind("power(", 0) == 0) {
                const double p = std::stod(nm.substr(6));
                if (i == 0)
                    p0 = p;
                else if (std::abs(p - p0) > 0)
                    all_power = false;
            } else {
                all_power = false;
            }
        }
        if (all_log)
            kind_ = Kind::log_additive;
        else if (all_power) {
            kind_ = Kind::power_additive;
            power_p_ = p0;
        }
    }
}

ExtendedReal ImageUtility::eval(double t, StateId s, double x) const {
    if (x < 0.0) return ExtendedReal::neg_inf();
    const int m = U_.m;
    switch (kind_) {
        case Kind::log_additive: {
            if (x == 0.0) return ExtendedReal::neg_inf();
            const auto S = prices_.at(t, s);
            double logS = 0.0;
            for (double v : S) logS += std::log(v);
            return m * std::log(x / m) - logS;
        }
        case Kind::power_additive: {
            const double p = power_p_;
            if (x == 0.0) return p > 0 ? ExtendedReal(0.0) : ExtendedReal::neg_inf();
            const auto S = prices_.at(t, s);
            const double q = p / (1.0 - p);
            double A = 0.0;
            for (double v : S) A += std::pow(v, -q);
            return std::pow(x, p) / p * std::pow(A, 1.0 - p);
        }
        case Kind::cobb_douglas: {
            if (x == 0.0) return ExtendedReal::neg_inf();
            const auto S = prices_.at(t, s);
            const double p1 = U_.cd_p1, p2 = U_.cd_p2, p = power_p_;
            const double G = std::pow(-p1, p1 - 1.0) * std::pow(-p2, p2 - 1.0) /
                             std::pow(-p, p - 1.0) * std::pow(S[0], -p1) * std::pow(S[1], -p2);
            return std::pow(x, p) / p * G;
        }
        case Kind::numeric:
        default: {
            if (x == 0.0) {
                const ExtendedReal probe = numeric_eval(t, s, 1e-10);
                if (!probe.finite() || probe.value() < -1e9) return ExtendedReal::neg_inf();
                return probe;
            }
            return numeric_eval(t, s, x);
        }
    }
}

double ImageUtility::deriv(double t, StateId s, double x) const {
    if (!(x > 0.0)) throw std::invalid_argument("ImageUtility::deriv: x must be > 0");
    const int m = U_.m;
    switch (kind_) {
        case Kind::log_additive:
            return m / x;
        case Kind::power_additive:
        case Kind::cobb_douglas: {
            const double p = power_p_;
            const double base = eval(t, s, 1.0).value();  // U*(1) = K/p
            return p * base * std::pow(x, p - 1.0);
        }
        case Kind::numeric:
        default:
            return numeric_deriv(t, s, x);
    }
}

double ImageUtility::second_deriv(double t, StateId s, double x) const {
    switch (kind_) {
        case Kind::log_additive:
            return -U_.m / (x * x);
        case Kind::power_additive:
        case Kind::cobb_douglas: {
            const double p = power_p_;
            const double base = eval(t, s, 1.0).value();
            return p * (p - 1.0) * base * std::pow(x, p - 2.0);
        }
        case Kind::numeric:
        default: {
            const double h = 1e-5 * x;
            return (deriv(t, s, x + h) - deriv(t, s, x - h)) / (2.0 * h);
        }
    }
}

double ImageUtility::inverse_deriv(double t, StateId s, double y) const {
    if (!(y > 0.0)) throw std::invalid_argument("ImageUtility::inverse_deriv: y must be > 0");
    switch (kind_) {
        case Kind::log_additive:
            return U_.m / y;
        case Kind::power_additive:
        case Kind::cobb_douglas: {
            const double p = power_p_;
            const double K = p * eval(t, s, 1.0).value();  // U* = (x^p/p) K
            return std::pow(y / K, 1.0 / (p - 1.0));
        }
        case Kind::numeric:
        default: {
            double lo = 1e-12, hi = 1e12;
            if (deriv(t, s, lo) < y || deriv(t, s, hi) > y)
                throw std::runtime_error("ImageUtility: bracket [1e-12,1e12] exhausted");
            for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                const double mid = std::sqrt(lo * hi);
                (deriv(t, s, mid) > y ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
}

ExtendedReal ImageUtility::numeric_eval(double t, StateId s, double x) const {
    if (x <= 0.0) return ExtendedReal::neg_inf();
    const auto S = prices_.at(t, s);
    return allocate(U_, S, x, t, s).value;
}

double ImageUtility::numeric_deriv(double t, StateId s, double x) const {
    const auto S = prices_.at(t, s);
    return allocate(U_, S, x, t, s).multiplier;
}

ConjugateField::ConjugateField(ImageUtility image) : image_(std::move(image)) {}

double ConjugateField::argsup(double t, StateId s, double y) const {
    if (!(y > 0.0)) throw std::invalid_argument("ConjugateField: y must be > 0");
    return image_.inverse_deriv(t, s, y);
}

double ConjugateField::eval(double t, StateId s, double y) const {
    if (!(y > 0.0)) throw std::invalid_argument("ConjugateField: y must be > 0");
    const double xh = argsup(t, s, y);
    return image_.eval(t, s, xh).value() - xh * y;
}

double ConjugateField::deriv(double t, StateId s, double y) const {
    return -argsup(t, s, y);
}

double ConjugateField::second_deriv(double t, StateId s, double y) const {
    const double xh = argsup(t, s, y);
    const double upp = image_.second_deriv(t, s, xh);
    return -1.0 / upp;  // dx_hat/dy = 1/U*'' < 0
}

double inverse_marginal(const UtilityField& U, int good, double t, StateId s, double z) {
    (void)t;
    (void)s;
    if (!U.additive()) throw std::invalid_argument("inverse_marginal: additive fields only");
    if (good < 0 || good >= U.m) throw std::invalid_argument("inverse_marginal: bad good index");
    if (!(z > 0.0)) throw std::invalid_argument("inverse_marginal: z must be > 0");
    return U.components[good].inverse_marginal(z);
}

double infimal_convolution_check(const UtilityField& U, const GoodsPrices& prices,
                                 std::span<const double> y_grid, double t, StateId s) {
    if (!U.additive())
        throw std::invalid_argument("infimal_convolution_check: additive fields only");
    ConjugateField conj{ImageUtility(U, prices)};
    const auto S = prices.at(t, s);
    double worst = 0.0;
    for (double y : y_grid) {
        const double lhs = conj.eval(t, s, y);
        double rhs = 0.0;
        for (int i = 0; i < U.m; ++i) rhs += U.components[i].conjugate(y * S[i]);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1e-12, std::abs(lhs)));
    }
    return worst;
}

}  // namespace mgdual
