#pragma once

#include <functional>
#include <string>

#include "mgdual/extended_real.hpp"

namespace mgdual {

// One-dimensional Inada utility: strictly concave, strictly increasing on
// (0,inf), u'(0+) = inf, u'(inf) = 0. Building block of additive fields.
// conjugate(z) = sup_c (u(c) - c z) and inverse_marginal(z) = (u')^{-1}(z)
// come analytically for the built-in families and by bisection otherwise.
struct GoodUtility {
    std::string name;
    std::function<ExtendedReal(double c)> eval;        // c >= 0
    std::function<double(double c)> deriv;             // c > 0
    std::function<double(double c)> second_deriv;      // c > 0
    std::function<double(double z)> inverse_marginal;  // z > 0
    std::function<double(double z)> conjugate;         // z > 0
    std::function<double(double z)> conjugate_deriv;   // z > 0, equals -inverse_marginal
    std::function<double(double z)> conjugate_second;  // z > 0, equals -I'(z) > 0

    static GoodUtility log_utility();
    // c^p / p for p < 1, p != 0 (p < 0 gives U(0) = -inf; 0 < p < 1 gives U(0) = 0)
    static GoodUtility power_utility(double p);
    // Generic hook: derivative inverse / conjugate filled in by bisection.
    static GoodUtility custom(std::string name,
                              std::function<ExtendedReal(double)> eval,
                              std::function<double(double)> deriv);
};

// Solves u'(c) = z by bisection over c in [1e-12, 1e12], rel. tol 1e-12 on c.
// Throws std::runtime_error on bracket exhaustion.
double invert_marginal_bisect(const std::function<double(double)>& deriv, double z);

}  // namespace mgdual
