#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mgdual/extended_real.hpp"
#include "mgdual/good_utility.hpp"

namespace mgdual {

// Opaque state id supplied by the market modules; utility code never
// interprets it (nor any probability attached to it).
using StateId = int;

enum class UtilityFamily { additive, cobb_douglas, custom };

// m-good state/time-dependent utility process. Immutable after construction;
// eval is strictly concave, strictly increasing per coordinate, Inada in each
// good, and -inf off the closed positive orthant (boundary by upper
// semicontinuous extension). Shipped families are deterministic in (t, state).
struct UtilityField {
    int m = 0;
    UtilityFamily family = UtilityFamily::custom;

    std::function<ExtendedReal(double t, StateId s, std::span<const double> c)> eval;
    // gradient on the interior only; out has size m
    std::function<void(double t, StateId s, std::span<const double> c, std::span<double> out)>
        gradient;
    // dense m x m Hessian (row-major) on the interior; used by the tree solvers
    std::function<void(double t, StateId s, std::span<const double> c, std::span<double> out)>
        hessian;

    // additive only
    std::vector<GoodUtility> components;
    // cobb_douglas only
    double cd_p1 = 0.0, cd_p2 = 0.0;

    bool additive() const { return family == UtilityFamily::additive; }
};

// Sum of 1-dim Inada utilities, one per good.
UtilityField make_additive(std::vector<GoodUtility> per_good);

// U(c1,c2) = -c1^{p1} c2^{p2} / (p1 p2), p1 < 0, p2 < 0; -inf on the boundary.
UtilityField make_cobb_douglas(double p1, double p2);

// Arbitrary user field; Hessian defaults to central differences of gradient.
UtilityField make_custom(int m,
                         std::function<ExtendedReal(double, StateId, std::span<const double>)> eval,
                         std::function<void(double, StateId, std::span<const double>,
                                            std::span<double>)> gradient);

}  // namespace mgdual
