#pragma once

#include <span>
#include <vector>

#include "mgdual/goods_prices.hpp"
#include "mgdual/utility_field.hpp"

namespace mgdual {

struct Allocation {
    std::vector<double> c;   // optimal bundle, sum_k S^k c_k == budget
    double value = 0.0;      // U at the bundle
    double multiplier = 0.0; // common FOC multiplier: dU_i = multiplier * S^i
};

// Budget-constrained bundle maximizer: maximize U(t,s,c) over c >= 0 with
// sum_k S^k c_k = budget (the constraint binds by strict monotonicity).
// Additive fields reduce to scalar root-finding on the multiplier through the
// inverse marginals; Cobb-Douglas is closed form; anything else runs projected
// gradient ascent on the expenditure simplex (budget residual tol 1e-10).
Allocation allocate(const UtilityField& U, std::span<const double> prices, double budget,
                    double t = 0.0, StateId s = 0);

// Single-good image U*(t,s,x) = max{ U(t,s,c) : <S(t,s), c> = x } and its
// derivative U*_x (the allocation multiplier, by the envelope theorem).
// Built-in families evaluate analytically; `numeric_*` entry points always go
// through `allocate`, so the two routes can be cross-checked.
class ImageUtility {
  public:
    ImageUtility(UtilityField U, GoodsPrices prices);

    ExtendedReal eval(double t, StateId s, double x) const;
    double deriv(double t, StateId s, double x) const;    // x > 0
    double second_deriv(double t, StateId s, double x) const;
    // x solving U*_x(t,s,x) = y; analytic for built-in families, bisection else
    double inverse_deriv(double t, StateId s, double y) const;

    ExtendedReal numeric_eval(double t, StateId s, double x) const;
    double numeric_deriv(double t, StateId s, double x) const;

    bool analytic() const { return kind_ != Kind::numeric; }
    const UtilityField& source() const { return U_; }
    const GoodsPrices& prices() const { return prices_; }

  private:
    enum class Kind { log_additive, power_additive, cobb_douglas, numeric };
    Kind kind_;
    UtilityField U_;
    GoodsPrices prices_;
    double power_p_ = 0.0;  // power_additive: common exponent; cobb_douglas: p1+p2
};

// Pointwise conjugate V*(t,s,y) = sup_{x>0} (U*(t,s,x) - x y), with derivative
// V*' = -x_hat(y) and V*'' = x_hat/((1-p)y)-style curvature used by the dual
// solver. Analytic when the image is; otherwise bisection on U*_x(x) = y over
// x in [1e-12, 1e12] (bracket exhaustion is an error).
class ConjugateField {
  public:
    explicit ConjugateField(ImageUtility image);

    double eval(double t, StateId s, double y) const;         // y > 0
    double deriv(double t, StateId s, double y) const;        // = -x_hat(y)
    double second_deriv(double t, StateId s, double y) const; // > 0
    double argsup(double t, StateId s, double y) const;       // x_hat(y)

    const ImageUtility& image() const { return image_; }

  private:
    ImageUtility image_;
};

// I_i(t,s,z) = (d/dc U^i)^{-1}(z) for additive fields.
double inverse_marginal(const UtilityField& U, int good, double t, StateId s, double z);

// max_y |V*(y) - sum_i V^i(y S^i)| / |V*(y)| over the grid; both sides are
// computed independently (conjugate-of-image vs componentwise conjugates).
double infimal_convolution_check(const UtilityField& U, const GoodsPrices& prices,
                                 std::span<const double> y_grid, double t = 0.0, StateId s = 0);

}  // namespace mgdual
