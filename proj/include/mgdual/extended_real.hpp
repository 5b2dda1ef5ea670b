#pragma once

#include <limits>
#include <ostream>

namespace mgdual {

// Extended real in R ∪ {-inf, +inf}. Utility values live here so that
// boundary behaviour (U = -inf off the domain) is explicit instead of a
// large-negative sentinel. Addition follows the expectation convention:
// a sum involving -inf is -inf even if +inf also appears, mirroring
// "the integral is -inf whenever the negative part integrates to infinity".
class ExtendedReal {
  public:
    constexpr ExtendedReal() : v_(0.0) {}
    constexpr ExtendedReal(double v) : v_(v) {}

    static constexpr ExtendedReal neg_inf() {
        return ExtendedReal(-std::numeric_limits<double>::infinity());
    }
    static constexpr ExtendedReal pos_inf() {
        return ExtendedReal(std::numeric_limits<double>::infinity());
    }

    constexpr bool finite() const { return v_ == v_ && v_ > -inf_ && v_ < inf_; }
    constexpr bool is_neg_inf() const { return v_ == -inf_; }
    constexpr bool is_pos_inf() const { return v_ == inf_; }
    constexpr double value() const { return v_; }

    friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
        if (a.is_neg_inf() || b.is_neg_inf()) return neg_inf();
        return ExtendedReal(a.v_ + b.v_);
    }
    friend constexpr ExtendedReal operator*(double c, ExtendedReal a) {
        if (a.finite()) return ExtendedReal(c * a.v_);
        if (c == 0.0) return ExtendedReal(0.0);
        return c > 0 ? a : ExtendedReal(-a.v_);
    }
    ExtendedReal& operator+=(ExtendedReal b) { return *this = *this + b; }

    friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }
    friend constexpr bool operator<(ExtendedReal a, ExtendedReal b) { return a.v_ < b.v_; }
    friend constexpr bool operator<=(ExtendedReal a, ExtendedReal b) { return a.v_ <= b.v_; }
    friend constexpr bool operator>(ExtendedReal a, ExtendedReal b) { return a.v_ > b.v_; }
    friend constexpr bool operator>=(ExtendedReal a, ExtendedReal b) { return a.v_ >= b.v_; }

    friend std::ostream& operator<<(std::ostream& os, ExtendedReal a);

  private:
    static constexpr double inf_ = std::numeric_limits<double>::infinity();
    double v_;
};

}  // namespace mgdual
