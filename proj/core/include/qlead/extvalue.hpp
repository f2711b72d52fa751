#ifndef QLEAD_EXTVALUE_HPP
#define QLEAD_EXTVALUE_HPP

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>

namespace qlead {

/// A scalar extended with a single point at minus infinity.
///
/// Several benefit functionals in this library diverge to -inf on part of
/// their domain (unstable or under-compensated regimes). Representing the
/// divergent outcome explicitly keeps comparisons well defined and prevents
/// accidental arithmetic on non-finite values.
class ExtValue {
  public:
    constexpr ExtValue() : v_(0.0) {}
    constexpr ExtValue(double v) : v_(v) {}

    static constexpr ExtValue neg_inf() {
        return ExtValue(-std::numeric_limits<double>::infinity());
    }

    constexpr bool is_neg_inf() const { return std::isinf(v_) && v_ < 0.0; }
    constexpr bool is_finite() const { return std::isfinite(v_); }

    /// Raw value; -inf when divergent. Safe for comparisons.
    constexpr double raw() const { return v_; }

    /// Finite value; throws when the quantity diverged.
    double finite() const {
        if (!is_finite())
            throw std::logic_error("ExtValue: finite() called on -inf");
        return v_;
    }

    friend constexpr auto operator<=>(const ExtValue& a, const ExtValue& b) {
        return a.v_ <=> b.v_;
    }
    friend constexpr bool operator==(const ExtValue& a, const ExtValue& b) {
        return a.v_ == b.v_;
    }
    friend constexpr auto operator<=>(const ExtValue& a, double b) { return a.v_ <=> b; }
    friend constexpr bool operator==(const ExtValue& a, double b) { return a.v_ == b; }

  private:
    double v_;
};

} // namespace qlead

#endif
