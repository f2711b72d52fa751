#ifndef QLEAD_INTERVAL_HPP
#define QLEAD_INTERVAL_HPP

#include <stdexcept>
#include <string>

namespace qlead {

/// Interval of input rates with per-endpoint open/closed flags. The upper
/// endpoint is open whenever it sits at the stability boundary mu.
struct AchievableInterval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = true;
    bool hi_closed = true;
    bool empty = false;

    static AchievableInterval closed(double lo, double hi) {
        return AchievableInterval{lo, hi, true, true, false};
    }
    static AchievableInterval half_open(double lo, double hi) {
        return AchievableInterval{lo, hi, true, false, false};
    }
    static AchievableInterval singleton(double x) {
        return AchievableInterval{x, x, true, true, false};
    }
    static AchievableInterval none() {
        return AchievableInterval{0.0, 0.0, false, false, true};
    }

    bool is_singleton() const { return !empty && lo == hi; }

    /// Membership with a symmetric tolerance on both endpoints. With
    /// tol = 0 the open flags are enforced exactly.
    bool contains(double x, double tol = 0.0) const {
        if (empty)
            return false;
        if (x < lo - tol || x > hi + tol)
            return false;
        if (tol == 0.0 && !lo_closed && x == lo)
            return false;
        if (tol == 0.0 && !hi_closed && x == hi)
            return false;
        return true;
    }

    std::string str() const;
};

/// A requested input rate cannot be induced with the given restrictions.
/// Carries the interval of rates that are reachable so callers can report
/// actionable bounds.
class NotAchievableError : public std::runtime_error {
  public:
    NotAchievableError(double lambda, AchievableInterval achievable, const std::string& what)
        : std::runtime_error(what), lambda_(lambda), achievable_(achievable) {}

    double lambda() const { return lambda_; }
    const AchievableInterval& achievable() const { return achievable_; }

  private:
    double lambda_;
    AchievableInterval achievable_;
};

} // namespace qlead

#endif
