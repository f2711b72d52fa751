#ifndef QLEAD_MARKET_HPP
#define QLEAD_MARKET_HPP

#include <optional>
#include <stdexcept>
#include <string>

namespace qlead {

/// Input rates are compared against the service rate with this relative
/// margin; the stable region [0, mu) has no maximum, so sweeps and root
/// brackets stop at mu * (1 - kStabilityMargin).
inline constexpr double kStabilityMargin = 1e-9;

/// Exogenous market and system primitives of the single-server model.
struct MarketParams {
    double Lambda; ///< potential arrival rate (customers / time)
    double mu;     ///< service rate (customers / time)
    double R;      ///< service reward (money)
    double c;      ///< waiting cost rate (money / time)

    /// Largest admissible input rate: min(Lambda, mu * (1 - margin)).
    double max_rate() const;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Requested input rate at or beyond the stability boundary.
class InstabilityError : public std::domain_error {
  public:
    InstabilityError(double lambda, double mu)
        : std::domain_error("input rate " + std::to_string(lambda) +
                            " is not stable for service rate " + std::to_string(mu)),
          lambda_(lambda), mu_(mu) {}
    double lambda() const { return lambda_; }
    double mu() const { return mu_; }

  private:
    double lambda_, mu_;
};

/// Provider decision triple: quoted lead-time d, entrance fee p and
/// compensation rate l per unit of sojourn time beyond d.
///
/// "No compensation" (the d -> infinity limit, equivalently l = 0) is a
/// first-class state rather than an infinite float, so boundary cases stay
/// explicit and free of inf arithmetic.
class Policy {
  public:
    static Policy quoted(double d, double p, double l) { return Policy(d, p, l); }
    static Policy no_compensation(double p) { return Policy(std::nullopt, p, 0.0); }

    bool has_leadtime() const { return d_.has_value(); }
    bool no_comp() const { return !d_.has_value(); }

    /// Quoted lead-time; throws std::logic_error for the no-compensation state.
    double d() const;
    double p() const { return p_; }

    /// Stored compensation rate (0 for the no-compensation state).
    double l() const { return l_; }

    /// Compensation rate that actually applies: 0 under no compensation.
    double effective_l() const { return no_comp() ? 0.0 : l_; }

    /// Checks the admissible policy space p <= R, 0 <= l <= c, d >= 0.
    void validate(const MarketParams& params) const;

  private:
    Policy(std::optional<double> d, double p, double l) : d_(d), p_(p), l_(l) {}

    std::optional<double> d_;
    double p_;
    double l_;
};

} // namespace qlead

#endif
