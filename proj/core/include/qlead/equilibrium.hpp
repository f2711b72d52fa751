#ifndef QLEAD_EQUILIBRIUM_HPP
#define QLEAD_EQUILIBRIUM_HPP

#include <optional>
#include <string>
#include <variant>

#include "qlead/extvalue.hpp"
#include "qlead/interval.hpp"
#include "qlead/market.hpp"
#include "qlead/model.hpp"
#include "qlead/utility.hpp"

namespace qlead {

/// Which branch of the equilibrium case analysis produced the outcome.
enum class EquilibriumCase {
    IndifferentContinuum,   ///< p = R, l = c, d = 0: every stable rate is an equilibrium
    PriceAtReward,          ///< p = R otherwise: nobody joins
    NonpositiveAtZero,      ///< K(0) <= 0: joining unattractive even when empty
    InteriorRoot,           ///< unique root of K on (0, min(Lambda, mu))
    MarketCapped,           ///< K(Lambda) >= 0 with Lambda < mu: whole market joins
    UnstableNoEquilibrium,  ///< K >= 0 up to mu with Lambda >= mu: no equilibrium
};

const char* to_string(EquilibriumCase c);

/// Classification of the symmetric equilibrium set for one policy.
struct EquilibriumOutcome {
    enum class Kind { Unique, Continuum, None };

    Kind kind = Kind::None;
    double lambda_e = 0.0;        ///< valid when kind == Unique
    AchievableInterval interval;  ///< valid when kind == Continuum

    // Diagnostics.
    EquilibriumCase case_label = EquilibriumCase::UnstableNoEquilibrium;
    double k_at_zero = 0.0;
    ExtValue k_limit = ExtValue::neg_inf();

    bool unique() const { return kind == Kind::Unique; }
    bool continuum() const { return kind == Kind::Continuum; }
    bool none() const { return kind == Kind::None; }
};

struct SolveOptions {
    double rate_tol = 1e-9;  ///< absolute bisection tolerance on the rate
    double k_tol = 1e-10;    ///< quadrature tolerance for custom models
    bool validate_utility = true;
};

/// Computes the symmetric equilibrium input rate(s) for a policy.
///
/// Case analysis: at p = R the outcome is a continuum (l = c, d = 0) or no
/// joining; for p < R the equilibrium is 0 when K(0) <= 0, the whole
/// market when K(Lambda) >= 0 and Lambda < mu, nonexistent when K stays
/// nonnegative up to mu with Lambda >= mu, and otherwise the unique root
/// of K, found by bisection (K is strictly decreasing in lambda).
EquilibriumOutcome solve_equilibrium(const Policy& policy, const MarketParams& params,
                                     const UtilityModel& u, const SolveOptions& opts = {});

/// Lead-time answers carry the no-compensation state (supremum at
/// d -> infinity) explicitly.
struct LeadtimeAnswer {
    std::optional<double> d;  ///< nullopt: no compensation
    bool no_comp() const { return !d.has_value(); }
};

/// Largest lead-time d with equilibrium rate lambda under fixed (p, l):
/// the unique root of K(lambda, d, p, l) = 0 in d for interior targets, the
/// largest d with K(Lambda, d, p, l) >= 0 for lambda = Lambda, and the
/// no-compensation state when the target equals the compensation-free rate
/// (the supremum over d is infinite). Throws NotAchievableError, with the
/// reachable interval attached, for targets outside it.
LeadtimeAnswer required_leadtime(double lambda_target, double p, double l,
                                 const MarketParams& params, const UtilityModel& u,
                                 const SolveOptions& opts = {});

/// Largest entrance fee p with equilibrium rate lambda under fixed (d, l);
/// R for target 0. Throws NotAchievableError outside the reachable range.
double required_price(double lambda_target, const LeadtimeAnswer& d, double l,
                      const MarketParams& params, const UtilityModel& u,
                      const SolveOptions& opts = {});

/// Smallest compensation rate l in [0, c] with equilibrium rate lambda
/// under fixed (d, p); 0 when the target equals the compensation-free
/// rate. Throws NotAchievableError outside the reachable range.
double required_compensation(double lambda_target, double d, double p,
                             const MarketParams& params, const UtilityModel& u,
                             const SolveOptions& opts = {});

} // namespace qlead

#endif
