#ifndef QLEAD_LOADCONTROL_HPP
#define QLEAD_LOADCONTROL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlead/equilibrium.hpp"
#include "qlead/interval.hpp"
#include "qlead/market.hpp"
#include "qlead/utility.hpp"

namespace qlead {

/// Which policy parameters are held fixed.
enum class FixedPair { PL, DL, DP };
enum class FixedOne { P, L, D };

/// Equilibrium input rate of the compensation-free benchmark with entrance
/// fee p and waiting cost `cost_rate`: 0 when K_CF(0) <= 0, the market rate
/// when K_CF caps at Lambda < mu, otherwise the root of K_CF, capped at
/// mu (1 - margin). For CARA the interior root equals
/// mu - r cost / (1 - exp(-r (R - p))).
double lambda_cf(double p, double cost_rate, const MarketParams& params, const UtilityModel& u,
                 const SolveOptions& opts = {});

/// Entrance fee that makes lambda the compensation-free equilibrium under
/// waiting cost `cost_rate`; nullopt when no fee in [0, R] does.
std::optional<double> cf_price(double lambda, double cost_rate, const MarketParams& params,
                               const UtilityModel& u, const SolveOptions& opts = {});

/// Achievable input rates when two policy parameters are fixed.
/// PL fixes (p, l) with d free, DL fixes (d, l) with p free, DP fixes
/// (d, p) with l free. `a` and `b` are the fixed values in that order.
AchievableInterval achievable_two_fixed(FixedPair which, double a, double b,
                                        const MarketParams& params, const UtilityModel& u,
                                        const SolveOptions& opts = {});

/// Achievable input rates when a single parameter is fixed.
AchievableInterval achievable_one_fixed(FixedOne which, double value, const MarketParams& params,
                                        const UtilityModel& u, const SolveOptions& opts = {});

/// Provider profit rate under input rate lambda (not necessarily in
/// equilibrium): lambda (p - l e^{-(mu - lambda) d} / (mu - lambda));
/// lambda p under no compensation.
double profit_g1(double lambda, const Policy& policy, const MarketParams& params);

/// One traced point of a pricing curve; free1/free2 follow the sweep
/// convention of trace_pricing_curve.
struct CurvePoint {
    double free1;
    double free2;
    double profit;
};

/// The set of free-parameter pairs inducing one target rate, with profits.
struct PricingCurve {
    FixedOne fixed;
    double fixed_value;
    double target_lambda;
    std::vector<CurvePoint> points;
    std::size_t maximizer = 0;    ///< grid argmax of profit
    CurvePoint refined_max{};     ///< golden-section refinement (>= grid max)

    double best_profit() const { return refined_max.profit; }
};

/// Traces the pricing curve for one fixed parameter and a target rate.
/// Fixed p: sweeps l over its feasible subinterval and solves for d
/// (free1 = d, free2 = l; d may be +inf on the no-compensation boundary).
/// Fixed l: sweeps d and solves for p (free1 = d, free2 = p).
/// Fixed d: sweeps l and solves for p (free1 = l, free2 = p).
/// Every point satisfies the equilibrium condition at the target rate.
/// Throws NotAchievableError when the target is outside the one-fixed
/// achievable interval.
PricingCurve trace_pricing_curve(FixedOne fixed, double fixed_value, double lambda_target,
                                 std::size_t grid_size, const MarketParams& params,
                                 const UtilityModel& u, const SolveOptions& opts = {});

/// Risk-neutral profit envelope H(lambda) = lambda (R - c / (mu - lambda)),
/// a strict upper bound on the provider profit at every achievable rate.
double h_envelope(double lambda, const MarketParams& params);

/// Rate maximizing H: min(mu - sqrt(c mu / R), Lambda), floored at 0.
double lambda_star(const MarketParams& params);

/// Witness policy with profit within epsilon of the unattainable supremum
/// H(lambda_star).
struct EpsOptimalResult {
    Policy policy = Policy::no_compensation(0.0);
    double profit = 0.0;
    double lambda_target = 0.0;
    double h_star = 0.0;
    double delta = 0.0;     ///< price discount R - p of the witness
    bool reached = false;   ///< profit >= h_star - epsilon
    std::string warning;    ///< set when the shrink loop hit its floor
};

/// Constructs an epsilon-optimal policy of the form
/// (d^e(lambda*, R - delta, c), R - delta, c), shrinking delta
/// geometrically from (R - p_cf(lambda*)) / 2 until the profit is within
/// epsilon of H(lambda*). For epsilon too small for the floating-point
/// bracket the best policy found is returned with a warning.
EpsOptimalResult eps_optimal_policy(double epsilon, const MarketParams& params,
                                    const UtilityModel& u, const SolveOptions& opts = {});

/// What to hold fixed in a constrained profit maximization.
struct ProfitConstraint {
    enum class Kind { None, OneFixed, TwoFixed } kind = Kind::None;
    FixedOne one{};            ///< valid for OneFixed
    FixedPair two{};           ///< valid for TwoFixed
    double a = 0.0, b = 0.0;   ///< fixed values (a only, for OneFixed)

    static ProfitConstraint none() { return {}; }
    static ProfitConstraint one_fixed(FixedOne w, double v);
    static ProfitConstraint two_fixed(FixedPair w, double a, double b);
};

struct ProfitPoint {
    double lambda;
    std::optional<double> g;  ///< best profit; nullopt where not achievable
};

/// Best profit at each grid rate under the constraint: maximum along the
/// pricing curve for one fixed parameter, the profit of the unique required
/// parameter for two fixed, and the compensation-free profit
/// lambda * p_cf(lambda) for the unconstrained reference curve. Rates
/// outside the corresponding achievable interval yield nullopt.
std::vector<ProfitPoint> optimal_profit_constrained(const ProfitConstraint& constraint,
                                                    std::span<const double> lambda_grid,
                                                    const MarketParams& params,
                                                    const UtilityModel& u,
                                                    const SolveOptions& opts = {});

} // namespace qlead

#endif
