#include "qlead/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "qlead/loadcontrol.hpp"
#include "qlead/roots.hpp"

namespace qlead {

namespace {

// Matching tolerance when testing whether a target rate sits on an
// achievable-interval endpoint.
double endpoint_tol(const MarketParams& params) { return 1e-9 * (1.0 + params.mu); }

void check_utility(const UtilityModel& u, const SolveOptions& opts) {
    if (!opts.validate_utility)
        return;
    const auto report = validate_assumption1(u);
    if (!report.passed)
        throw std::invalid_argument("utility model rejected: " + report.message);
}

double k_raw(double lambda, const Policy& policy, const MarketParams& params,
             const UtilityModel& u, const SolveOptions& opts) {
    return k_value(lambda, policy, params, u, opts.k_tol).raw();
}

} // namespace

const char* to_string(EquilibriumCase c) {
    switch (c) {
    case EquilibriumCase::IndifferentContinuum: return "indifferent-continuum";
    case EquilibriumCase::PriceAtReward: return "price-at-reward";
    case EquilibriumCase::NonpositiveAtZero: return "nonpositive-at-zero";
    case EquilibriumCase::InteriorRoot: return "interior-root";
    case EquilibriumCase::MarketCapped: return "market-capped";
    case EquilibriumCase::UnstableNoEquilibrium: return "no-equilibrium-unstable";
    }
    return "?";
}

EquilibriumOutcome solve_equilibrium(const Policy& policy, const MarketParams& params,
                                     const UtilityModel& u, const SolveOptions& opts) {
    params.validate();
    policy.validate(params);
    check_utility(u, opts);

    EquilibriumOutcome out;
    out.k_limit = k_limit_at_mu(policy, params, u);

    const double mu_cap = params.mu * (1.0 - kStabilityMargin);

    if (policy.p() == params.R) {
        if (!policy.no_comp() && policy.l() == params.c && policy.d() == 0.0) {
            // Everyone is exactly indifferent; any stable rate up to the
            // market size is an equilibrium.
            out.kind = EquilibriumOutcome::Kind::Continuum;
            out.case_label = EquilibriumCase::IndifferentContinuum;
            out.interval = params.Lambda < params.mu
                               ? AchievableInterval::closed(0.0, params.Lambda)
                               : AchievableInterval::half_open(0.0, params.mu);
            out.k_at_zero = k_raw(0.0, policy, params, u, opts);
            return out;
        }
        out.kind = EquilibriumOutcome::Kind::Unique;
        out.lambda_e = 0.0;
        out.case_label = EquilibriumCase::PriceAtReward;
        out.k_at_zero = k_raw(0.0, policy, params, u, opts);
        return out;
    }

    out.k_at_zero = k_raw(0.0, policy, params, u, opts);
    if (out.k_at_zero <= 0.0) {
        out.kind = EquilibriumOutcome::Kind::Unique;
        out.lambda_e = 0.0;
        out.case_label = EquilibriumCase::NonpositiveAtZero;
        return out;
    }

    if (params.Lambda >= params.mu && out.k_limit >= 0.0) {
        // Joining stays attractive at every stable rate but the market can
        // push the system past capacity: no symmetric equilibrium exists.
        out.kind = EquilibriumOutcome::Kind::None;
        out.case_label = EquilibriumCase::UnstableNoEquilibrium;
        return out;
    }

    const double hi = std::min(params.Lambda, mu_cap);
    const double k_hi = k_raw(hi, policy, params, u, opts);
    if (k_hi >= 0.0) {
        // No sign change below the bracket top: the whole market joins when
        // it fits under capacity; otherwise the case is numerically
        // indistinguishable from the saturated one.
        if (params.Lambda < params.mu) {
            out.kind = EquilibriumOutcome::Kind::Unique;
            out.lambda_e = params.Lambda;
            out.case_label = EquilibriumCase::MarketCapped;
        } else {
            out.kind = EquilibriumOutcome::Kind::None;
            out.case_label = EquilibriumCase::UnstableNoEquilibrium;
        }
        return out;
    }

    const auto f = [&](double lam) { return k_raw(lam, policy, params, u, opts); };
    out.kind = EquilibriumOutcome::Kind::Unique;
    out.lambda_e = bisect_decreasing(f, 0.0, hi, opts.rate_tol);
    out.case_label = EquilibriumCase::InteriorRoot;
    return out;
}

LeadtimeAnswer required_leadtime(double lambda_target, double p, double l,
                                 const MarketParams& params, const UtilityModel& u,
                                 const SolveOptions& opts) {
    params.validate();
    check_utility(u, opts);
    if (!(lambda_target >= 0.0) || lambda_target > params.max_rate())
        throw std::invalid_argument("required_leadtime: target rate out of range");

    const auto interval = achievable_two_fixed(FixedPair::PL, p, l, params, u, opts);
    const double tol = endpoint_tol(params);
    if (!interval.contains(lambda_target, tol))
        throw NotAchievableError(lambda_target, interval,
                                 "target rate not achievable under the fixed (p, l); "
                                 "achievable: " + interval.str());

    if (p == params.R || l == 0.0) {
        // Only the compensation-free rate is reachable (the lead-time has
        // no effect when l = 0, and p = R admits only rate 0).
        return {std::nullopt};
    }
    if (lambda_target <= interval.lo + tol) {
        // Target at the compensation-free rate: the supremum over d is
        // infinite.
        return {std::nullopt};
    }

    const double nu = params.mu - lambda_target;
    const auto f = [&](double d) {
        return k_raw(lambda_target, Policy::quoted(d, p, l), params, u, opts);
    };
    if (f(0.0) <= 0.0)
        return {0.0}; // target at the full-compensation boundary

    double hi = 50.0 / nu;
    while (f(hi) > 0.0) {
        hi *= 2.0;
        if (hi > 1e6 / nu) {
            // No sign change within the practical bracket: the supremum is
            // infinite for this target.
            return {std::nullopt};
        }
    }
    const double d = bisect_decreasing(f, 0.0, hi, 1e-12 * (1.0 + hi));
    return {d};
}

double required_price(double lambda_target, const LeadtimeAnswer& d, double l,
                      const MarketParams& params, const UtilityModel& u,
                      const SolveOptions& opts) {
    params.validate();
    check_utility(u, opts);
    if (!(lambda_target >= 0.0) || lambda_target > params.max_rate())
        throw std::invalid_argument("required_price: target rate out of range");

    const auto policy_at = [&](double p) {
        return d.no_comp() ? Policy::no_compensation(p) : Policy::quoted(*d.d, p, l);
    };

    if (!d.no_comp()) {
        const auto interval = achievable_two_fixed(FixedPair::DL, *d.d, l, params, u, opts);
        if (!interval.contains(lambda_target, endpoint_tol(params)))
            throw NotAchievableError(lambda_target, interval,
                                     "target rate not achievable under the fixed (d, l); "
                                     "achievable: " + interval.str());
    } else {
        const double cap = lambda_cf(0.0, params.c, params, u, opts);
        if (lambda_target > cap + endpoint_tol(params)) {
            const auto interval = AchievableInterval::closed(0.0, cap);
            throw NotAchievableError(lambda_target, interval,
                                     "target rate not achievable without compensation; "
                                     "achievable: " + interval.str());
        }
    }

    if (lambda_target == 0.0)
        return params.R; // nobody joins when the entrance fee equals the reward

    const auto f = [&](double p) { return k_raw(lambda_target, policy_at(p), params, u, opts); };
    if (f(0.0) <= 0.0)
        return 0.0;
    return bisect_decreasing(f, 0.0, params.R, 1e-12 * (1.0 + params.R));
}

double required_compensation(double lambda_target, double d, double p,
                             const MarketParams& params, const UtilityModel& u,
                             const SolveOptions& opts) {
    params.validate();
    check_utility(u, opts);
    if (!(lambda_target >= 0.0) || lambda_target > params.max_rate())
        throw std::invalid_argument("required_compensation: target rate out of range");

    const auto interval = achievable_two_fixed(FixedPair::DP, d, p, params, u, opts);
    const double tol = endpoint_tol(params);
    if (!interval.contains(lambda_target, tol))
        throw NotAchievableError(lambda_target, interval,
                                 "target rate not achievable under the fixed (d, p); "
                                 "achievable: " + interval.str());

    const auto f = [&](double l) {
        return k_raw(lambda_target, Policy::quoted(d, p, l), params, u, opts);
    };
    if (f(0.0) >= 0.0)
        return 0.0; // compensation-free rate already meets the target
    return bisect_increasing(f, 0.0, params.c, 1e-12 * (1.0 + params.c));
}

} // namespace qlead
