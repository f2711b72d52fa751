#include "qlead/loadcontrol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "qlead/model.hpp"
#include "qlead/roots.hpp"

namespace qlead {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_utility_once(const UtilityModel& u, SolveOptions& opts) {
    if (!opts.validate_utility)
        return;
    const auto report = validate_assumption1(u);
    if (!report.passed)
        throw std::invalid_argument("utility model rejected: " + report.message);
    opts.validate_utility = false;
}

// Where a compensation-free equilibrium search ended up.
struct CfRate {
    double rate;
    bool at_mu;      // K_CF still nonnegative at the stability margin
    bool at_market;  // capped by the market size Lambda < mu
};

CfRate lambda_cf_detail(double p, double cost_rate, const MarketParams& params,
                        const UtilityModel& u, const SolveOptions& opts) {
    const double mu_cap = params.mu * (1.0 - kStabilityMargin);
    if (cost_rate == 0.0) {
        // Waiting is free: everyone joins whenever the surplus is positive.
        if (u(params.R - p) - u(0.0) <= 0.0)
            return {0.0, false, false};
        return params.Lambda < params.mu ? CfRate{params.Lambda, false, true}
                                         : CfRate{mu_cap, true, false};
    }
    const auto f = [&](double lam) {
        return k_cf(lam, p, cost_rate, params, u, opts.k_tol).raw();
    };
    if (f(0.0) <= 0.0)
        return {0.0, false, false};
    const double hi = std::min(params.Lambda, mu_cap);
    const double k_hi = f(hi);
    if (k_hi >= 0.0) {
        if (params.Lambda < params.mu)
            return {params.Lambda, false, true};
        return {mu_cap, true, false};
    }
    return {bisect_decreasing(f, 0.0, hi, opts.rate_tol), false, false};
}

// Upper endpoint of an achievable range determined by the sign of
// K(lambda, policy(lambda)) for a policy family decreasing in lambda.
struct UpperEndpoint {
    double hi;
    bool hi_closed;
};

UpperEndpoint upper_from_k(const std::function<double(double)>& k, const Policy& limit_policy,
                           const MarketParams& params, const UtilityModel& u,
                           const SolveOptions& opts) {
    const double mu_cap = params.mu * (1.0 - kStabilityMargin);
    const double hi = std::min(params.Lambda, mu_cap);
    if (params.Lambda < params.mu) {
        if (k(hi) >= 0.0)
            return {params.Lambda, true};
    } else if (k_limit_at_mu(limit_policy, params, u) >= 0.0 || k(mu_cap) >= 0.0) {
        // Open at the stability boundary: every stable rate is reachable.
        return {params.mu, false};
    }
    return {bisect_decreasing(k, 0.0, hi, opts.rate_tol), true};
}

double curve_profit(FixedOne fixed, double fixed_value, double lambda, double swept,
                    const MarketParams& params, const UtilityModel& u,
                    const SolveOptions& opts, double* other = nullptr) {
    switch (fixed) {
    case FixedOne::P: {
        const auto lt = required_leadtime(lambda, fixed_value, swept, params, u, opts);
        if (other)
            *other = lt.no_comp() ? kInf : *lt.d;
        const auto pol = lt.no_comp() ? Policy::no_compensation(fixed_value)
                                      : Policy::quoted(*lt.d, fixed_value, swept);
        return profit_g1(lambda, pol, params);
    }
    case FixedOne::L: {
        const double p = required_price(lambda, LeadtimeAnswer{swept}, fixed_value, params, u,
                                        opts);
        if (other)
            *other = p;
        return profit_g1(lambda, Policy::quoted(swept, p, fixed_value), params);
    }
    case FixedOne::D: {
        const double p =
            required_price(lambda, LeadtimeAnswer{fixed_value}, swept, params, u, opts);
        if (other)
            *other = p;
        return profit_g1(lambda, Policy::quoted(fixed_value, p, swept), params);
    }
    }
    throw std::logic_error("curve_profit: bad fixed kind");
}

} // namespace

std::string AchievableInterval::str() const {
    if (empty)
        return "(empty)";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%c%.10g, %.10g%c", lo_closed ? '[' : '(', lo, hi,
                  hi_closed ? ']' : ')');
    return buf;
}

double lambda_cf(double p, double cost_rate, const MarketParams& params, const UtilityModel& u,
                 const SolveOptions& opts) {
    params.validate();
    if (!(p <= params.R))
        throw std::invalid_argument("lambda_cf: p must not exceed R");
    if (!(cost_rate >= 0.0))
        throw std::invalid_argument("lambda_cf: negative cost rate");
    return lambda_cf_detail(p, cost_rate, params, u, opts).rate;
}

std::optional<double> cf_price(double lambda, double cost_rate, const MarketParams& params,
                               const UtilityModel& u, const SolveOptions& opts) {
    params.validate();
    if (lambda > params.max_rate())
        return std::nullopt;
    const auto f = [&](double p) {
        return k_cf(lambda, p, cost_rate, params, u, opts.k_tol).raw();
    };
    if (lambda == 0.0)
        return params.R;
    if (f(0.0) < 0.0)
        return std::nullopt; // not reachable even with free entrance
    return bisect_decreasing(f, 0.0, params.R, 1e-12 * (1.0 + params.R));
}

AchievableInterval achievable_two_fixed(FixedPair which, double a, double b,
                                        const MarketParams& params, const UtilityModel& u,
                                        const SolveOptions& opts) {
    params.validate();

    switch (which) {
    case FixedPair::PL: {
        const double p = a, l = b;
        if (!(p <= params.R) || !(l >= 0.0) || !(l <= params.c))
            throw std::invalid_argument("achievable_two_fixed: invalid (p, l)");
        if (p == params.R)
            return AchievableInterval::singleton(0.0);
        const auto lo = lambda_cf_detail(p, params.c, params, u, opts);
        if (l == params.c) {
            if (params.Lambda < params.mu)
                return AchievableInterval::closed(lo.rate, params.Lambda);
            return AchievableInterval::half_open(lo.rate, params.mu);
        }
        const auto hi = lambda_cf_detail(p, params.c - l, params, u, opts);
        return AchievableInterval{lo.rate, hi.at_mu ? params.mu : hi.rate, true, !hi.at_mu,
                                  false};
    }
    case FixedPair::DL: {
        const double d = a, l = b;
        if (!(d >= 0.0) || !(l >= 0.0) || !(l <= params.c))
            throw std::invalid_argument("achievable_two_fixed: invalid (d, l)");
        if (d == 0.0 && l == params.c) {
            // Full compensation from the first moment: free entrance makes
            // everyone join; only the whole market can be induced.
            if (params.Lambda < params.mu)
                return AchievableInterval::singleton(params.Lambda);
            return AchievableInterval::none();
        }
        const auto k = [&](double lam) {
            return k_value(lam, Policy::quoted(d, 0.0, l), params, u, opts.k_tol).raw();
        };
        if (k(0.0) <= 0.0)
            return AchievableInterval::singleton(0.0);
        const auto up = upper_from_k(k, Policy::quoted(d, 0.0, l), params, u, opts);
        return AchievableInterval{0.0, up.hi, true, up.hi_closed, false};
    }
    case FixedPair::DP: {
        const double d = a, p = b;
        if (!(d >= 0.0) || !(p <= params.R))
            throw std::invalid_argument("achievable_two_fixed: invalid (d, p)");
        if (p == params.R)
            return AchievableInterval::singleton(0.0);
        const auto lo = lambda_cf_detail(p, params.c, params, u, opts);
        const auto k = [&](double lam) {
            return k_value(lam, Policy::quoted(d, p, params.c), params, u, opts.k_tol).raw();
        };
        const auto up = upper_from_k(k, Policy::quoted(d, p, params.c), params, u, opts);
        return AchievableInterval{lo.rate, up.hi, true, up.hi_closed, false};
    }
    }
    throw std::logic_error("achievable_two_fixed: bad kind");
}

AchievableInterval achievable_one_fixed(FixedOne which, double value, const MarketParams& params,
                                        const UtilityModel& u, const SolveOptions& opts) {
    params.validate();
    const double market_hi = params.Lambda < params.mu ? params.Lambda : params.mu;
    const bool market_closed = params.Lambda < params.mu;

    switch (which) {
    case FixedOne::P: {
        if (!(value <= params.R))
            throw std::invalid_argument("achievable_one_fixed: p must not exceed R");
        if (value == params.R)
            return AchievableInterval::singleton(0.0);
        const auto lo = lambda_cf_detail(value, params.c, params, u, opts);
        if (lo.at_market || lo.rate >= market_hi)
            return AchievableInterval::singleton(lo.rate);
        return AchievableInterval{lo.rate, market_hi, true, market_closed, false};
    }
    case FixedOne::L: {
        if (!(value >= 0.0) || !(value <= params.c))
            throw std::invalid_argument("achievable_one_fixed: l out of [0, c]");
        if (value == params.c)
            return AchievableInterval{0.0, market_hi, true, market_closed, false};
        // Best case for customers: free entrance, compensation from the
        // first moment; worst case: fee R (rate 0 is always reachable).
        const auto hi = lambda_cf_detail(0.0, params.c - value, params, u, opts);
        return AchievableInterval{0.0, hi.at_mu ? params.mu : hi.rate, true, !hi.at_mu, false};
    }
    case FixedOne::D: {
        if (!(value >= 0.0))
            throw std::invalid_argument("achievable_one_fixed: negative lead-time");
        if (value == 0.0)
            return AchievableInterval{0.0, market_hi, true, market_closed, false};
        const auto k = [&](double lam) {
            return k_value(lam, Policy::quoted(value, 0.0, params.c), params, u, opts.k_tol)
                .raw();
        };
        if (k(0.0) <= 0.0)
            return AchievableInterval::singleton(0.0);
        const auto up = upper_from_k(k, Policy::quoted(value, 0.0, params.c), params, u, opts);
        return AchievableInterval{0.0, up.hi, true, up.hi_closed, false};
    }
    }
    throw std::logic_error("achievable_one_fixed: bad kind");
}

double profit_g1(double lambda, const Policy& policy, const MarketParams& params) {
    policy.validate(params);
    if (lambda == 0.0)
        return 0.0;
    if (policy.no_comp())
        return lambda * policy.p();
    const double lateness = expected_lateness(lambda, policy.d(), params);
    return lambda * (policy.p() - policy.l() * lateness);
}

PricingCurve trace_pricing_curve(FixedOne fixed, double fixed_value, double lambda_target,
                                 std::size_t grid_size, const MarketParams& params,
                                 const UtilityModel& u, const SolveOptions& opts_in) {
    if (grid_size < 2)
        throw std::invalid_argument("trace_pricing_curve: grid_size must be at least 2");
    SolveOptions opts = opts_in;
    check_utility_once(u, opts);
    const auto feasible = achievable_one_fixed(fixed, fixed_value, params, u, opts);
    if (!feasible.contains(lambda_target, 1e-9 * (1.0 + params.mu)))
        throw NotAchievableError(lambda_target, feasible,
                                 "target rate outside the one-fixed achievable interval");

    PricingCurve curve;
    curve.fixed = fixed;
    curve.fixed_value = fixed_value;
    curve.target_lambda = lambda_target;

    // Feasible range of the swept parameter.
    double sweep_lo = 0.0, sweep_hi = 0.0;
    const double nu = params.mu - lambda_target;
    switch (fixed) {
    case FixedOne::P: {
        // Sweep l; the smallest feasible l solves K(lambda, 0, p, l) = 0.
        const auto k_at = [&](double l) {
            return k_value(lambda_target, Policy::quoted(0.0, fixed_value, l), params, u,
                           opts.k_tol)
                .raw();
        };
        sweep_lo = k_at(0.0) >= 0.0
                       ? 0.0
                       : bisect_increasing(k_at, 0.0, params.c, 1e-12 * (1.0 + params.c));
        sweep_hi = params.c;
        break;
    }
    case FixedOne::L: {
        // Sweep d from 0 up to where the fee hits 0, or a display cap when
        // the fee stays positive for every lead-time.
        const auto k_at = [&](double d) {
            return k_value(lambda_target, Policy::quoted(d, 0.0, fixed_value), params, u,
                           opts.k_tol)
                .raw();
        };
        sweep_lo = 0.0;
        const double cap = 50.0 / nu;
        if (k_cf(lambda_target, 0.0, params.c, params, u, opts.k_tol).raw() >= 0.0) {
            sweep_hi = cap;
        } else {
            double hi = cap;
            while (k_at(hi) > 0.0 && hi <= 1e6 / nu)
                hi *= 2.0;
            sweep_hi = bisect_decreasing(k_at, 0.0, hi, 1e-12 * (1.0 + hi));
        }
        break;
    }
    case FixedOne::D: {
        // Sweep l; the smallest feasible l solves K(lambda, d, 0, l) = 0.
        const auto k_at = [&](double l) {
            return k_value(lambda_target, Policy::quoted(fixed_value, 0.0, l), params, u,
                           opts.k_tol)
                .raw();
        };
        sweep_lo = k_at(0.0) >= 0.0
                       ? 0.0
                       : bisect_increasing(k_at, 0.0, params.c, 1e-12 * (1.0 + params.c));
        sweep_hi = params.c;
        break;
    }
    }

    curve.points.reserve(grid_size);
    const double step = (sweep_hi - sweep_lo) / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i) {
        // Endpoints are exact: the maximizer claims are about the boundary
        // values themselves (l = c, d = 0).
        const double swept =
            i + 1 == grid_size ? sweep_hi : sweep_lo + step * static_cast<double>(i);
        double other = 0.0;
        const double g =
            curve_profit(fixed, fixed_value, lambda_target, swept, params, u, opts, &other);
        // free1/free2 convention: P -> (d, l); L -> (d, p); D -> (l, p).
        if (fixed == FixedOne::P)
            curve.points.push_back({other, swept, g});
        else if (fixed == FixedOne::L)
            curve.points.push_back({swept, other, g});
        else
            curve.points.push_back({swept, other, g});
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].profit > curve.points[best].profit)
            best = i;
    curve.maximizer = best;
    curve.refined_max = curve.points[best];

    // Golden-section refinement on the bracketing subinterval; the grid
    // argmax wins when refinement does not beat it (unimodality along the
    // curve is observed, not proven).
    const double swept_best = sweep_lo + step * static_cast<double>(best);
    const double ref_lo = std::max(sweep_lo, swept_best - step);
    const double ref_hi = std::min(sweep_hi, swept_best + step);
    if (ref_hi > ref_lo) {
        const auto profit_at = [&](double swept) {
            return curve_profit(fixed, fixed_value, lambda_target, swept, params, u, opts);
        };
        const double s = golden_section_max(profit_at, ref_lo, ref_hi,
                                            1e-10 * (1.0 + ref_hi - ref_lo));
        double other = 0.0;
        const double g =
            curve_profit(fixed, fixed_value, lambda_target, s, params, u, opts, &other);
        if (g > curve.refined_max.profit) {
            if (fixed == FixedOne::P)
                curve.refined_max = {other, s, g};
            else
                curve.refined_max = {s, other, g};
        }
    }
    return curve;
}

double h_envelope(double lambda, const MarketParams& params) {
    const double nu = sojourn_rate(lambda, params);
    return lambda * (params.R - params.c / nu);
}

double lambda_star(const MarketParams& params) {
    params.validate();
    const double root = params.mu - std::sqrt(params.c * params.mu / params.R);
    return std::min(std::max(root, 0.0), params.Lambda);
}

EpsOptimalResult eps_optimal_policy(double epsilon, const MarketParams& params,
                                    const UtilityModel& u, const SolveOptions& opts_in) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("eps_optimal_policy: epsilon must be positive");
    params.validate();
    SolveOptions opts = opts_in;
    check_utility_once(u, opts);

    EpsOptimalResult res;
    res.lambda_target = lambda_star(params);
    res.h_star = h_envelope(res.lambda_target, params);

    // Full compensation with a fee close to the reward approaches the
    // risk-neutral envelope; shrink the discount until within epsilon.
    const double p_cf = cf_price(res.lambda_target, params.c, params, u, opts).value_or(0.0);
    double delta = 0.5 * (params.R - p_cf);
    const double delta_floor = 1e-14 * params.R;

    double best_profit = -kInf;
    Policy best_policy = Policy::no_compensation(0.0);
    double best_delta = delta;
    while (true) {
        const double p = params.R - delta;
        const auto lt = required_leadtime(res.lambda_target, p, params.c, params, u, opts);
        const Policy pol = lt.no_comp() ? Policy::no_compensation(p)
                                        : Policy::quoted(*lt.d, p, params.c);
        const double g = profit_g1(res.lambda_target, pol, params);
        if (g > best_profit) {
            best_profit = g;
            best_policy = pol;
            best_delta = delta;
        }
        if (best_profit >= res.h_star - epsilon) {
            res.reached = true;
            break;
        }
        delta *= 0.5;
        if (delta < delta_floor) {
            res.warning = "discount bracket exhausted before reaching the requested gap";
            break;
        }
    }
    res.policy = best_policy;
    res.profit = best_profit;
    res.delta = best_delta;
    return res;
}

ProfitConstraint ProfitConstraint::one_fixed(FixedOne w, double v) {
    ProfitConstraint c;
    c.kind = Kind::OneFixed;
    c.one = w;
    c.a = v;
    return c;
}

ProfitConstraint ProfitConstraint::two_fixed(FixedPair w, double a, double b) {
    ProfitConstraint c;
    c.kind = Kind::TwoFixed;
    c.two = w;
    c.a = a;
    c.b = b;
    return c;
}

std::vector<ProfitPoint> optimal_profit_constrained(const ProfitConstraint& constraint,
                                                    std::span<const double> lambda_grid,
                                                    const MarketParams& params,
                                                    const UtilityModel& u,
                                                    const SolveOptions& opts_in) {
    SolveOptions opts = opts_in;
    check_utility_once(u, opts);
    std::vector<ProfitPoint> table;
    table.reserve(lambda_grid.size());

    for (const double lam : lambda_grid) {
        std::optional<double> g;
        try {
            switch (constraint.kind) {
            case ProfitConstraint::Kind::None: {
                // Compensation-free reference: the fee is the only control.
                const auto p = cf_price(lam, params.c, params, u, opts);
                if (p)
                    g = lam * *p;
                break;
            }
            case ProfitConstraint::Kind::OneFixed: {
                const auto curve = trace_pricing_curve(constraint.one, constraint.a, lam, 64,
                                                       params, u, opts);
                g = curve.best_profit();
                break;
            }
            case ProfitConstraint::Kind::TwoFixed: {
                switch (constraint.two) {
                case FixedPair::PL: {
                    const auto lt =
                        required_leadtime(lam, constraint.a, constraint.b, params, u, opts);
                    const auto pol = lt.no_comp()
                                         ? Policy::no_compensation(constraint.a)
                                         : Policy::quoted(*lt.d, constraint.a, constraint.b);
                    g = profit_g1(lam, pol, params);
                    break;
                }
                case FixedPair::DL: {
                    const double p = required_price(lam, LeadtimeAnswer{constraint.a},
                                                    constraint.b, params, u, opts);
                    g = profit_g1(lam, Policy::quoted(constraint.a, p, constraint.b), params);
                    break;
                }
                case FixedPair::DP: {
                    const double l = required_compensation(lam, constraint.a, constraint.b,
                                                           params, u, opts);
                    g = profit_g1(lam, Policy::quoted(constraint.a, constraint.b, l), params);
                    break;
                }
                }
                break;
            }
            }
        } catch (const NotAchievableError&) {
            g.reset();
        }
        table.push_back({lam, g});
    }
    return table;
}

} // namespace qlead
