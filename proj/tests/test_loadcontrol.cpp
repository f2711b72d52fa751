#include "doctest.h"

#include <cmath>

#include "qlead/loadcontrol.hpp"
#include "qlead/sim.hpp" // SplitMix64 for deterministic sampling
#include "test_support.hpp"

using namespace qlead;

TEST_CASE("compensation-free equilibrium rates") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();
    CHECK(lambda_cf(10.0, 8.0, params, u) == doctest::Approx(qt::kCfRateP10).epsilon(1e-9));
    CHECK(lambda_cf(0.0, 8.0, params, u) == doctest::Approx(qt::kCfRateP0).epsilon(1e-9));
    CHECK(lambda_cf(15.0, 8.0, params, u) == 0.0);
    // CARA closed form for the interior root.
    const double r = 0.5;
    for (const double p : {2.0, 6.0, 10.0, 13.0}) {
        const double closed = 12.0 - r * 8.0 / -std::expm1(-r * (15.0 - p));
        CHECK(lambda_cf(p, 8.0, params, u) == doctest::Approx(closed).epsilon(1e-9));
    }
    // Market cap binds.
    CHECK(lambda_cf(10.0, 8.0, qt::base_params(5.0), u) == 5.0);
    // Free waiting: everyone joins up to stability (or the market size).
    CHECK(lambda_cf(10.0, 0.0, params, u) ==
          doctest::Approx(12.0 * (1.0 - qlead::kStabilityMargin)));
    CHECK(lambda_cf(10.0, 0.0, qt::base_params(5.0), u) == 5.0);
    CHECK(lambda_cf(15.0, 0.0, params, u) == 0.0);
}

TEST_CASE("two-fixed endpoints re-solve through the equilibrium at random policies") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();
    qlead::SplitMix64 rng(424242ULL);
    int done = 0;
    while (done < 12) {
        const double p = 14.0 * rng.next_unit();
        const double l = 7.5 * rng.next_unit();
        const auto iv = achievable_two_fixed(FixedPair::PL, p, l, params, u);
        if (iv.is_singleton())
            continue;
        const auto lo_out = solve_equilibrium(Policy::no_compensation(p), params, u);
        REQUIRE(lo_out.unique());
        CHECK(lo_out.lambda_e == doctest::Approx(iv.lo).epsilon(1e-7));
        const auto hi_out = solve_equilibrium(Policy::quoted(0.0, p, l), params, u);
        REQUIRE(hi_out.unique());
        CHECK(hi_out.lambda_e == doctest::Approx(iv.hi).epsilon(1e-7));
        ++done;
    }
}

TEST_CASE("compensation-free price inverts the rate") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();
    CHECK(cf_price(qt::kCfRateP10, 8.0, params, u).value() ==
          doctest::Approx(10.0).epsilon(1e-8));
    CHECK(cf_price(0.0, 8.0, params, u).value() == 15.0);
    CHECK_FALSE(cf_price(9.0, 8.0, params, u).has_value()); // above the zero-fee rate
}

TEST_CASE("achievable ranges with two fixed parameters") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();

    SUBCASE("fee at the reward pins the rate to zero") {
        const auto iv = achievable_two_fixed(FixedPair::PL, 15.0, 4.5, params, u);
        CHECK(iv.is_singleton());
        CHECK(iv.lo == 0.0);
    }
    SUBCASE("immediate full compensation pins the rate to the market") {
        const auto small = achievable_two_fixed(FixedPair::DL, 0.0, 8.0, qt::base_params(9.0), u);
        CHECK(small.is_singleton());
        CHECK(small.lo == 9.0);
        const auto big = achievable_two_fixed(FixedPair::DL, 0.0, 8.0, params, u);
        CHECK(big.empty);
    }
    SUBCASE("fixed fee and partial compensation") {
        const auto iv = achievable_two_fixed(FixedPair::PL, 10.0, 4.5, params, u);
        CHECK(iv.lo == doctest::Approx(qt::kCfRateP10).epsilon(1e-8));
        CHECK(iv.hi == doctest::Approx(qt::kCfRateP10Cost35).epsilon(1e-8));
        CHECK(iv.lo_closed);
        CHECK(iv.hi_closed);
        // Endpoints re-solve through the equilibrium at the extreme lead-times.
        const auto lo_out = solve_equilibrium(Policy::no_compensation(10.0), params, u);
        CHECK(lo_out.lambda_e == doctest::Approx(iv.lo).epsilon(1e-8));
        const auto hi_out = solve_equilibrium(Policy::quoted(0.0, 10.0, 4.5), params, u);
        CHECK(hi_out.lambda_e == doctest::Approx(iv.hi).epsilon(1e-8));
    }
    SUBCASE("fixed fee with full compensation reaches the stability boundary") {
        const auto iv = achievable_two_fixed(FixedPair::PL, 10.0, 8.0, params, u);
        CHECK(iv.lo == doctest::Approx(qt::kCfRateP10).epsilon(1e-8));
        CHECK(iv.hi == 12.0);
        CHECK_FALSE(iv.hi_closed);
    }
    SUBCASE("fixed lead-time and compensation") {
        const auto iv = achievable_two_fixed(FixedPair::DL, 0.5, 4.5, params, u);
        CHECK(iv.lo == 0.0);
        CHECK(iv.hi < 12.0);
        // The top solves K(lambda, d, 0, l) = 0.
        CHECK(std::abs(k_value(iv.hi, Policy::quoted(0.5, 0.0, 4.5), params, u).raw()) < 1e-7);
    }
    SUBCASE("fixed lead-time and fee") {
        const auto iv = achievable_two_fixed(FixedPair::DP, 0.5, 10.0, params, u);
        CHECK(iv.lo == doctest::Approx(qt::kCfRateP10).epsilon(1e-8));
        CHECK(iv.hi == 12.0); // full compensation keeps every stable rate reachable
        CHECK_FALSE(iv.hi_closed);
    }
}

TEST_CASE("achievable ranges with one fixed parameter") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();

    SUBCASE("fixed fee") {
        const auto iv = achievable_one_fixed(FixedOne::P, 10.0, params, u);
        CHECK(iv.lo == doctest::Approx(7.64).epsilon(0.002));
        CHECK(iv.hi == 12.0);
        CHECK(iv.lo_closed);
        CHECK_FALSE(iv.hi_closed);
    }
    SUBCASE("fixed compensation rate") {
        const auto iv = achievable_one_fixed(FixedOne::L, 4.5, params, u);
        CHECK(iv.lo == 0.0);
        CHECK(iv.hi == doctest::Approx(qt::kCfRateP0Cost35).epsilon(1e-8));
        CHECK(iv.hi_closed);
    }
    SUBCASE("fixed lead-time") {
        const auto iv = achievable_one_fixed(FixedOne::D, 0.5, params, u);
        CHECK(iv.lo == 0.0);
        CHECK(iv.hi == 12.0);
        CHECK_FALSE(iv.hi_closed);
    }
    SUBCASE("degenerate fixed values") {
        CHECK(achievable_one_fixed(FixedOne::P, 15.0, params, u).is_singleton());
        const auto l_full = achievable_one_fixed(FixedOne::L, 8.0, params, u);
        CHECK(l_full.hi == 12.0);
        const auto d_zero = achievable_one_fixed(FixedOne::D, 0.0, params, u);
        CHECK(d_zero.hi == 12.0);
        // Small market closes the top.
        const auto small = achievable_one_fixed(FixedOne::D, 0.5, qt::base_params(9.0), u);
        CHECK(small.hi == 9.0);
        CHECK(small.hi_closed);
    }
}

TEST_CASE("one-fixed range is the union of the two-fixed ranges") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();
    const auto one = achievable_one_fixed(FixedOne::P, 10.0, params, u);
    double lo = 1e300, hi = -1e300;
    bool hi_open = false;
    for (int i = 0; i <= 16; ++i) {
        const double l = 8.0 * i / 16.0;
        const auto iv = achievable_two_fixed(FixedPair::PL, 10.0, l, params, u);
        lo = std::min(lo, iv.lo);
        if (iv.hi > hi) {
            hi = iv.hi;
            hi_open = !iv.hi_closed;
        }
    }
    CHECK(lo == doctest::Approx(one.lo).epsilon(1e-6));
    CHECK(hi == doctest::Approx(one.hi).epsilon(1e-6));
    CHECK(hi_open == !one.hi_closed);
}

TEST_CASE("profit under a policy and input rate") {
    const auto params = qt::base_params();
    CHECK(profit_g1(8.0, Policy::no_compensation(10.0), params) == doctest::Approx(80.0));
    CHECK(profit_g1(8.0, qt::base_policy(), params) ==
          doctest::Approx(qt::kProfitBaseAt8).epsilon(1e-12));
    CHECK(profit_g1(0.0, qt::base_policy(), params) == 0.0);
}

TEST_CASE("risk-neutral envelope and its maximizer") {
    const auto params = qt::base_params();
    CHECK(h_envelope(0.0, params) == 0.0);
    CHECK(h_envelope(11.0, params) == doctest::Approx(77.0));
    CHECK(lambda_star(params) == doctest::Approx(qt::kLambdaStar).epsilon(1e-12));
    CHECK(h_envelope(lambda_star(params), params) == doctest::Approx(qt::kHStar).epsilon(1e-12));
    CHECK(lambda_star(qt::base_params(5.0)) == 5.0);
    // Vanishing waiting cost pushes the maximizer to the capacity.
    const MarketParams cheap{40.0, 12.0, 15.0, 1e-9};
    CHECK(lambda_star(cheap) == doctest::Approx(12.0).epsilon(1e-4));
    // Prohibitive waiting cost floors it at zero.
    const MarketParams dear{40.0, 12.0, 1.0, 200.0};
    CHECK(lambda_star(dear) == 0.0);
}

TEST_CASE("pricing curves: shape, feasibility and maximizers") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();

    SUBCASE("fixed fee: lead-time/compensation curve") {
        const auto curve = trace_pricing_curve(FixedOne::P, 10.0, 9.0, 60, params, u);
        REQUIRE(curve.points.size() == 60);
        // Increasing: larger lead-times need larger compensation.
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            CHECK(curve.points[i].free1 >= curve.points[i - 1].free1 - 1e-9);
            CHECK(curve.points[i].free2 >= curve.points[i - 1].free2);
        }
        // Maximizer at full compensation.
        CHECK(curve.maximizer == curve.points.size() - 1);
        CHECK(curve.points[curve.maximizer].free2 == 8.0);
        // Feasibility: traced points re-solve to the target.
        for (const std::size_t i : {std::size_t{0}, std::size_t{30}, std::size_t{59}}) {
            const auto& pt = curve.points[i];
            const Policy pol = std::isinf(pt.free1) ? Policy::no_compensation(10.0)
                                                    : Policy::quoted(pt.free1, 10.0, pt.free2);
            const auto out = solve_equilibrium(pol, params, u);
            REQUIRE(out.unique());
            CHECK(std::abs(out.lambda_e - 9.0) <= 1e-6);
        }
    }
    SUBCASE("fixed compensation: fee/lead-time curve") {
        const auto curve = trace_pricing_curve(FixedOne::L, 4.5, 9.0, 60, params, u);
        // Decreasing: longer lead-times force lower fees.
        for (std::size_t i = 1; i < curve.points.size(); ++i)
            CHECK(curve.points[i].free2 <= curve.points[i - 1].free2 + 1e-9);
        CHECK(curve.maximizer == 0); // best at d = 0
        CHECK(curve.points[0].free1 == 0.0);
        // High target: the fee hits zero at the last traced lead-time.
        CHECK(curve.points.back().free2 == doctest::Approx(0.0).epsilon(1e-5));
    }
    SUBCASE("fixed lead-time: fee/compensation curve") {
        const auto curve = trace_pricing_curve(FixedOne::D, 0.5, 9.0, 60, params, u);
        // Increasing: more compensation supports a higher fee.
        for (std::size_t i = 1; i < curve.points.size(); ++i)
            CHECK(curve.points[i].free2 >= curve.points[i - 1].free2 - 1e-9);
        CHECK(curve.maximizer == curve.points.size() - 1);
        CHECK(curve.points[curve.maximizer].free1 == 8.0);
    }
    SUBCASE("profit stays strictly below the envelope") {
        for (const auto fixed : {FixedOne::P, FixedOne::L, FixedOne::D}) {
            const double v = fixed == FixedOne::P ? 10.0 : fixed == FixedOne::L ? 4.5 : 0.5;
            const auto curve = trace_pricing_curve(fixed, v, 9.0, 40, params, u);
            const double h = h_envelope(9.0, params);
            for (const auto& pt : curve.points)
                CHECK(pt.profit < h);
            CHECK(curve.best_profit() < h);
        }
    }
    SUBCASE("low target with fixed compensation keeps a positive fee throughout") {
        const auto curve = trace_pricing_curve(FixedOne::L, 4.5, 5.0, 40, params, u);
        for (const auto& pt : curve.points)
            CHECK(pt.free2 > 0.0);
    }
    SUBCASE("traced points re-solve to the target for every fixed kind") {
        const auto check_roundtrip = [&](FixedOne fixed, double v, double target) {
            const auto curve = trace_pricing_curve(fixed, v, target, 30, params, u);
            for (const std::size_t i : {std::size_t{0}, std::size_t{15}, std::size_t{29}}) {
                const auto& pt = curve.points[i];
                Policy pol = Policy::no_compensation(0.0);
                if (fixed == FixedOne::P)
                    pol = std::isinf(pt.free1) ? Policy::no_compensation(v)
                                               : Policy::quoted(pt.free1, v, pt.free2);
                else if (fixed == FixedOne::L)
                    pol = Policy::quoted(pt.free1, pt.free2, v);
                else
                    pol = Policy::quoted(v, pt.free2, pt.free1);
                const auto out = solve_equilibrium(pol, params, u);
                REQUIRE(out.unique());
                CHECK(std::abs(out.lambda_e - target) <= 1e-6);
            }
        };
        check_roundtrip(FixedOne::P, 10.0, 8.7);
        check_roundtrip(FixedOne::L, 4.5, 8.7);
        check_roundtrip(FixedOne::D, 0.5, 8.7);
    }
    SUBCASE("unreachable target") {
        CHECK_THROWS_AS(trace_pricing_curve(FixedOne::P, 10.0, 5.0, 40, params, u),
                        NotAchievableError);
    }
}

TEST_CASE("epsilon-optimal policies") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();

    SUBCASE("modest gap") {
        const auto res = eps_optimal_policy(0.1, params, u);
        CHECK(res.reached);
        CHECK(res.h_star == doctest::Approx(qt::kHStar).epsilon(1e-12));
        CHECK(res.profit >= res.h_star - 0.1);
        CHECK(res.profit < res.h_star);
        REQUIRE_FALSE(res.policy.no_comp());
        CHECK(res.policy.l() == 8.0);
        CHECK(res.policy.p() > 10.0);
        CHECK(res.policy.p() < 15.0);
        const auto out = solve_equilibrium(res.policy, params, u);
        REQUIRE(out.unique());
        CHECK(std::abs(out.lambda_e - qt::kLambdaStar) <= 1e-6);
    }
    SUBCASE("vacuous gap accepts the first candidate") {
        const auto res = eps_optimal_policy(200.0, params, u);
        CHECK(res.reached);
        CHECK(res.delta == doctest::Approx(0.5 * (15.0 - cf_price(qt::kLambdaStar, 8.0, params,
                                                                  u)
                                                             .value_or(0.0))));
    }
    SUBCASE("risk-neutral customers close the gap immediately") {
        const auto res = eps_optimal_policy(1e-9, params, UtilityModel::linear());
        CHECK(res.reached);
        CHECK(res.profit == doctest::Approx(qt::kHStar).epsilon(1e-10));
    }
    SUBCASE("profit improves monotonically as the discount shrinks") {
        double prev = -1e300;
        for (double delta = 4.0; delta > 1e-4; delta *= 0.5) {
            const auto lt = required_leadtime(qt::kLambdaStar, 15.0 - delta, 8.0, params, u);
            REQUIRE_FALSE(lt.no_comp());
            const double g =
                profit_g1(qt::kLambdaStar, Policy::quoted(*lt.d, 15.0 - delta, 8.0), params);
            CHECK(g >= prev - 1e-9); // within root tolerance once near the cap
            prev = std::max(prev, g);
        }
    }
    SUBCASE("impossibly small gap degrades gracefully") {
        const auto res = eps_optimal_policy(1e-13, params, u);
        CHECK(res.profit >= res.h_star - 1e-6);
        CHECK((res.reached || !res.warning.empty()));
    }
}

TEST_CASE("constrained profit tables") {
    const auto params = qt::base_params();
    const auto u = qt::base_utility();

    std::vector<double> grid;
    for (int i = 0; i < 120; ++i)
        grid.push_back(12.0 * (1.0 - qlead::kStabilityMargin) * i / 119.0);

    const auto cf = optimal_profit_constrained(ProfitConstraint::none(), grid, params, u);
    const auto fp = optimal_profit_constrained(
        ProfitConstraint::one_fixed(FixedOne::P, 10.0), grid, params, u);
    const auto fl = optimal_profit_constrained(
        ProfitConstraint::one_fixed(FixedOne::L, 4.5), grid, params, u);
    const auto fd = optimal_profit_constrained(
        ProfitConstraint::one_fixed(FixedOne::D, 0.5), grid, params, u);

    SUBCASE("compensation-free peak matches the frozen value") {
        double peak = 0.0;
        for (const auto& row : cf)
            if (row.g)
                peak = std::max(peak, *row.g);
        CHECK(peak == doctest::Approx(qt::kCfPeakProfit).epsilon(2e-4));
        CHECK(peak <= qt::kCfPeakProfit + 1e-9);
    }
    SUBCASE("domain markers") {
        // The compensation-free curve is empty above the zero-fee rate.
        for (const auto& row : cf)
            if (row.lambda > qt::kCfRateP0 + 1e-6)
                CHECK_FALSE(row.g.has_value());
        // The fixed-fee curve starts at the compensation-free rate.
        for (const auto& row : fp) {
            if (row.lambda < qt::kCfRateP10 - 1e-6)
                CHECK_FALSE(row.g.has_value());
            else
                CHECK(row.g.has_value());
        }
    }
    SUBCASE("the fixed-lead-time curve dominates the reference curve") {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!cf[i].g || !fd[i].g)
                continue;
            CHECK(*fd[i].g >= *cf[i].g - 1e-7);
            CHECK(*fd[i].g < h_envelope(grid[i], params) + 1e-12);
        }
    }
    SUBCASE("every constrained profit sits below the envelope") {
        // Beyond ~11.9 both sides blow up toward -inf and the strict gap
        // falls under double resolution, so cap the check there.
        for (const auto* table : {&fp, &fl, &fd}) {
            for (const auto& row : *table) {
                if (!row.g || row.lambda == 0.0 || row.lambda > 11.9)
                    continue;
                CHECK(*row.g < h_envelope(row.lambda, params));
            }
        }
    }
    SUBCASE("two-fixed tables use the unique required parameter") {
        const auto tab = optimal_profit_constrained(
            ProfitConstraint::two_fixed(FixedPair::PL, 10.0, 4.5), grid, params, u);
        for (const auto& row : tab) {
            if (!row.g)
                continue;
            CHECK(row.lambda >= qt::kCfRateP10 - 1e-6);
            CHECK(row.lambda <= qt::kCfRateP10Cost35 + 1e-6);
        }
    }
}
