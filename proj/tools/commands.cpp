#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlead/qlead.hpp"

#include "csvio.hpp"
#include "log.hpp"
#include "parallel.hpp"
#include "svgplot.hpp"

namespace qcli {

namespace {

using namespace qlead;
using qcsv::num;

std::string gnum(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::filesystem::path out_file(const RunOptions& opts, const std::string& name) {
    std::filesystem::create_directories(opts.out_dir);
    return opts.out_dir / name;
}

const char* bound_str(bool closed) { return closed ? "closed" : "open"; }

std::vector<std::string> interval_cells(const AchievableInterval& iv) {
    if (iv.empty)
        return {"", "", "", "", "1", "0"};
    return {num(iv.lo),
            num(iv.hi),
            bound_str(iv.lo_closed),
            bound_str(iv.hi_closed),
            "0",
            iv.is_singleton() ? "1" : "0"};
}

FixedOne fixed_one_from(const std::string& name) {
    if (name == "p")
        return FixedOne::P;
    if (name == "l")
        return FixedOne::L;
    return FixedOne::D;
}

double endpoint_tol(const MarketParams& params) { return 1e-9 * (1.0 + params.mu); }

} // namespace

int cmd_equilibrium(const CliConfig& cfg, const RunOptions& opts) {
    const Policy policy = cfg.policy->to_policy();
    const auto out = solve_equilibrium(policy, cfg.params, cfg.utility);

    const char* kind = out.unique() ? "unique" : out.continuum() ? "continuum" : "none";
    std::printf("outcome: %s\n", kind);
    std::printf("case: %s\n", to_string(out.case_label));
    if (out.unique())
        std::printf("lambda_e: %.10g\n", out.lambda_e);
    if (out.continuum())
        std::printf("interval: %s\n", out.interval.str().c_str());
    std::printf("K(0): %.10g\n", out.k_at_zero);
    std::printf("K_limit_at_mu: %.10g\n", out.k_limit.raw());

    qcsv::Writer csv(out_file(opts, "equilibrium.csv"));
    csv.row({"outcome", "case", "lambda_e", "interval_lo", "interval_hi", "interval_lo_bound",
             "interval_hi_bound", "k_at_zero", "k_limit_at_mu"});
    std::vector<std::string> row{kind, to_string(out.case_label)};
    row.push_back(out.unique() ? num(out.lambda_e) : "");
    if (out.continuum()) {
        row.push_back(num(out.interval.lo));
        row.push_back(num(out.interval.hi));
        row.push_back(bound_str(out.interval.lo_closed));
        row.push_back(bound_str(out.interval.hi_closed));
    } else {
        row.insert(row.end(), {"", "", "", ""});
    }
    row.push_back(num(out.k_at_zero));
    row.push_back(num(out.k_limit.raw()));
    csv.row(row);

    return out.none() ? 3 : 0;
}

int cmd_range(const CliConfig& cfg, const RunOptions& opts) {
    const auto& spec = *cfg.range;

    AchievableInterval iv;
    std::string fixed_desc;
    if (spec.fixed.size() == 1) {
        const auto& [name, value] = *spec.fixed.begin();
        iv = achievable_one_fixed(fixed_one_from(name), value, cfg.params, cfg.utility);
        fixed_desc = name + "=" + gnum(value);
    } else {
        const bool has_p = spec.fixed.contains("p");
        const bool has_l = spec.fixed.contains("l");
        if (has_p && has_l) {
            iv = achievable_two_fixed(FixedPair::PL, spec.fixed.at("p"), spec.fixed.at("l"),
                                      cfg.params, cfg.utility);
            fixed_desc = "p=" + gnum(spec.fixed.at("p")) + ";l=" + gnum(spec.fixed.at("l"));
        } else if (has_l) {
            iv = achievable_two_fixed(FixedPair::DL, spec.fixed.at("d"), spec.fixed.at("l"),
                                      cfg.params, cfg.utility);
            fixed_desc = "d=" + gnum(spec.fixed.at("d")) + ";l=" + gnum(spec.fixed.at("l"));
        } else {
            iv = achievable_two_fixed(FixedPair::DP, spec.fixed.at("d"), spec.fixed.at("p"),
                                      cfg.params, cfg.utility);
            fixed_desc = "d=" + gnum(spec.fixed.at("d")) + ";p=" + gnum(spec.fixed.at("p"));
        }
    }

    std::printf("fixed: %s\n", fixed_desc.c_str());
    std::printf("achievable: %s\n", iv.str().c_str());

    qcsv::Writer csv(out_file(opts, "range.csv"));
    csv.row({"fixed", "lo", "hi", "lo_bound", "hi_bound", "empty", "singleton"});
    {
        std::vector<std::string> cells{fixed_desc};
        const auto iv_cells = interval_cells(iv);
        cells.insert(cells.end(), iv_cells.begin(), iv_cells.end());
        csv.row(cells);
    }

    // Per-rate feasible range of the complementary parameter (one fixed).
    if (!spec.lambdas.empty()) {
        const auto& [name, value] = *spec.fixed.begin();
        qcsv::Writer per(out_file(opts, "range_params.csv"));
        per.row({"lambda", "param", "lo", "hi", "achievable"});
        const double tol = endpoint_tol(cfg.params);
        for (const double lam : spec.lambdas) {
            if (lam > cfg.params.max_rate() || !iv.contains(lam, tol)) {
                per.row({num(lam), name == "p" ? "l" : "p", "", "", "0"});
                continue;
            }
            if (name == "p") {
                // Range of compensation rates achieving lam under fee p.
                const auto k_at = [&](double l) {
                    return k_value(lam, Policy::quoted(0.0, value, l), cfg.params, cfg.utility)
                        .raw();
                };
                const double l_lo = k_at(0.0) >= 0.0
                                        ? 0.0
                                        : bisect_increasing(k_at, 0.0, cfg.params.c,
                                                            1e-12 * (1.0 + cfg.params.c));
                per.row({num(lam), "l", num(l_lo), num(cfg.params.c), "1"});
            } else if (name == "l") {
                const double p_hi =
                    required_price(lam, LeadtimeAnswer{0.0}, value, cfg.params, cfg.utility);
                const double p_lo =
                    cf_price(lam, cfg.params.c, cfg.params, cfg.utility).value_or(0.0);
                per.row({num(lam), "p", num(p_lo), num(p_hi), "1"});
            } else {
                const double p_hi = required_price(lam, LeadtimeAnswer{value}, cfg.params.c,
                                                   cfg.params, cfg.utility);
                const double p_lo =
                    cf_price(lam, cfg.params.c, cfg.params, cfg.utility).value_or(0.0);
                per.row({num(lam), "p", num(p_lo), num(p_hi), "1"});
            }
        }
    }
    return 0;
}

int cmd_curve(const CliConfig& cfg, const RunOptions& opts) {
    const auto& spec = *cfg.curve;
    const FixedOne fixed = fixed_one_from(spec.fixed_name);

    std::vector<PricingCurve> curves(spec.lambdas.size());
    qpar::parallel_for(spec.lambdas.size(), opts.threads, [&](std::size_t i) {
        curves[i] = trace_pricing_curve(fixed, spec.fixed_value, spec.lambdas[i],
                                        spec.grid_size, cfg.params, cfg.utility);
    });

    const char* col1 = fixed == FixedOne::P ? "d" : fixed == FixedOne::L ? "d" : "l";
    const char* col2 = fixed == FixedOne::P ? "l" : "p";

    for (std::size_t i = 0; i < curves.size(); ++i) {
        const auto& curve = curves[i];
        const std::string name = "curve_" + spec.fixed_name + gnum(spec.fixed_value) + "_lam" +
                                 gnum(spec.lambdas[i]) + ".csv";
        qcsv::Writer csv(out_file(opts, name));
        csv.row({col1, col2, "profit", "is_maximizer"});
        for (std::size_t k = 0; k < curve.points.size(); ++k) {
            const auto& pt = curve.points[k];
            csv.row({num(pt.free1), num(pt.free2), num(pt.profit),
                     k == curve.maximizer ? "1" : "0"});
        }
        std::printf("lambda=%s: %zu points, maximizer %s=%s %s=%s profit=%s\n",
                    gnum(spec.lambdas[i]).c_str(), curve.points.size(), col1,
                    num(curve.points[curve.maximizer].free1).c_str(), col2,
                    num(curve.points[curve.maximizer].free2).c_str(),
                    num(curve.points[curve.maximizer].profit).c_str());
    }

    if (opts.plot) {
        std::vector<qplot::Series> series;
        for (std::size_t i = 0; i < curves.size(); ++i) {
            qplot::Series s;
            s.label = "lambda=" + gnum(spec.lambdas[i]);
            for (const auto& pt : curves[i].points) {
                s.x.push_back(pt.free1);
                s.y.push_back(pt.free2);
            }
            series.push_back(std::move(s));
        }
        qplot::write_line_plot(*opts.plot, "pricing curves (" + spec.fixed_name + " fixed)",
                               col1, col2, series);
    }
    return 0;
}

int cmd_profit(const CliConfig& cfg, const RunOptions& opts) {
    const auto& spec = *cfg.profit;
    const double hi =
        std::min(cfg.params.Lambda, cfg.params.mu) - 1e-6 * cfg.params.mu;
    std::vector<double> grid(spec.lambda_count);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = hi * static_cast<double>(i) / static_cast<double>(grid.size() - 1);

    struct Row {
        std::optional<double> cf, fp, fl, fd;
        double h;
    };
    std::vector<Row> rows(grid.size());

    qpar::parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
        const std::span<const double> one{&grid[i], 1};
        Row row;
        row.h = h_envelope(grid[i], cfg.params);
        row.cf = optimal_profit_constrained(ProfitConstraint::none(), one, cfg.params,
                                            cfg.utility)[0]
                     .g;
        if (spec.p)
            row.fp = optimal_profit_constrained(
                         ProfitConstraint::one_fixed(FixedOne::P, *spec.p), one, cfg.params,
                         cfg.utility)[0]
                         .g;
        if (spec.l)
            row.fl = optimal_profit_constrained(
                         ProfitConstraint::one_fixed(FixedOne::L, *spec.l), one, cfg.params,
                         cfg.utility)[0]
                         .g;
        if (spec.d)
            row.fd = optimal_profit_constrained(
                         ProfitConstraint::one_fixed(FixedOne::D, *spec.d), one, cfg.params,
                         cfg.utility)[0]
                         .g;
        rows[i] = row;
    });

    qcsv::Writer csv(out_file(opts, "profit.csv"));
    csv.row({"lambda", "g_cf", "g_fixed_p", "g_fixed_l", "g_fixed_d", "h"});
    const auto cell = [](const std::optional<double>& v) { return v ? num(*v) : ""; };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv.row({num(grid[i]), cell(rows[i].cf), cell(rows[i].fp), cell(rows[i].fl),
                 cell(rows[i].fd), num(rows[i].h)});
    }

    // Peak summary: the headline comparison is the compensation-free peak
    // against the risk-neutral envelope peak.
    double cf_peak = 0.0, h_peak = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (rows[i].cf)
            cf_peak = std::max(cf_peak, *rows[i].cf);
        h_peak = std::max(h_peak, rows[i].h);
    }
    const double gap_pct = 200.0 * (h_peak - cf_peak) / (h_peak + cf_peak);
    std::printf("peak_g_cf: %.10g\n", cf_peak);
    std::printf("peak_h: %.10g\n", h_peak);
    std::printf("peak_ratio: %.10g\n", cf_peak / h_peak);
    std::printf("peak_percent_difference: %.10g\n", gap_pct);

    if (opts.plot) {
        std::vector<qplot::Series> series;
        const auto add = [&](const char* label, auto getter) {
            qplot::Series s;
            s.label = label;
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto v = getter(rows[i]);
                if (!v)
                    continue;
                s.x.push_back(grid[i]);
                s.y.push_back(*v);
            }
            if (!s.x.empty())
                series.push_back(std::move(s));
        };
        add("CF", [](const Row& r) { return r.cf; });
        add("fixed p", [](const Row& r) { return r.fp; });
        add("fixed l", [](const Row& r) { return r.fl; });
        add("fixed d", [](const Row& r) { return r.fd; });
        add("H", [](const Row& r) { return std::optional<double>(r.h); });
        qplot::write_line_plot(*opts.plot, "optimal profit by input rate", "lambda", "profit",
                               series);
    }
    return 0;
}

int cmd_risk_sweep(const CliConfig& cfg, const RunOptions& opts) {
    const auto& spec = *cfg.risk_sweep;

    std::vector<double> rs;
    for (double r = spec.r_lo; r <= spec.r_hi + 1e-12; r += spec.r_step)
        rs.push_back(r);

    const bool has_p = spec.fixed.contains("p");
    const bool has_l = spec.fixed.contains("l");
    const bool has_d = spec.fixed.contains("d");
    const std::string free_name = (has_p && has_l) ? "d" : (has_d && has_l) ? "p" : "l";

    for (const double lam : spec.lambdas)
        if (lam > cfg.params.max_rate())
            throw ConfigError("risk_sweep: lambda " + gnum(lam) + " is not stable under mu");

    // value semantics: finite number, +inf (no compensation), or missing
    // (not achievable at that risk level).
    std::vector<std::vector<std::optional<double>>> values(
        rs.size(), std::vector<std::optional<double>>(spec.lambdas.size()));

    qpar::parallel_for(rs.size(), opts.threads, [&](std::size_t ri) {
        const auto u = UtilityModel::cara(rs[ri]);
        for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
            const double lam = spec.lambdas[li];
            try {
                if (free_name == "d") {
                    const auto lt = required_leadtime(lam, spec.fixed.at("p"),
                                                      spec.fixed.at("l"), cfg.params, u);
                    values[ri][li] = lt.no_comp()
                                         ? std::numeric_limits<double>::infinity()
                                         : *lt.d;
                } else if (free_name == "p") {
                    values[ri][li] = required_price(lam, LeadtimeAnswer{spec.fixed.at("d")},
                                                    spec.fixed.at("l"), cfg.params, u);
                } else {
                    values[ri][li] = required_compensation(lam, spec.fixed.at("d"),
                                                           spec.fixed.at("p"), cfg.params, u);
                }
            } catch (const NotAchievableError&) {
                values[ri][li] = std::nullopt;
            }
        }
    });

    qcsv::Writer csv(out_file(opts, "risk_sweep.csv"));
    csv.row({"r", "lambda", "free", "value"});
    for (std::size_t ri = 0; ri < rs.size(); ++ri)
        for (std::size_t li = 0; li < spec.lambdas.size(); ++li)
            csv.row({num(rs[ri]), num(spec.lambdas[li]), free_name,
                     values[ri][li] ? num(*values[ri][li]) : "NA"});

    if (opts.plot) {
        std::vector<qplot::Series> series;
        for (std::size_t li = 0; li < spec.lambdas.size(); ++li) {
            qplot::Series s;
            s.label = "lambda=" + gnum(spec.lambdas[li]);
            for (std::size_t ri = 0; ri < rs.size(); ++ri) {
                s.x.push_back(rs[ri]);
                const auto& v = values[ri][li];
                s.y.push_back(v && std::isfinite(*v)
                                  ? *v
                                  : std::numeric_limits<double>::quiet_NaN());
            }
            series.push_back(std::move(s));
        }
        qplot::write_line_plot(*opts.plot, "required " + free_name + " by risk aversion", "r",
                               free_name, series);
    }
    return 0;
}

int cmd_simulate(const CliConfig& cfg, const RunOptions& opts) {
    const Policy policy = cfg.policy->to_policy();
    const auto outcome = solve_equilibrium(policy, cfg.params, cfg.utility);
    if (outcome.none()) {
        std::printf("outcome: none\n");
        return 3;
    }
    if (!outcome.unique() || outcome.lambda_e <= 0.0 || outcome.lambda_e >= cfg.params.Lambda)
        throw ConfigError("simulate: the policy does not induce a unique interior "
                          "equilibrium rate; nothing to verify");

    const auto& spec = *cfg.sim;
    SimConfig sim_cfg;
    sim_cfg.lambda_in = outcome.lambda_e;
    sim_cfg.mu = cfg.params.mu;
    sim_cfg.n_customers = spec.n_customers;
    sim_cfg.warmup = spec.warmup.value_or(spec.n_customers / 20);
    sim_cfg.seed = opts.seed.value_or(spec.seed);
    sim_cfg.batches = spec.batches;
    if (spec.lambda && *spec.lambda > cfg.params.max_rate())
        throw ConfigError("sim: \"lambda\" is not stable under mu");

    const auto res = spec.lambda
                         ? verify_at_rate(*spec.lambda, policy, cfg.params, cfg.utility, sim_cfg)
                         : verify_equilibrium(policy, cfg.params, cfg.utility, sim_cfg);

    std::printf("lambda_e: %.10g\n", res.lambda_e);
    std::printf("mean_sojourn: %.10g (+-%.10g)\n", res.report.sojourn.mean,
                res.report.sojourn.half_width);
    std::printf("mean_lateness: %.10g (+-%.10g)\n", res.report.lateness.mean,
                res.report.lateness.half_width);
    std::printf("k_estimate: %.10g (+-%.10g)\n", res.report.k.mean, res.report.k.half_width);
    std::printf("utilization: %.10g\n", res.report.utilization);
    std::printf("ks: %.6g (threshold %.6g) %s\n", res.ks.statistic, res.ks.threshold,
                res.ks.pass ? "pass" : "fail");
    std::printf("verdict: %s\n", res.pass ? "pass" : "fail");

    qcsv::Writer csv(out_file(opts, "simulate.csv"));
    csv.row({"lambda_e", "mean_sojourn", "sojourn_hw", "mean_lateness", "lateness_hw",
             "k_estimate", "k_hw", "utilization", "n_effective", "ks_stat", "ks_threshold",
             "ks_pass", "pass"});
    csv.row({num(res.lambda_e), num(res.report.sojourn.mean), num(res.report.sojourn.half_width),
             num(res.report.lateness.mean), num(res.report.lateness.half_width),
             num(res.report.k.mean), num(res.report.k.half_width),
             num(res.report.utilization), std::to_string(res.report.n_effective),
             num(res.ks.statistic), num(res.ks.threshold), res.ks.pass ? "1" : "0",
             res.pass ? "1" : "0"});

    return res.pass ? 0 : 4;
}

int cmd_epsopt(const CliConfig& cfg, const RunOptions& opts) {
    (void)opts;
    const auto res = eps_optimal_policy(cfg.epsopt->epsilon, cfg.params, cfg.utility);

    std::printf("lambda_star: %.10g\n", res.lambda_target);
    std::printf("h_star: %.10g\n", res.h_star);
    if (res.policy.no_comp())
        std::printf("policy: no_compensation p=%.10g\n", res.policy.p());
    else
        std::printf("policy: d=%.10g p=%.10g l=%.10g\n", res.policy.d(), res.policy.p(),
                    res.policy.l());
    std::printf("profit: %.10g\n", res.profit);
    std::printf("gap: %.10g\n", res.h_star - res.profit);
    std::printf("delta: %.10g\n", res.delta);
    if (!res.warning.empty())
        qlog::error("epsopt: %s", res.warning.c_str());
    return 0;
}

} // namespace qcli
