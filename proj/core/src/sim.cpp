#include "qlead/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "qlead/model.hpp"

namespace qlead {

namespace {

// Asymptotic Kolmogorov statistic quantile at significance 0.01, with the
// usual finite-sample correction factor sqrt(n) + 0.12 + 0.11 / sqrt(n).
constexpr double kKolmogorov01 = 1.6276;

double t_quantile_995(int df) {
    boost::math::students_t dist(static_cast<double>(df));
    return boost::math::quantile(dist, 0.995);
}

CiEstimate batch_means(std::span<const double> values, int batches) {
    if (batches < 10)
        throw std::invalid_argument("batch_means: need at least 10 batches");
    const std::size_t n = values.size();
    if (n < static_cast<std::size_t>(batches) * 2)
        throw std::invalid_argument("batch_means: too few samples for the batch count");

    const std::size_t len = n / static_cast<std::size_t>(batches);
    std::vector<double> means(static_cast<std::size_t>(batches));
    for (int b = 0; b < batches; ++b) {
        const auto* begin = values.data() + static_cast<std::size_t>(b) * len;
        means[static_cast<std::size_t>(b)] =
            std::accumulate(begin, begin + len, 0.0) / static_cast<double>(len);
    }
    const double grand =
        std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
    double ss = 0.0;
    for (const double m : means)
        ss += (m - grand) * (m - grand);
    const double var = ss / static_cast<double>(batches - 1);
    const double se = std::sqrt(var / static_cast<double>(batches));
    return {grand, t_quantile_995(batches - 1) * se, se};
}

} // namespace

double SplitMix64::next_exp(double rate) { return -std::log(next_unit()) / rate; }

void SimConfig::validate() const {
    if (!(mu > 0.0) || !(lambda_in >= 0.0))
        throw std::invalid_argument("SimConfig: rates must be nonnegative, mu positive");
    if (lambda_in >= mu)
        throw std::invalid_argument("SimConfig: lambda_in must be below mu");
    if (n_customers == 0 || warmup >= n_customers)
        throw std::invalid_argument("SimConfig: need n_customers > warmup");
    if (batches < 10)
        throw std::invalid_argument("SimConfig: need at least 10 batches");
}

double SimSamples::busy_time() const {
    return std::accumulate(service.begin(), service.end(), 0.0);
}

double SimSamples::horizon() const {
    return departure.empty() ? 0.0 : departure.back() - window_start;
}

SimSamples simulate_sojourns(const SimConfig& config) {
    config.validate();
    if (!(config.lambda_in > 0.0))
        throw std::invalid_argument("simulate_sojourns: lambda_in must be positive");

    // Heavy traffic relaxes to steady state more slowly.
    std::uint64_t warmup = config.warmup;
    if (config.lambda_in / config.mu > 0.9 && 2 * warmup < config.n_customers)
        warmup *= 2;

    SplitMix64 seeder(config.seed);
    SplitMix64 arrivals(seeder.next());
    SplitMix64 services(seeder.next());

    SimSamples out;
    out.n_total = config.n_customers;
    out.n_warmup = warmup;
    const std::size_t kept = config.n_customers - warmup;
    out.sojourn.reserve(kept);
    out.service.reserve(kept);
    out.departure.reserve(kept);

    // Lindley recursion for a single FCFS server.
    double arrival = 0.0;
    double prev_departure = 0.0;
    for (std::uint64_t i = 0; i < config.n_customers; ++i) {
        arrival += arrivals.next_exp(config.lambda_in);
        const double service = services.next_exp(config.mu);
        const double start = std::max(arrival, prev_departure);
        const double departure = start + service;
        prev_departure = departure;
        if (i == warmup)
            out.window_start = arrival;
        if (i >= warmup) {
            out.sojourn.push_back(departure - arrival);
            out.service.push_back(service);
            out.departure.push_back(departure);
        }
    }
    return out;
}

SimReport estimate_metrics(const SimSamples& samples, const Policy& policy,
                           const MarketParams& params, const UtilityModel& u,
                           const SimConfig& config) {
    if (samples.sojourn.empty())
        throw std::invalid_argument("estimate_metrics: no samples");
    policy.validate(params);

    const std::size_t n = samples.sojourn.size();
    std::vector<double> late(n), gain(n);
    const double u0 = u(0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = samples.sojourn[i];
        late[i] = policy.no_comp() ? 0.0 : std::max(x - policy.d(), 0.0);
        gain[i] = u(net_benefit(x, policy, params)) - u0;
    }

    SimReport rep;
    rep.n_effective = n;
    rep.sojourn = batch_means(samples.sojourn, config.batches);
    rep.lateness = batch_means(late, config.batches);
    rep.k = batch_means(gain, config.batches);

    // Utilization: busy fraction per batch of customers, each batch spanning
    // the wall-clock window between consecutive batch-boundary departures.
    const auto b = static_cast<std::size_t>(config.batches);
    const std::size_t len = n / b;
    if (len >= 1 && samples.service.size() == n && samples.departure.size() == n) {
        std::vector<double> util(b);
        double span_start = samples.window_start;
        for (std::size_t k = 0; k < b; ++k) {
            const std::size_t first = k * len;
            const std::size_t last = first + len - 1;
            double busy = 0.0;
            for (std::size_t i = first; i <= last; ++i)
                busy += samples.service[i];
            const double span_end = samples.departure[last];
            util[k] = span_end > span_start ? busy / (span_end - span_start) : 0.0;
            span_start = span_end;
        }
        const double grand = std::accumulate(util.begin(), util.end(), 0.0) /
                             static_cast<double>(b);
        double ss = 0.0;
        for (const double v : util)
            ss += (v - grand) * (v - grand);
        rep.utilization = samples.horizon() > 0.0 ? samples.busy_time() / samples.horizon() : 0.0;
        rep.utilization_se =
            std::sqrt(ss / static_cast<double>(b - 1) / static_cast<double>(b));
    }
    return rep;
}

KsResult ks_exponential_check(std::span<const double> samples, double rate, double significance,
                              std::size_t thin_stride) {
    if (samples.empty() || !(rate > 0.0))
        throw std::invalid_argument("ks_exponential_check: bad input");
    if (significance != 0.01)
        throw std::invalid_argument("ks_exponential_check: only the 0.01 level is tabulated");

    std::vector<double> thinned;
    thinned.reserve(samples.size() / thin_stride + 1);
    for (std::size_t i = 0; i < samples.size(); i += std::max<std::size_t>(1, thin_stride))
        thinned.push_back(samples[i]);
    std::sort(thinned.begin(), thinned.end());

    const auto m = static_cast<double>(thinned.size());
    double d_stat = 0.0;
    for (std::size_t i = 0; i < thinned.size(); ++i) {
        const double f = -std::expm1(-rate * thinned[i]);
        const double up = static_cast<double>(i + 1) / m - f;
        const double dn = f - static_cast<double>(i) / m;
        d_stat = std::max({d_stat, up, dn});
    }

    KsResult res;
    res.statistic = d_stat;
    res.n_used = thinned.size();
    const double corr = std::sqrt(m) + 0.12 + 0.11 / std::sqrt(m);
    res.threshold = kKolmogorov01 / corr;
    res.pass = d_stat <= res.threshold;
    return res;
}

VerifyResult verify_at_rate(double lambda_in, const Policy& policy, const MarketParams& params,
                            const UtilityModel& u, const SimConfig& base_config) {
    VerifyResult res;
    res.lambda_e = lambda_in;

    SimConfig config = base_config;
    config.lambda_in = lambda_in;
    config.mu = params.mu;

    const auto samples = simulate_sojourns(config);
    res.report = estimate_metrics(samples, policy, params, u, config);
    res.ks = ks_exponential_check(samples.sojourn, params.mu - lambda_in);
    res.k_ci_contains_zero = res.report.k.contains(0.0);
    res.pass = res.k_ci_contains_zero && res.ks.pass;
    return res;
}

VerifyResult verify_equilibrium(const Policy& policy, const MarketParams& params,
                                const UtilityModel& u, const SimConfig& base_config) {
    const auto outcome = solve_equilibrium(policy, params, u);
    if (!outcome.unique() || outcome.lambda_e <= 0.0 || outcome.lambda_e >= params.Lambda)
        throw std::invalid_argument(
            "verify_equilibrium: policy does not induce a unique interior equilibrium");
    return verify_at_rate(outcome.lambda_e, policy, params, u, base_config);
}

} // namespace qlead
