#ifndef QLEAD_SIM_HPP
#define QLEAD_SIM_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "qlead/equilibrium.hpp"
#include "qlead/market.hpp"
#include "qlead/utility.hpp"

namespace qlead {

/// SplitMix64: tiny splittable 64-bit generator (public-domain algorithm).
/// Two independently seeded streams keep arrivals and services decoupled,
/// so changing the customer count never cross-contaminates the streams.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform draw in (0, 1].
    double next_unit() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    /// Exponential draw with the given rate.
    double next_exp(double rate);

  private:
    std::uint64_t state_;
};

struct SimConfig {
    double lambda_in;           ///< effective input rate (= Lambda q), < mu
    double mu;
    std::uint64_t n_customers;
    std::uint64_t warmup;       ///< customers discarded; doubled when rho > 0.9
    std::uint64_t seed;
    int batches = 30;           ///< batch count for batch-means intervals

    void validate() const;
};

/// Raw output of one run: post-warmup per-customer records plus the
/// accounting needed for the utilization estimate.
struct SimSamples {
    std::vector<double> sojourn;
    std::vector<double> service;    ///< service times, aligned with sojourn
    std::vector<double> departure;  ///< departure epochs, aligned with sojourn
    double window_start = 0.0;      ///< arrival epoch of the first retained customer
    std::uint64_t n_total = 0;
    std::uint64_t n_warmup = 0;

    double busy_time() const;
    double horizon() const;
};

/// Event-driven single-server FCFS run with Poisson(lambda_in) arrivals and
/// Exp(mu) services (Lindley recursion). Deterministic given the seed.
SimSamples simulate_sojourns(const SimConfig& config);

struct CiEstimate {
    double mean = 0.0;
    double half_width = 0.0;  ///< 99% batch-means half width
    double std_error = 0.0;

    bool contains(double x) const { return mean - half_width <= x && x <= mean + half_width; }
};

struct SimReport {
    CiEstimate sojourn;
    CiEstimate lateness;   ///< mean of (x - d)^+
    CiEstimate k;          ///< mean of U(net benefit) - U(0)
    double utilization = 0.0;
    double utilization_se = 0.0;
    std::uint64_t n_effective = 0;
};

/// Sample means of the sojourn, the excess delay beyond the quoted
/// lead-time and the utility gain of joining, with 99% batch-means
/// confidence half-widths. Throws std::invalid_argument with fewer than
/// 10 batches of data.
SimReport estimate_metrics(const SimSamples& samples, const Policy& policy,
                           const MarketParams& params, const UtilityModel& u,
                           const SimConfig& config);

/// Kolmogorov-Smirnov-style distribution check of thinned sojourn samples
/// against Exp(rate). Thinning (default every 50th sample) breaks the
/// autocorrelation so the i.i.d. critical value applies.
struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    std::size_t n_used = 0;
    bool pass = false;
};
KsResult ks_exponential_check(std::span<const double> samples, double rate,
                              double significance = 0.01, std::size_t thin_stride = 50);

/// End-to-end fixed-point verification: simulates at the analytic
/// equilibrium rate and checks that the estimated K interval contains 0 and
/// that the sojourn law matches Exp(mu - lambda). The policy must induce a
/// unique interior equilibrium.
struct VerifyResult {
    bool pass = false;
    double lambda_e = 0.0;
    SimReport report;
    KsResult ks;
    bool k_ci_contains_zero = false;
};
VerifyResult verify_equilibrium(const Policy& policy, const MarketParams& params,
                                const UtilityModel& u, const SimConfig& base_config);

/// Same checks at an explicit input rate. Off the equilibrium the
/// estimated K interval excludes 0 for large runs, so this fails by
/// construction; useful as a negative control.
VerifyResult verify_at_rate(double lambda_in, const Policy& policy, const MarketParams& params,
                            const UtilityModel& u, const SimConfig& base_config);

} // namespace qlead

#endif
