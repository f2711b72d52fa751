#ifndef QLEAD_TOOLS_CONFIG_HPP
#define QLEAD_TOOLS_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlead/market.hpp"
#include "qlead/utility.hpp"

namespace qcli {

/// Config rejected before any computation (bad schema, unknown keys, value
/// out of range). Maps to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct PolicySpec {
    bool no_comp = false;
    double d = 0.0;
    double p = 0.0;
    double l = 0.0;

    qlead::Policy to_policy() const {
        return no_comp ? qlead::Policy::no_compensation(p) : qlead::Policy::quoted(d, p, l);
    }
};

struct RangeSpec {
    std::map<std::string, double> fixed; // 1 or 2 of "p", "l", "d"
    std::vector<double> lambdas;         // optional per-rate parameter ranges
};

struct CurveSpec {
    std::string fixed_name; // "p", "l" or "d"
    double fixed_value = 0.0;
    std::vector<double> lambdas;
    std::size_t grid_size = 200;
};

struct ProfitSpec {
    std::size_t lambda_count = 120;
    std::optional<double> p;
    std::optional<double> l;
    std::optional<double> d;
};

struct RiskSweepSpec {
    double r_lo = 0.05;
    double r_hi = 2.0;
    double r_step = 0.05;
    std::map<std::string, double> fixed; // exactly 2 of "p", "l", "d"
    std::vector<double> lambdas;
};

struct SimSpec {
    std::uint64_t n_customers = 200000;
    std::optional<std::uint64_t> warmup; // default 5% of n
    std::uint64_t seed = 1;
    int batches = 30;
    std::optional<double> lambda; // simulate at this rate instead of the equilibrium
};

struct EpsoptSpec {
    double epsilon = 0.1;
};

struct CliConfig {
    std::string command;
    qlead::MarketParams params{0, 0, 0, 0};
    qlead::UtilityModel utility = qlead::UtilityModel::linear();
    double utility_r = 0.0; // risk aversion when the model is CARA
    std::optional<std::string> out_dir;

    std::optional<PolicySpec> policy;
    std::optional<RangeSpec> range;
    std::optional<CurveSpec> curve;
    std::optional<ProfitSpec> profit;
    std::optional<RiskSweepSpec> risk_sweep;
    std::optional<SimSpec> sim;
    std::optional<EpsoptSpec> epsopt;
};

/// Parses and validates a config document; throws ConfigError on any
/// schema violation, including unknown keys at any level. The expected
/// command must match the document's `command` field.
CliConfig load_config(const std::filesystem::path& path, const std::string& expected_command);

} // namespace qcli

#endif
