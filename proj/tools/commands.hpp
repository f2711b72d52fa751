#ifndef QLEAD_TOOLS_COMMANDS_HPP
#define QLEAD_TOOLS_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>

#include "config.hpp"

namespace qcli {

struct RunOptions {
    std::filesystem::path out_dir = "./out";
    std::optional<std::filesystem::path> plot;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

// Exit codes: 0 success, 2 config error (thrown as ConfigError),
// 3 no equilibrium, 4 simulation verification failure.
int cmd_equilibrium(const CliConfig& cfg, const RunOptions& opts);
int cmd_range(const CliConfig& cfg, const RunOptions& opts);
int cmd_curve(const CliConfig& cfg, const RunOptions& opts);
int cmd_profit(const CliConfig& cfg, const RunOptions& opts);
int cmd_risk_sweep(const CliConfig& cfg, const RunOptions& opts);
int cmd_simulate(const CliConfig& cfg, const RunOptions& opts);
int cmd_epsopt(const CliConfig& cfg, const RunOptions& opts);

} // namespace qcli

#endif
