#include <clocale>
#include <cstdio>
#include <exception>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qlead/interval.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "log.hpp"

namespace {

using CommandFn = int (*)(const qcli::CliConfig&, const qcli::RunOptions&);

struct SubcommandState {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::string> plot;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

} // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");

    CLI::App app{"equilibrium, load-control and pricing analysis for a single-server "
                 "make-to-order system with delay compensation"};
    app.require_subcommand(1);

    const std::map<std::string, std::pair<const char*, CommandFn>> commands{
        {"equilibrium", {"solve the join/balk equilibrium for a policy", qcli::cmd_equilibrium}},
        {"range", {"achievable input-rate interval for fixed parameters", qcli::cmd_range}},
        {"curve", {"pricing curves for target input rates", qcli::cmd_curve}},
        {"profit", {"optimal profit by input rate under constraints", qcli::cmd_profit}},
        {"risk-sweep", {"required free parameter across risk aversion", qcli::cmd_risk_sweep}},
        {"simulate", {"verify an equilibrium against the event simulation", qcli::cmd_simulate}},
        {"epsopt", {"near-optimal policy for the profit supremum", qcli::cmd_epsopt}},
    };

    std::map<std::string, SubcommandState> state;
    std::map<const CLI::App*, std::string> names;
    for (const auto& [name, entry] : commands) {
        auto* sub = app.add_subcommand(name, entry.first);
        auto& st = state[name];
        sub->add_option("--config", st.config_path, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option_function<std::string>(
            "--out", [&st](const std::string& p) { st.out_dir = p; },
            "output directory (default ./out)");
        sub->add_option_function<std::string>(
            "--plot", [&st](const std::string& p) { st.plot = p; },
            "render an SVG plot of the primary output");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&st](std::uint64_t s) { st.seed = s; },
            "override the simulation seed");
        sub->add_option("--threads", st.threads, "worker threads for grid sweeps")
            ->check(CLI::PositiveNumber);
        names[sub] = name;
    }

    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    const std::string& name = names.at(sub);
    const auto& st = state.at(name);

    try {
        const auto cfg = qcli::load_config(st.config_path, name);
        qcli::RunOptions opts;
        opts.out_dir = st.out_dir.value_or(cfg.out_dir.value_or("./out"));
        if (st.plot)
            opts.plot = *st.plot;
        opts.seed = st.seed;
        opts.threads = st.threads;
        qlog::info("running %s (out: %s)", name.c_str(), opts.out_dir.string().c_str());
        return commands.at(name).second(cfg, opts);
    } catch (const qcli::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const qlead::NotAchievableError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "achievable interval: %s\n", e.achievable().str().c_str());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
