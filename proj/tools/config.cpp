#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"

namespace qcli {

namespace {

using nlohmann::json;

void expect_object(const json& j, const std::string& ctx) {
    if (!j.is_object())
        throw ConfigError(ctx + ": expected an object");
}

void reject_unknown(const json& obj, const std::string& ctx,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key))
            throw ConfigError(ctx + ": unknown key \"" + key + "\"");
    }
}

double get_num(const json& obj, const std::string& ctx, const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError(ctx + ": missing \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError(ctx + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

std::optional<double> get_num_opt(const json& obj, const std::string& ctx,
                                  const std::string& key) {
    if (!obj.contains(key))
        return std::nullopt;
    if (!obj.at(key).is_number())
        throw ConfigError(ctx + ": \"" + key + "\" must be a number");
    return obj.at(key).get<double>();
}

std::vector<double> get_num_list(const json& obj, const std::string& ctx,
                                 const std::string& key) {
    if (!obj.contains(key))
        throw ConfigError(ctx + ": missing \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_array() || v.empty())
        throw ConfigError(ctx + ": \"" + key + "\" must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            throw ConfigError(ctx + ": \"" + key + "\" must contain numbers only");
        out.push_back(e.get<double>());
    }
    return out;
}

qlead::MarketParams parse_params(const json& j) {
    expect_object(j, "params");
    reject_unknown(j, "params", {"Lambda", "mu", "R", "c"});
    qlead::MarketParams p{get_num(j, "params", "Lambda"), get_num(j, "params", "mu"),
                          get_num(j, "params", "R"), get_num(j, "params", "c")};
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("params: ") + e.what());
    }
    return p;
}

void parse_utility(const json& j, CliConfig& cfg) {
    expect_object(j, "utility");
    reject_unknown(j, "utility", {"kind", "r"});
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw ConfigError("utility: missing string \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "cara") {
        const double r = get_num(j, "utility", "r");
        if (!(r > 0.0))
            throw ConfigError("utility: cara requires r > 0");
        cfg.utility = qlead::UtilityModel::cara(r);
        cfg.utility_r = r;
    } else if (kind == "linear") {
        if (j.contains("r"))
            throw ConfigError("utility: \"r\" is only valid for kind \"cara\"");
        cfg.utility = qlead::UtilityModel::linear();
    } else {
        throw ConfigError("utility: unknown kind \"" + kind + "\" (expected cara or linear)");
    }
}

PolicySpec parse_policy(const json& j, const qlead::MarketParams& params) {
    expect_object(j, "policy");
    PolicySpec spec;
    if (j.contains("no_compensation")) {
        reject_unknown(j, "policy", {"no_compensation", "p"});
        if (!j.at("no_compensation").is_boolean() || !j.at("no_compensation").get<bool>())
            throw ConfigError("policy: \"no_compensation\" must be true when present");
        spec.no_comp = true;
        spec.p = get_num(j, "policy", "p");
    } else {
        reject_unknown(j, "policy", {"d", "p", "l"});
        spec.d = get_num(j, "policy", "d");
        spec.p = get_num(j, "policy", "p");
        spec.l = get_num(j, "policy", "l");
    }
    try {
        spec.to_policy().validate(params);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("policy: ") + e.what());
    }
    return spec;
}

std::map<std::string, double> parse_fixed(const json& j, const std::string& ctx,
                                          std::size_t min_n, std::size_t max_n) {
    expect_object(j, ctx);
    reject_unknown(j, ctx, {"p", "l", "d"});
    std::map<std::string, double> fixed;
    for (const std::string key : {"p", "l", "d"}) {
        if (j.contains(key)) {
            if (!j.at(key).is_number())
                throw ConfigError(ctx + ": \"" + key + "\" must be a number");
            fixed[key] = j.at(key).get<double>();
        }
    }
    if (fixed.size() < min_n || fixed.size() > max_n)
        throw ConfigError(ctx + ": expected between " + std::to_string(min_n) + " and " +
                          std::to_string(max_n) + " fixed parameters");
    return fixed;
}

} // namespace

CliConfig load_config(const std::filesystem::path& path, const std::string& expected_command) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    expect_object(doc, "config");
    reject_unknown(doc, "config",
                   {"command", "params", "utility", "policy", "range", "curve", "profit",
                    "risk_sweep", "sim", "epsopt", "output"});

    CliConfig cfg;
    if (!doc.contains("command") || !doc.at("command").is_string())
        throw ConfigError("config: missing string \"command\"");
    cfg.command = doc.at("command").get<std::string>();
    if (cfg.command != expected_command)
        throw ConfigError("config: command \"" + cfg.command + "\" does not match subcommand \"" +
                          expected_command + "\"");

    if (!doc.contains("params"))
        throw ConfigError("config: missing \"params\"");
    cfg.params = parse_params(doc.at("params"));

    if (!doc.contains("utility"))
        throw ConfigError("config: missing \"utility\"");
    parse_utility(doc.at("utility"), cfg);

    if (doc.contains("output")) {
        const auto& out = doc.at("output");
        expect_object(out, "output");
        reject_unknown(out, "output", {"out_dir"});
        if (out.contains("out_dir")) {
            if (!out.at("out_dir").is_string())
                throw ConfigError("output: \"out_dir\" must be a string");
            cfg.out_dir = out.at("out_dir").get<std::string>();
        }
    }

    const auto require_block = [&](const char* name) -> const json& {
        if (!doc.contains(name))
            throw ConfigError(std::string("config: command \"") + cfg.command +
                              "\" requires a \"" + name + "\" block");
        return doc.at(name);
    };
    const auto forbid_block = [&](const char* name) {
        if (doc.contains(name))
            throw ConfigError(std::string("config: block \"") + name +
                              "\" is not valid for command \"" + cfg.command + "\"");
    };

    if (cfg.command == "equilibrium") {
        cfg.policy = parse_policy(require_block("policy"), cfg.params);
        for (const char* b : {"range", "curve", "profit", "risk_sweep", "sim", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "range") {
        const auto& j = require_block("range");
        expect_object(j, "range");
        reject_unknown(j, "range", {"fixed", "lambdas"});
        RangeSpec spec;
        if (!j.contains("fixed"))
            throw ConfigError("range: missing \"fixed\"");
        spec.fixed = parse_fixed(j.at("fixed"), "range.fixed", 1, 2);
        if (j.contains("lambdas")) {
            spec.lambdas = get_num_list(j, "range", "lambdas");
            if (spec.fixed.size() != 1)
                throw ConfigError("range: per-rate parameter ranges need exactly one fixed "
                                  "parameter");
        }
        cfg.range = spec;
        for (const char* b : {"policy", "curve", "profit", "risk_sweep", "sim", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "curve") {
        const auto& j = require_block("curve");
        expect_object(j, "curve");
        reject_unknown(j, "curve", {"fixed", "lambdas", "grid_size"});
        CurveSpec spec;
        if (!j.contains("fixed"))
            throw ConfigError("curve: missing \"fixed\"");
        const auto fixed = parse_fixed(j.at("fixed"), "curve.fixed", 1, 1);
        spec.fixed_name = fixed.begin()->first;
        spec.fixed_value = fixed.begin()->second;
        spec.lambdas = get_num_list(j, "curve", "lambdas");
        if (const auto g = get_num_opt(j, "curve", "grid_size")) {
            if (*g < 2 || *g != std::floor(*g))
                throw ConfigError("curve: \"grid_size\" must be an integer >= 2");
            spec.grid_size = static_cast<std::size_t>(*g);
        }
        cfg.curve = spec;
        for (const char* b : {"policy", "range", "profit", "risk_sweep", "sim", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "profit") {
        const auto& j = require_block("profit");
        expect_object(j, "profit");
        reject_unknown(j, "profit", {"lambda_count", "p", "l", "d"});
        ProfitSpec spec;
        if (const auto n = get_num_opt(j, "profit", "lambda_count")) {
            if (*n < 2 || *n != std::floor(*n))
                throw ConfigError("profit: \"lambda_count\" must be an integer >= 2");
            spec.lambda_count = static_cast<std::size_t>(*n);
        }
        spec.p = get_num_opt(j, "profit", "p");
        spec.l = get_num_opt(j, "profit", "l");
        spec.d = get_num_opt(j, "profit", "d");
        cfg.profit = spec;
        for (const char* b : {"policy", "range", "curve", "risk_sweep", "sim", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "risk-sweep") {
        const auto& j = require_block("risk_sweep");
        expect_object(j, "risk_sweep");
        reject_unknown(j, "risk_sweep", {"r_grid", "fixed", "lambdas"});
        RiskSweepSpec spec;
        if (j.contains("r_grid")) {
            const auto& g = j.at("r_grid");
            expect_object(g, "risk_sweep.r_grid");
            reject_unknown(g, "risk_sweep.r_grid", {"lo", "hi", "step"});
            spec.r_lo = get_num(g, "risk_sweep.r_grid", "lo");
            spec.r_hi = get_num(g, "risk_sweep.r_grid", "hi");
            spec.r_step = get_num(g, "risk_sweep.r_grid", "step");
            if (!(spec.r_lo > 0.0) || !(spec.r_hi >= spec.r_lo) || !(spec.r_step > 0.0))
                throw ConfigError("risk_sweep.r_grid: need 0 < lo <= hi and step > 0");
        }
        if (!j.contains("fixed"))
            throw ConfigError("risk_sweep: missing \"fixed\"");
        spec.fixed = parse_fixed(j.at("fixed"), "risk_sweep.fixed", 2, 2);
        spec.lambdas = get_num_list(j, "risk_sweep", "lambdas");
        if (cfg.utility.kind() != qlead::UtilityKind::Cara)
            throw ConfigError("risk_sweep: the risk sweep varies the CARA risk aversion; "
                              "set utility kind \"cara\"");
        cfg.risk_sweep = spec;
        for (const char* b : {"policy", "range", "curve", "profit", "sim", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "simulate") {
        cfg.policy = parse_policy(require_block("policy"), cfg.params);
        const auto& j = require_block("sim");
        expect_object(j, "sim");
        reject_unknown(j, "sim", {"n_customers", "warmup", "seed", "batches", "lambda"});
        SimSpec spec;
        if (const auto n = get_num_opt(j, "sim", "n_customers")) {
            if (*n < 1 || *n != std::floor(*n))
                throw ConfigError("sim: \"n_customers\" must be a positive integer");
            spec.n_customers = static_cast<std::uint64_t>(*n);
        }
        if (const auto w = get_num_opt(j, "sim", "warmup")) {
            if (*w < 0 || *w != std::floor(*w))
                throw ConfigError("sim: \"warmup\" must be a nonnegative integer");
            spec.warmup = static_cast<std::uint64_t>(*w);
        }
        if (const auto s = get_num_opt(j, "sim", "seed")) {
            if (*s < 0 || *s != std::floor(*s))
                throw ConfigError("sim: \"seed\" must be a nonnegative integer");
            spec.seed = static_cast<std::uint64_t>(*s);
        }
        if (const auto b = get_num_opt(j, "sim", "batches")) {
            if (*b < 10 || *b != std::floor(*b))
                throw ConfigError("sim: \"batches\" must be an integer >= 10");
            spec.batches = static_cast<int>(*b);
        }
        if (const auto lam = get_num_opt(j, "sim", "lambda")) {
            if (!(*lam > 0.0))
                throw ConfigError("sim: \"lambda\" must be positive");
            spec.lambda = *lam;
        }
        cfg.sim = spec;
        for (const char* b : {"range", "curve", "profit", "risk_sweep", "epsopt"})
            forbid_block(b);
    } else if (cfg.command == "epsopt") {
        if (!doc.contains("epsopt"))
            throw ConfigError("config: command \"epsopt\" requires an \"epsopt\" block");
        for (const char* b : {"policy", "range", "curve", "profit", "risk_sweep", "sim"})
            forbid_block(b);
        const auto& j = doc.at("epsopt");
        expect_object(j, "epsopt");
        reject_unknown(j, "epsopt", {"epsilon"});
        EpsoptSpec spec;
        spec.epsilon = get_num(j, "epsopt", "epsilon");
        if (!(spec.epsilon > 0.0))
            throw ConfigError("epsopt: \"epsilon\" must be positive");
        cfg.epsopt = spec;
    } else {
        throw ConfigError("config: unknown command \"" + cfg.command + "\"");
    }
    return cfg;
}

} // namespace qcli
