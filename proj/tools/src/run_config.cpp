#include "run_config.hpp"

#include <fstream>

#include <json.hpp>

namespace finitekey::cli {

namespace {

using nlohmann::json;

double get_number(const json& obj, const std::string& scope, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(scope + "." + key + ": expected a number");
    return v.get<double>();
}

}  // namespace

void RunConfig::validate() const {
    try {
        channel.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("channel.") + e.what());
    }
    try {
        protocol.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("protocol.") + e.what());
    }
    try {
        budget.validate();
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("budget.") + e.what());
    }
    if (optimizer.starts < 1) throw ConfigError("optimizer.starts: must be >= 1");
    if (optimizer.max_evals < 1) throw ConfigError("optimizer.max_evals: must be >= 1");
    if (!(optimizer.rel_tol > 0.0)) {
        throw ConfigError("optimizer.rel_tol: must be positive");
    }
    if (!(sweep.L_start <= sweep.L_end)) {
        throw ConfigError("sweep.L_start: must not exceed sweep.L_end");
    }
    if (!(sweep.L_step > 0.0)) throw ConfigError("sweep.L_step: must be positive");
    if (methods.empty()) throw ConfigError("methods: must list at least one method");
    for (Method m : methods) {
        if (m == Method::serfling) {
            throw ConfigError(
                "methods: serfling is a sampling-only method; it has no key-rate "
                "pipeline");
        }
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);

    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    if (doc.contains("channel")) {
        const json& c = doc.at("channel");
        cfg.channel.eta_d = get_number(c, "channel", "eta_d", cfg.channel.eta_d);
        cfg.channel.Y0 = get_number(c, "channel", "Y0", cfg.channel.Y0);
        cfg.channel.e_d = get_number(c, "channel", "e_d", cfg.channel.e_d);
        cfg.channel.alpha = get_number(c, "channel", "alpha", cfg.channel.alpha);
        cfg.channel.L = get_number(c, "channel", "L", cfg.channel.L);
        cfg.channel.e0 = get_number(c, "channel", "e0", cfg.channel.e0);
    }
    if (doc.contains("protocol")) {
        const json& p = doc.at("protocol");
        cfg.protocol.mu = get_number(p, "protocol", "mu", cfg.protocol.mu);
        cfg.protocol.nu = get_number(p, "protocol", "nu", cfg.protocol.nu);
        cfg.protocol.p_mu = get_number(p, "protocol", "p_mu", cfg.protocol.p_mu);
        cfg.protocol.p_nu = get_number(p, "protocol", "p_nu", cfg.protocol.p_nu);
        cfg.protocol.p_z = get_number(p, "protocol", "p_z", cfg.protocol.p_z);
        cfg.protocol.q_z = get_number(p, "protocol", "q_z", cfg.protocol.q_z);
        cfg.protocol.pulse_count = get_number(p, "protocol", "N",
                                              cfg.protocol.pulse_count);
        cfg.protocol.zeta = get_number(p, "protocol", "zeta", cfg.protocol.zeta);
        cfg.protocol.phi_tol = get_number(p, "protocol", "phi_tol",
                                          cfg.protocol.phi_tol);
    }
    if (doc.contains("budget")) {
        const json& b = doc.at("budget");
        cfg.budget.eps_sec = get_number(b, "budget", "eps_sec", cfg.budget.eps_sec);
        cfg.budget.eps_cor = get_number(b, "budget", "eps_cor", cfg.budget.eps_cor);
    }
    if (doc.contains("optimizer")) {
        const json& o = doc.at("optimizer");
        cfg.optimizer.starts = static_cast<int>(
            get_number(o, "optimizer", "starts", cfg.optimizer.starts));
        cfg.optimizer.max_evals = static_cast<int>(
            get_number(o, "optimizer", "max_evals", cfg.optimizer.max_evals));
        cfg.optimizer.rel_tol = get_number(o, "optimizer", "rel_tol",
                                           cfg.optimizer.rel_tol);
        cfg.optimizer.seed = static_cast<uint64_t>(
            get_number(o, "optimizer", "seed", double(cfg.optimizer.seed)));
    }
    if (doc.contains("sweep")) {
        const json& s = doc.at("sweep");
        cfg.sweep.L_start = get_number(s, "sweep", "L_start", cfg.sweep.L_start);
        cfg.sweep.L_end = get_number(s, "sweep", "L_end", cfg.sweep.L_end);
        cfg.sweep.L_step = get_number(s, "sweep", "L_step", cfg.sweep.L_step);
    }
    if (doc.contains("methods")) {
        const json& m = doc.at("methods");
        if (!m.is_array()) throw ConfigError("methods: expected an array of names");
        cfg.methods.clear();
        for (const json& item : m) {
            if (!item.is_string()) throw ConfigError("methods: entries must be strings");
            try {
                cfg.methods.push_back(method_from_name(item.get<std::string>()));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("methods: ") + e.what());
            }
        }
    }
    if (doc.contains("curty_full")) {
        if (!doc.at("curty_full").is_boolean()) {
            throw ConfigError("curty_full: expected a boolean");
        }
        cfg.curty_full = doc.at("curty_full").get<bool>();
    }
    if (doc.contains("round_counts")) {
        if (!doc.at("round_counts").is_boolean()) {
            throw ConfigError("round_counts: expected a boolean");
        }
        cfg.round_counts = doc.at("round_counts").get<bool>();
    }

    cfg.validate();
    return cfg;
}

}  // namespace finitekey::cli
