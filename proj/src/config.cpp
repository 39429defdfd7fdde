#include "dmcv/config.hpp"

#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dmcv {

namespace {

template <typename T>
void maybe(const YAML::Node& node, const char* key, T& out) {
    if (node && node[key]) out = node[key].as<T>();
}

std::vector<double> as_grid(const YAML::Node& node) {
    std::vector<double> out;
    if (!node) return out;
    if (node.IsSequence()) {
        for (const auto& v : node) out.push_back(v.as<double>());
    } else {
        out.push_back(node.as<double>());
    }
    return out;
}

}  // namespace

void Config::validate() const {
    protocol.validate();
    channel.validate();
    if (!lin_auto) lin.validate(1.0);  // kappa-free sanity; full check happens at use
    if (sweep.mode != "asymptotic" && sweep.mode != "finite")
        throw std::domain_error("Config: sweep.mode must be asymptotic or finite");
    if (sweep.workers < 1) throw std::domain_error("Config: workers < 1");
    if (lin_scale <= 0.0) throw std::domain_error("Config: lin_scale <= 0");
}

Config default_config() {
    Config cfg;
    cfg.solver.tol = 2e-7;
    cfg.solver.max_iter = 120000;
    return cfg;
}

Config load_config(const std::string& path) {
    YAML::Node root = YAML::LoadFile(path);
    Config cfg = default_config();

    if (auto p = root["protocol"]) {
        maybe(p, "rounds", cfg.protocol.n_rounds);
        maybe(p, "alpha", cfg.protocol.alpha);
        maybe(p, "gamma", cfg.protocol.gamma);
        maybe(p, "tau_min_key", cfg.protocol.tau_min_key);
        maybe(p, "tau_min", cfg.protocol.tau_min);
        maybe(p, "tau_max", cfg.protocol.tau_max);
        maybe(p, "n_max", cfg.protocol.n_max);
        maybe(p, "quad_order", cfg.protocol.quad_order);
        maybe(p, "d_z", cfg.protocol.d_z);
    }
    if (auto e = root["epsilons"]) {
        maybe(e, "cor", cfg.protocol.eps.cor);
        maybe(e, "sec", cfg.protocol.eps.sec);
        maybe(e, "s", cfg.protocol.eps.s);
        maybe(e, "ea", cfg.protocol.eps.ea);
        maybe(e, "com_pe", cfg.protocol.eps.com_pe);
        maybe(e, "com_ec", cfg.protocol.eps.com_ec);
    }
    if (auto c = root["channel"]) {
        if (c["loss_db"]) {
            cfg.loss_db = c["loss_db"].as<double>();
            cfg.channel.eta = eta_from_loss_db(cfg.loss_db);
        }
        if (c["eta"]) {
            cfg.channel.eta = c["eta"].as<double>();
            cfg.loss_db = -10.0 * std::log10(cfg.channel.eta);
        }
        maybe(c, "chi", cfg.channel.chi);
        maybe(c, "chi_dual", cfg.channel.chi_dual);
    }
    if (auto l = root["linearisation"]) {
        maybe(l, "auto", cfg.lin_auto);
        maybe(l, "scale", cfg.lin_scale);
        maybe(l, "nu_c", cfg.lin.nu_c);
        maybe(l, "nu_l", cfg.lin.nu_l);
        maybe(l, "nu_u", cfg.lin.nu_u);
    }
    if (auto s = root["solver"]) {
        maybe(s, "tol", cfg.solver.tol);
        maybe(s, "max_iter", cfg.solver.max_iter);
        maybe(s, "rho", cfg.solver.rho);
        maybe(s, "verbose", cfg.solver.verbose);
        maybe(s, "reduce_z4", cfg.reduce_z4);
    }
    if (auto w = root["sweep"]) {
        cfg.sweep.loss_db = as_grid(w["loss_db"]);
        cfg.sweep.n_rounds = as_grid(w["n"]);
        maybe(w, "mode", cfg.sweep.mode);
        maybe(w, "continuity_penalty", cfg.sweep.continuity_penalty);
        maybe(w, "statistical_corrections", cfg.sweep.statistical_corrections);
        maybe(w, "workers", cfg.sweep.workers);
        maybe(w, "descent_rounds", cfg.sweep.descent_rounds);
        if (auto o = w["optimize"]) {
            maybe(o, "alpha", cfg.sweep.optimize_alpha);
            maybe(o, "beta", cfg.sweep.optimize_beta);
            maybe(o, "nu", cfg.sweep.optimize_nu);
            maybe(o, "chi_dual", cfg.sweep.optimize_chi_dual);
            maybe(o, "eps_split", cfg.sweep.optimize_eps_split);
        }
        if (auto g = w["alpha_grid"]) cfg.sweep.alpha_grid = as_grid(g);
        if (auto g = w["chi_dual_grid"]) cfg.sweep.chi_dual_grid = as_grid(g);
    }
    maybe(root, "seed", cfg.seed);
    maybe(root, "leak_reverse", cfg.leak_reverse);
    cfg.validate();
    return cfg;
}

std::string config_to_yaml(const Config& cfg) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "protocol" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "rounds" << YAML::Value << cfg.protocol.n_rounds;
    out << YAML::Key << "alpha" << YAML::Value << cfg.protocol.alpha;
    out << YAML::Key << "gamma" << YAML::Value << cfg.protocol.gamma;
    out << YAML::Key << "tau_min_key" << YAML::Value << cfg.protocol.tau_min_key;
    out << YAML::Key << "tau_min" << YAML::Value << cfg.protocol.tau_min;
    out << YAML::Key << "tau_max" << YAML::Value << cfg.protocol.tau_max;
    out << YAML::Key << "n_max" << YAML::Value << cfg.protocol.n_max;
    out << YAML::Key << "quad_order" << YAML::Value << cfg.protocol.quad_order;
    out << YAML::Key << "d_z" << YAML::Value << cfg.protocol.d_z;
    out << YAML::EndMap;
    out << YAML::Key << "epsilons" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cor" << YAML::Value << cfg.protocol.eps.cor;
    out << YAML::Key << "sec" << YAML::Value << cfg.protocol.eps.sec;
    out << YAML::Key << "s" << YAML::Value << cfg.protocol.eps.s;
    out << YAML::Key << "ea" << YAML::Value << cfg.protocol.eps.ea;
    out << YAML::Key << "com_pe" << YAML::Value << cfg.protocol.eps.com_pe;
    out << YAML::Key << "com_ec" << YAML::Value << cfg.protocol.eps.com_ec;
    out << YAML::EndMap;
    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "loss_db" << YAML::Value << cfg.loss_db;
    out << YAML::Key << "chi" << YAML::Value << cfg.channel.chi;
    out << YAML::Key << "chi_dual" << YAML::Value << cfg.channel.chi_dual;
    out << YAML::EndMap;
    out << YAML::Key << "linearisation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "auto" << YAML::Value << cfg.lin_auto;
    out << YAML::Key << "scale" << YAML::Value << cfg.lin_scale;
    out << YAML::Key << "nu_c" << YAML::Value << cfg.lin.nu_c;
    out << YAML::Key << "nu_l" << YAML::Value << cfg.lin.nu_l;
    out << YAML::Key << "nu_u" << YAML::Value << cfg.lin.nu_u;
    out << YAML::EndMap;
    out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tol" << YAML::Value << cfg.solver.tol;
    out << YAML::Key << "max_iter" << YAML::Value << cfg.solver.max_iter;
    out << YAML::Key << "reduce_z4" << YAML::Value << cfg.reduce_z4;
    out << YAML::EndMap;
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "mode" << YAML::Value << cfg.sweep.mode;
    out << YAML::Key << "loss_db" << YAML::Value << YAML::Flow << cfg.sweep.loss_db;
    out << YAML::Key << "n" << YAML::Value << YAML::Flow << cfg.sweep.n_rounds;
    out << YAML::Key << "continuity_penalty" << YAML::Value << cfg.sweep.continuity_penalty;
    out << YAML::Key << "statistical_corrections" << YAML::Value
        << cfg.sweep.statistical_corrections;
    out << YAML::Key << "workers" << YAML::Value << cfg.sweep.workers;
    out << YAML::Key << "descent_rounds" << YAML::Value << cfg.sweep.descent_rounds;
    out << YAML::Key << "alpha_grid" << YAML::Value << YAML::Flow << cfg.sweep.alpha_grid;
    out << YAML::Key << "chi_dual_grid" << YAML::Value << YAML::Flow << cfg.sweep.chi_dual_grid;
    out << YAML::Key << "optimize" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "alpha" << YAML::Value << cfg.sweep.optimize_alpha;
    out << YAML::Key << "beta" << YAML::Value << cfg.sweep.optimize_beta;
    out << YAML::Key << "nu" << YAML::Value << cfg.sweep.optimize_nu;
    out << YAML::Key << "chi_dual" << YAML::Value << cfg.sweep.optimize_chi_dual;
    out << YAML::Key << "eps_split" << YAML::Value << cfg.sweep.optimize_eps_split;
    out << YAML::EndMap;
    out << YAML::EndMap;
    out << YAML::Key << "seed" << YAML::Value << cfg.seed;
    out << YAML::Key << "leak_reverse" << YAML::Value << cfg.leak_reverse;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace dmcv
