// Command-line front end: certified key-rate evaluation, sweeps, the
// completeness Monte Carlo, operator dumps, and a quick self test.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "dmcv/channel.hpp"
#include "dmcv/operators.hpp"
#include "dmcv/pipeline.hpp"
#include "dmcv/special_math.hpp"

using namespace dmcv;

namespace {

int fail(const std::string& stage, const std::string& what) {
    nlohmann::json err;
    err["error"] = what;
    err["stage"] = stage;
    std::cerr << err.dump() << std::endl;
    return 2;
}

Config load_or_default(const std::string& path) {
    return path.empty() ? default_config() : load_config(path);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << content;
}

void apply_overrides(Config& cfg, double loss, double rounds, std::uint64_t seed, int workers,
                     bool no_cont, bool no_stat) {
    if (loss >= 0.0) {
        cfg.loss_db = loss;
        cfg.channel.eta = eta_from_loss_db(loss);
    }
    if (rounds > 0.0) cfg.protocol.n_rounds = rounds;
    if (seed != 0) cfg.seed = seed;
    if (workers > 0) cfg.sweep.workers = workers;
    if (no_cont) cfg.sweep.continuity_penalty = false;
    if (no_stat) cfg.sweep.statistical_corrections = false;
}

int run_selftest() {
    // quick internal checks: quadrature, channel normalisation, a small solve
    auto r = gauss_radau(4);
    for (int k = 0; k <= 6; ++k) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
        if (std::abs(s - 1.0 / (k + 1)) > 1e-9) return fail("selftest", "quadrature exactness");
    }
    ChannelParams ch{0.9, 0.05, 0.05};
    double full = region_probability(0, 0.0, std::numeric_limits<double>::infinity(), 0.0,
                                     2.0 * 3.14159265358979323846, ch, ch.chi, 0.7);
    if (std::abs(full - 1.0) > 1e-8) return fail("selftest", "channel normalisation");

    ProtocolParams p;
    p.n_max = 2;
    p.quad_order = 2;
    p.tau_min = 1.0;
    p.tau_max = 4.0;
    auto ops = build_operators(p);
    LinearisationPoints pts{0.02 / ops.kappa, 0.05 / ops.kappa, 0.02 / ops.kappa};
    auto cs = make_corrections(pts, ops.kappa, p.d_z);
    auto q = honest_statistics(p, ch, ch.chi).q;
    EntropySdp sdp(ops, gauss_radau(2), cs, p.gamma);
    auto cert = sdp.solve(q);
    double v = sdp.verify(cert);
    if (!(v > -1e-6 && v < std::log2(5.0))) return fail("selftest", "entropy bound range");
    if (cert.dual_value > cert.primal_value + 1e-6) return fail("selftest", "weak duality");
    std::cout << "selftest ok (entropy bound " << v << " bits)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified finite-size key rates for discrete-modulated CV-QKD"};
    app.require_subcommand(1);

    std::string config_path, out_path, json_path, snapshot_path;
    double loss = -1.0, rounds = 0.0, budget = 0.1;
    std::uint64_t seed = 0;
    long long trials = 10000;
    int workers = 0;
    bool no_cont = false, no_stat = false;

    app.add_option("--config", config_path, "YAML configuration file");
    app.add_option("--out", out_path, "output CSV path");
    app.add_option("--json", json_path, "JSON sidecar path");
    app.add_option("--seed", seed, "root RNG seed");
    app.add_option("--workers", workers, "worker threads for sweeps");
    app.add_flag("--no-continuity-penalty", no_cont, "drop the entropy continuity penalty");
    app.add_flag("--no-statistical-corrections", no_stat,
                 "drop the statistical-constraint corrections");

    auto* asym = app.add_subcommand("asymptotic", "asymptotic rate at one loss point");
    asym->add_option("--loss", loss, "channel loss in dB");
    asym->add_option("--snapshot", snapshot_path, "dump problem/certificate snapshot JSON");

    auto* key = app.add_subcommand("keyrate", "finite-size key rate at one point");
    key->add_option("--loss", loss, "channel loss in dB");
    key->add_option("--rounds", rounds, "number of protocol rounds N");
    key->add_option("--snapshot", snapshot_path, "dump problem/certificate snapshot JSON");

    auto* sweep = app.add_subcommand("sweep", "grid sweep per the config");

    auto* sim = app.add_subcommand("simulate", "completeness Monte Carlo");
    sim->add_option("--trials", trials, "number of multinomial trials");
    sim->add_option("--budget", budget, "total PE completeness budget");
    sim->add_option("--rounds", rounds, "number of protocol rounds N");

    auto* dump = app.add_subcommand("dump-operators", "write the operator family to a file");
    dump->add_option("--out", out_path, "destination file")->required();

    app.add_subcommand("selftest", "quick internal consistency checks");

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = load_or_default(config_path);
        apply_overrides(cfg, loss, rounds, seed, workers, no_cont, no_stat);

        if (app.got_subcommand("selftest")) return run_selftest();

        if (app.got_subcommand("dump-operators")) {
            auto ops = build_operators(cfg.protocol);
            dump_operators(ops, out_path);
            std::cout << "wrote " << out_path << "\n";
            return 0;
        }

        if (app.got_subcommand("asymptotic") || app.got_subcommand("keyrate")) {
            bool is_asym = app.got_subcommand("asymptotic");
            Pipeline pipe(cfg);
            KeyRateReport rep = is_asym ? pipe.asymptotic_point(cfg.loss_db)
                                        : pipe.keyrate_point(cfg.loss_db, cfg.protocol.n_rounds);
            std::cout << rep.to_json() << "\n";
            if (!out_path.empty())
                write_file(out_path, KeyRateReport::csv_header() + "\n" + rep.csv_row() + "\n");
            if (!snapshot_path.empty()) {
                // re-derive the certificate at the reported optimum for the dump
                ProtocolParams params = cfg.protocol;
                params.alpha = rep.alpha > 0.0 ? rep.alpha : params.alpha;
                auto ops = build_operators(params);
                ChannelParams chan = cfg.channel;
                chan.eta = eta_from_loss_db(cfg.loss_db);
                auto stats = honest_statistics(params, chan, rep.chi_dual);
                LinearisationPoints pts{rep.nu_c, rep.nu_l, rep.nu_u};
                auto cs = make_corrections(pts, ops.kappa, params.d_z);
                cs.continuity_enabled = cfg.sweep.continuity_penalty;
                cs.statistical_enabled = cfg.sweep.statistical_corrections;
                EntropySdpOptions opt;
                opt.reduce_z4 = cfg.reduce_z4;
                opt.solver = cfg.solver;
                EntropySdp sdp(ops, gauss_radau(params.quad_order), cs,
                               is_asym ? 0.0 : params.gamma, opt);
                auto cert = sdp.solve(stats.q);
                sdp.verify(cert);
                write_file(snapshot_path, sdp.snapshot_json(&cert));
            }
            if (rep.status == "failed") return fail(is_asym ? "asymptotic" : "keyrate",
                                                    "no candidate point solved");
            return 0;
        }

        if (app.got_subcommand("sweep")) {
            Pipeline pipe(cfg);
            auto res = pipe.run_sweep();
            std::string csv = res.csv();
            if (out_path.empty())
                std::cout << csv;
            else
                write_file(out_path, csv);
            if (!json_path.empty()) write_file(json_path, res.json_sidecar(cfg));
            for (const auto& r : res.reports)
                if (r.status == "failed") return fail("sweep", "at least one grid point failed");
            return 0;
        }

        if (app.got_subcommand("simulate")) {
            Pipeline pipe(cfg);
            double n = rounds > 0.0 ? rounds : cfg.protocol.n_rounds;
            auto res = pipe.simulate_completeness(trials, budget, n);
            nlohmann::json j;
            j["abort_rate"] = res.abort_rate;
            j["wilson_low"] = res.wilson_low;
            j["wilson_high"] = res.wilson_high;
            j["trials"] = res.trials;
            j["aborts"] = res.aborts;
            j["budget"] = res.budget;
            std::cout << j.dump() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        return fail("run", e.what());
    }
    return 0;
}
