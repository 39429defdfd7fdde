#include "dmcv/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dmcv/operators.hpp"
#include "dmcv/rng.hpp"
#include "dmcv/special_math.hpp"

namespace dmcv {

namespace {

// golden-section maximisation of a unimodal scalar function
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters, double* best_arg) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < iters; ++i) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    double arg = (fc >= fd) ? c : d;
    if (best_arg != nullptr) *best_arg = arg;
    return std::max(fc, fd);
}

std::string point_error(const std::exception& e) {
    return std::string("solver: ") + e.what();
}

}  // namespace

Pipeline::Pipeline(Config cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

namespace {
// tangent points on the scale of the observed top probability, pushed inside
// their admissible intervals
LinearisationPoints points_at_scale(double q_top, double kappa, double scale) {
    double base = std::max(q_top, 1e-12) * scale;
    LinearisationPoints pts;
    pts.nu_c = std::min(base, 0.6 * 2.0 / (3.0 * kappa));
    pts.nu_l = std::min(base, 0.9 * (5.0 + std::sqrt(5.0)) / (10.0 * kappa));
    pts.nu_u = std::min(base, 0.9 * (5.0 - std::sqrt(5.0)) / (10.0 * kappa));
    return pts;
}
}  // namespace

LinearisationPoints Pipeline::auto_points(double q_top, double kappa) const {
    return points_at_scale(q_top, kappa, cfg_.lin_scale);
}

KeyRateReport Pipeline::evaluate_point(double loss_db, double n_rounds, bool asymptotic) const {
    const SweepSpec& sw = cfg_.sweep;
    const double gamma = cfg_.protocol.gamma;
    const double gamma_eff = asymptotic ? 0.0 : gamma;
    const int top = Score::top().test_index();

    ChannelParams chan = cfg_.channel;
    chan.eta = eta_from_loss_db(loss_db);

    std::vector<double> alphas =
        sw.optimize_alpha ? sw.alpha_grid : std::vector<double>{cfg_.protocol.alpha};
    std::vector<double> chi_duals =
        sw.optimize_chi_dual ? sw.chi_dual_grid : std::vector<double>{chan.chi_dual};

    KeyRateReport best;
    best.loss_db = loss_db;
    best.n_rounds = asymptotic ? 0.0 : n_rounds;
    best.gamma = gamma;
    best.eps_sec = cfg_.protocol.eps.sec;
    best.eps_cor = cfg_.protocol.eps.cor;
    best.eps_com_pe = cfg_.protocol.eps.com_pe;
    best.status = "failed";
    double best_score = -std::numeric_limits<double>::infinity();
    std::string first_error;

    for (double alpha : alphas) {
        ProtocolParams params = cfg_.protocol;
        params.alpha = alpha;
        params.n_rounds = std::max(n_rounds, 1.0);

        HonestStatistics stats;
        TruncatedOperators ops;
        try {
            stats = honest_statistics(params, chan, chan.chi);
            ops = build_operators(params);
        } catch (const std::exception& e) {
            if (first_error.empty()) first_error = point_error(e);
            continue;
        }
        const double q_top_honest = stats.q(top);
        const double leak_h = cfg_.leak_reverse ? stats.h_z_given_x : stats.h_x_given_z;

        // candidate tangent points
        std::vector<LinearisationPoints> nu_candidates;
        if ((sw.continuity_penalty || sw.statistical_corrections) && sw.optimize_nu) {
            for (double mult : {6.0, 60.0, 600.0})
                nu_candidates.push_back(points_at_scale(q_top_honest, ops.kappa, mult));
        } else if (cfg_.lin_auto) {
            nu_candidates.push_back(auto_points(q_top_honest, ops.kappa));
        } else {
            nu_candidates.push_back(cfg_.lin);
        }

        // one program per alpha; corrections swap cheaply and re-solves warm
        std::unique_ptr<EntropySdp> sdp;
        for (const auto& pts : nu_candidates) {
            CorrectionSet cs;
            try {
                cs = make_corrections(pts, ops.kappa, params.d_z);
            } catch (const std::exception& e) {
                if (first_error.empty()) first_error = point_error(e);
                continue;
            }
            cs.continuity_enabled = sw.continuity_penalty;
            cs.statistical_enabled = sw.statistical_corrections;

            for (double chi_dual : chi_duals) {
                try {
                    Eigen::VectorXd q_dual =
                        (chi_dual == chan.chi) ? stats.q
                                               : honest_statistics(params, chan, chi_dual).q;
                    if (!sdp) {
                        EntropySdpOptions opt;
                        opt.reduce_z4 = cfg_.reduce_z4;
                        opt.solver = cfg_.solver;
                        sdp = std::make_unique<EntropySdp>(ops, gauss_radau(params.quad_order),
                                                           cs, gamma_eff, opt);
                    } else {
                        sdp->set_corrections(cs);
                    }
                    auto cert = sdp->solve(q_dual);
                    double certified = sdp->verify(cert);
                    auto g = assemble_g(*sdp, cert);

                    KeyRateReport rep;
                    rep.loss_db = loss_db;
                    rep.n_rounds = asymptotic ? 0.0 : n_rounds;
                    rep.alpha = alpha;
                    rep.gamma = gamma;
                    rep.nu_c = pts.nu_c;
                    rep.nu_l = pts.nu_l;
                    rep.nu_u = pts.nu_u;
                    rep.chi_dual = chi_dual;
                    rep.entropy_certified = certified;
                    rep.g_at_q = g.evaluate(stats.q);
                    rep.g_corr_honest = cs.g_corr(q_top_honest);
                    rep.eps_sec = cfg_.protocol.eps.sec;
                    rep.eps_cor = cfg_.protocol.eps.cor;
                    rep.eps_com_pe = cfg_.protocol.eps.com_pe;

                    double score;
                    if (asymptotic) {
                        double leak_rate = stats.pass_prob * leak_h;
                        rep.h = rep.g_at_q;
                        rep.leak_ec = leak_rate;
                        rep.rate = rep.g_at_q - leak_rate;
                        rep.key_len = 0.0;
                        rep.status = rep.rate > 0.0 ? "positive" : "zero";
                        score = rep.rate;
                    } else {
                        auto f = min_tradeoff_from_g(g, gamma);
                        // acceptance box over the full alphabet
                        Eigen::VectorXd p_full(Score::kTestAlphabet + 1);
                        for (int c = 0; c < Score::kTestAlphabet; ++c)
                            p_full(c) = gamma * stats.q(c);
                        p_full(Score::kTestAlphabet) = 1.0 - gamma;
                        Eigen::VectorXd budgets = Eigen::VectorXd::Constant(
                            p_full.size(), cfg_.protocol.eps.com_pe / p_full.size());
                        auto acc = build_acceptance(p_full, n_rounds, budgets);
                        double h = floor_over_acceptance(f, acc);
                        rep.h = h;

                        double leak_ec =
                            n_rounds * (1.0 - gamma) * stats.pass_prob * leak_h;
                        double l_ev =
                            static_cast<double>(ev_hash_length(cfg_.protocol.eps.cor));
                        rep.leak_ec = leak_ec;
                        rep.l_ev = l_ev;

                        double eps_sec = cfg_.protocol.eps.sec;
                        double eps_s = cfg_.protocol.eps.s;
                        double eps_ea = cfg_.protocol.eps.ea;

                        GeatTerms terms;
                        auto ell_at = [&](double beta, double es, double ea) {
                            auto t = geat_bound(f, h, n_rounds, beta, cfg_.protocol.d_z, es, ea);
                            return key_length(t.bound_bits, leak_ec, l_ev, es, ea, eps_sec);
                        };
                        double beta = 1e-6;
                        if (sw.optimize_beta) {
                            double lnb;
                            golden_max(
                                [&](double t) { return ell_at(std::exp(t), eps_s, eps_ea); },
                                std::log(1e-12), std::log(0.49), 80, &lnb);
                            beta = std::exp(lnb);
                        }
                        if (sw.optimize_eps_split) {
                            double x;
                            golden_max(
                                [&](double t) {
                                    return ell_at(beta, eps_s, eps_sec * std::exp(t));
                                },
                                std::log(1e-6), std::log(0.9), 40, &x);
                            eps_ea = eps_sec * std::exp(x);
                            golden_max(
                                [&](double t) {
                                    return ell_at(beta, eps_sec * std::exp(t), eps_ea);
                                },
                                std::log(1e-6), std::log(0.49), 40, &x);
                            eps_s = eps_sec * std::exp(x);
                        }
                        terms = geat_bound(f, h, n_rounds, beta, cfg_.protocol.d_z, eps_s,
                                           eps_ea);
                        double ell = key_length(terms.bound_bits, leak_ec, l_ev, eps_s, eps_ea,
                                                eps_sec);
                        rep.beta = beta;
                        rep.eps_s = eps_s;
                        rep.eps_ea = eps_ea;
                        rep.v_term = terms.v;
                        rep.k_beta = terms.k_beta;
                        rep.hmin_bound = terms.bound_bits;
                        rep.key_len = ell;
                        rep.rate = ell / n_rounds;
                        rep.status = ell > 0.0 ? "positive" : "zero";
                        score = ell;
                    }
                    if (score > best_score) {
                        best_score = score;
                        best = rep;
                    }
                } catch (const std::exception& e) {
                    if (first_error.empty()) first_error = point_error(e);
                }
            }
        }
    }
    if (best.status == "failed" && !first_error.empty()) {
        best.h = std::nan("");
        best.rate = std::nan("");
    }
    return best;
}

KeyRateReport Pipeline::keyrate_point(double loss_db, double n_rounds) {
    return evaluate_point(loss_db, n_rounds, false);
}

KeyRateReport Pipeline::asymptotic_point(double loss_db) {
    return evaluate_point(loss_db, 0.0, true);
}

SweepResult Pipeline::run_sweep() {
    const SweepSpec& sw = cfg_.sweep;
    std::vector<double> losses = sw.loss_db.empty() ? std::vector<double>{cfg_.loss_db}
                                                    : sw.loss_db;
    std::vector<double> ns = sw.n_rounds.empty()
                                 ? std::vector<double>{cfg_.protocol.n_rounds}
                                 : sw.n_rounds;
    bool asym = sw.mode == "asymptotic";

    struct Task {
        double loss;
        double n;
    };
    std::vector<Task> tasks;
    for (double l : losses) {
        if (asym)
            tasks.push_back({l, 0.0});
        else
            for (double n : ns) tasks.push_back({l, n});
    }

    SweepResult out;
    out.reports.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    int workers = std::max(1, sw.workers);
    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            out.reports[i] = asym ? evaluate_point(tasks[i].loss, 0.0, true)
                                  : evaluate_point(tasks[i].loss, tasks[i].n, false);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

CompletenessResult Pipeline::simulate_completeness(long long trials, double budget_total,
                                                   double n_rounds) {
    ProtocolParams params = cfg_.protocol;
    ChannelParams chan = cfg_.channel;
    auto stats = honest_statistics(params, chan, chan.chi);
    const double gamma = params.gamma;

    Eigen::VectorXd p_full(Score::kTestAlphabet + 1);
    for (int c = 0; c < Score::kTestAlphabet; ++c) p_full(c) = gamma * stats.q(c);
    p_full(Score::kTestAlphabet) = 1.0 - gamma;

    Eigen::VectorXd budgets =
        Eigen::VectorXd::Constant(p_full.size(), budget_total / p_full.size());
    auto acc = build_acceptance(p_full, n_rounds, budgets);

    std::vector<double> probs(p_full.data(), p_full.data() + p_full.size());
    RandomStream rng(cfg_.seed);
    long long aborts = 0;
    long long n = static_cast<long long>(n_rounds);
    Eigen::VectorXd freq(p_full.size());
    for (long long t = 0; t < trials; ++t) {
        auto counts = rng.multinomial(n, probs);
        for (int c = 0; c < freq.size(); ++c)
            freq(c) = static_cast<double>(counts[c]) / static_cast<double>(n);
        if (!acc.contains(freq)) ++aborts;
    }

    CompletenessResult res;
    res.trials = trials;
    res.aborts = aborts;
    res.budget = budget_total;
    res.abort_rate = static_cast<double>(aborts) / static_cast<double>(trials);
    // Wilson interval at z = 1.96
    double z = 1.96, phat = res.abort_rate, nn = static_cast<double>(trials);
    double denom = 1.0 + z * z / nn;
    double centre = (phat + z * z / (2.0 * nn)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / nn + z * z / (4.0 * nn * nn)) / denom;
    res.wilson_low = std::max(0.0, centre - half);
    res.wilson_high = std::min(1.0, centre + half);
    return res;
}

std::string SweepResult::csv() const {
    std::ostringstream os;
    os << KeyRateReport::csv_header() << '\n';
    for (const auto& r : reports) os << r.csv_row() << '\n';
    return os.str();
}

std::string SweepResult::json_sidecar(const Config& cfg) const {
    nlohmann::json j;
    j["config_yaml"] = config_to_yaml(cfg);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(nlohmann::json::parse(r.to_json()));
    j["reports"] = arr;
    return j.dump(2);
}

}  // namespace dmcv
