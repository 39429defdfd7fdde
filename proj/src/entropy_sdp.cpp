#include "dmcv/entropy_sdp.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace dmcv {

namespace {
const std::complex<double> kI(0.0, 1.0);

std::complex<double> ipow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}
}  // namespace

EntropySdp::EntropySdp(const TruncatedOperators& ops, const QuadratureRule& rule,
                       const CorrectionSet& corrections, double gamma, EntropySdpOptions options)
    : corrections_(corrections), options_(std::move(options)), gamma_(gamma),
      kappa_(ops.kappa), dim_ab_(ops.dim_ab()), quad_order_(rule.order()) {
    build(ops, rule);
}

void EntropySdp::add_tie(int blk_a, int ia, int ja, int blk_b, int ib, int jb,
                         std::complex<double> phase) {
    // X_a(ia,ja) - phase * X_b(ib,jb) = 0, as one or two real rows
    bool both_diag = (ia == ja) && (ib == jb) && phase.imag() == 0.0;
    int r1 = prog_.new_row(0.0);
    prog_.row_add_entry(r1, blk_a, ia, ja, 1.0);
    prog_.row_add_entry(r1, blk_b, ib, jb, -phase);
    rhs_affine_.push_back({0.0, Eigen::VectorXd::Zero(Score::kTestAlphabet)});
    if (both_diag) return;
    int r2 = prog_.new_row(0.0);
    prog_.row_add_entry(r2, blk_a, ia, ja, -kI);
    prog_.row_add_entry(r2, blk_b, ib, jb, kI * phase);
    rhs_affine_.push_back({0.0, Eigen::VectorXd::Zero(Score::kTestAlphabet)});
}

void EntropySdp::add_invariance_rows(int nb) {
    // sigma = U sigma U^dag entrywise: sigma(shift(i), shift(j)) = i^(n_i - n_j) sigma(i, j).
    // Walk each entry orbit and keep only rows that increase rank (orbits can
    // fold onto their Hermitian mirrors, which would otherwise produce
    // dependent rows and a singular A A^T).
    const int nab = dim_ab_;
    auto shift = [&](int idx) {
        int a = idx / nb, n = idx % nb;
        return ((a + 1) % 4) * nb + n;
    };
    std::vector<bool> visited(static_cast<std::size_t>(nab) * nab, false);
    auto key = [&](int i, int j) {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i) * nab + j;
    };

    std::vector<std::vector<std::pair<int, double>>> kept;  // orbit-local basis
    for (int i0 = 0; i0 < nab; ++i0) {
        for (int j0 = i0; j0 < nab; ++j0) {
            if (visited[key(i0, j0)]) continue;
            kept.clear();
            std::complex<double> step_phase = ipow((i0 % nb) - (j0 % nb));
            int ci = i0, cj = j0;
            std::complex<double> acc(1.0, 0.0);
            visited[key(i0, j0)] = true;
            for (int s = 1; s < 4; ++s) {
                ci = shift(ci);
                cj = shift(cj);
                acc *= step_phase;
                visited[key(ci, cj)] = true;
                // candidate rows: X(ci,cj) - acc * X(i0,j0) = 0
                for (int part = 0; part < 2; ++part) {
                    std::size_t mark = prog_.triplet_mark();
                    int row = prog_.new_row(0.0);
                    if (part == 0) {
                        prog_.row_add_entry(row, blk_sigma_, ci, cj, 1.0);
                        prog_.row_add_entry(row, blk_sigma_, i0, j0, -acc);
                    } else {
                        prog_.row_add_entry(row, blk_sigma_, ci, cj, -kI);
                        prog_.row_add_entry(row, blk_sigma_, i0, j0, kI * acc);
                    }
                    auto ents = prog_.entries_since(mark);
                    // combine duplicate parameters
                    std::map<int, double> dense;
                    for (auto [p, v] : ents) dense[p] += v;
                    std::vector<std::pair<int, double>> vec(dense.begin(), dense.end());
                    // Gram-Schmidt against rows kept for this orbit
                    double norm0 = 0.0;
                    for (auto& [p, v] : vec) norm0 += v * v;
                    for (const auto& base : kept) {
                        double dot = 0.0, nb2 = 0.0;
                        for (auto& [p, v] : base) {
                            nb2 += v * v;
                            for (auto& [p2, v2] : vec)
                                if (p2 == p) dot += v * v2;
                        }
                        if (nb2 == 0.0) continue;
                        double f = dot / nb2;
                        for (auto& [p, v] : base) {
                            bool found = false;
                            for (auto& [p2, v2] : vec)
                                if (p2 == p) {
                                    v2 -= f * v;
                                    found = true;
                                }
                            if (!found && f * v != 0.0) vec.emplace_back(p, -f * v);
                        }
                    }
                    double resid = 0.0;
                    for (auto& [p, v] : vec) resid += v * v;
                    if (norm0 == 0.0 || resid < 1e-16 * norm0) {
                        prog_.pop_row();
                    } else {
                        kept.push_back(vec);
                        rhs_affine_.push_back({0.0, Eigen::VectorXd::Zero(Score::kTestAlphabet)});
                    }
                }
            }
        }
    }
}

void EntropySdp::build(const TruncatedOperators& ops, const QuadratureRule& rule) {
    const int nab = dim_ab_;
    const int nb = ops.dim_b;
    const int m = rule.order();
    const double pref = 1.0 - gamma_;
    const double ln2 = std::log(2.0);

    blk_sigma_ = prog_.add_hermitian_block(nab);

    // z list: reduced keeps only z = 0 with a factor-4 collapsed coefficient
    std::vector<int> zs = options_.reduce_z4 ? std::vector<int>{0}
                                             : std::vector<int>{0, 1, 2, 3};
    double zmult = options_.reduce_z4 ? 4.0 : 1.0;

    struct MomentBlock {
        int blk_e, blk_t;
    };
    std::vector<MomentBlock> moments;
    for (int i = 0; i < m; ++i)
        for (int z : zs) {
            (void)z;
            moments.push_back({prog_.add_hermitian_block(2 * nab),
                               prog_.add_hermitian_block(2 * nab)});
        }
    blk_zeta_ = prog_.add_hermitian_block(8);

    // objective
    double csum = 0.0;
    for (int i = 0; i < m; ++i) csum += rule.weights[i] / (rule.nodes[i] * ln2);
    prog_.add_objective(blk_sigma_, (pref * csum) * ops.p_ps);

    int bidx = 0;
    for (int i = 0; i < m; ++i) {
        double ci = rule.weights[i] / (rule.nodes[i] * ln2);
        double ti = rule.nodes[i];
        for (int z : zs) {
            Matrix qz = Matrix::Zero(nab, nab);
            for (int a = 0; a < 4; ++a) qz.block(a * nb, a * nb, nb, nb) = ops.key_povm[z];
            double s = zmult * pref * ci;
            Matrix ce = Matrix::Zero(2 * nab, 2 * nab);
            ce.block(0, nab, nab, nab) = s * qz;
            ce.block(nab, 0, nab, nab) = s * qz;  // qz Hermitian
            ce.block(nab, nab, nab, nab) = s * (1.0 - ti) * qz;
            prog_.add_objective(moments[bidx].blk_e, ce);
            Matrix ct = Matrix::Zero(2 * nab, 2 * nab);
            ct.block(nab, nab, nab, nab) = s * ti * ops.p_ps;
            prog_.add_objective(moments[bidx].blk_t, ct);
            ++bidx;
        }
    }

    // corner ties: TL of every moment block equals sigma
    for (const auto& mb : moments) {
        for (int i = 0; i < nab; ++i)
            for (int j = i; j < nab; ++j) {
                add_tie(mb.blk_e, i, j, blk_sigma_, i, j, 1.0);
                add_tie(mb.blk_t, i, j, blk_sigma_, i, j, 1.0);
            }
        // omega ties: E-block TR equals T-block BL (Hermitian mirror of its TR)
        for (int r = 0; r < nab; ++r)
            for (int c = 0; c < nab; ++c)
                add_tie(mb.blk_e, r, nab + c, mb.blk_t, nab + r, c, 1.0);
    }

    // A fully pinned sigma determines the invariance rows, which would make
    // A A^T singular; pinning is only sound with a Z4-invariant target.
    if (options_.reduce_z4 && !options_.pin_sigma) add_invariance_rows(nb);

    // trace-distance block: zeta TR corner = Tr_B sigma - rho_A^target
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            std::complex<double> rhs = -ops.rho_a_target(i, j);
            int r1 = prog_.new_row(rhs.real());
            prog_.row_add_entry(r1, blk_zeta_, i, 4 + j, 1.0);
            for (int n = 0; n < nb; ++n)
                prog_.row_add_entry(r1, blk_sigma_, i * nb + n, j * nb + n, -1.0);
            rhs_affine_.push_back({rhs.real(), Eigen::VectorXd::Zero(Score::kTestAlphabet)});
            int r2 = prog_.new_row(rhs.imag());
            prog_.row_add_entry(r2, blk_zeta_, i, 4 + j, -kI);
            for (int n = 0; n < nb; ++n)
                prog_.row_add_entry(r2, blk_sigma_, i * nb + n, j * nb + n, kI);
            rhs_affine_.push_back({rhs.imag(), Eigen::VectorXd::Zero(Score::kTestAlphabet)});
        }

    // scalar constraints; the affine right-hand sides are filled afterwards so
    // the linearisation points can be swapped without rebuilding the program
    Matrix eye_ab = Matrix::Identity(nab, nab);
    {  // Tr sigma <= 1
        row_norm_upper_ = prog_.new_row(1.0);
        prog_.row_add_inner(row_norm_upper_, blk_sigma_, eye_ab);
        prog_.row_add_param(row_norm_upper_, prog_.add_slack(), 1.0);
        rhs_affine_.push_back({});
    }
    {  // Tr sigma >= 1 - kappa q_top
        row_norm_lower_ = prog_.new_row(1.0);
        prog_.row_add_inner(row_norm_lower_, blk_sigma_, eye_ab);
        prog_.row_add_param(row_norm_lower_, prog_.add_slack(), -1.0);
        rhs_affine_.push_back({});
    }
    {  // Tr zeta1 + Tr zeta2 <= kappa q_top
        row_dist_ = prog_.new_row(0.0);
        prog_.row_add_inner(row_dist_, blk_zeta_, Matrix::Identity(8, 8));
        prog_.row_add_param(row_dist_, prog_.add_slack(), 1.0);
        rhs_affine_.push_back({});
    }
    for (int c = 0; c < Score::kTestAlphabet; ++c) {
        {  // Tr[sigma Pi_c] <= q_c - xi_hat_U(q_top)
            int row = prog_.new_row(0.0);
            prog_.row_add_inner(row, blk_sigma_, ops.test_povm[c]);
            prog_.row_add_param(row, prog_.add_slack(), 1.0);
            rhs_affine_.push_back({});
            row_stat_upper_[c] = row;
        }
        {  // Tr[sigma Pi_c] >= q_c - xi_hat_L(q_top)
            int row = prog_.new_row(0.0);
            prog_.row_add_inner(row, blk_sigma_, ops.test_povm[c]);
            prog_.row_add_param(row, prog_.add_slack(), -1.0);
            rhs_affine_.push_back({});
            row_stat_lower_[c] = row;
        }
    }
    refresh_correction_rows();

    if (options_.pin_sigma.has_value()) {
        const Matrix& pin = *options_.pin_sigma;
        if (pin.rows() != nab || pin.cols() != nab)
            throw std::invalid_argument("pin_sigma: dimension mismatch");
        for (int i = 0; i < nab; ++i)
            for (int j = i; j < nab; ++j) {
                int r1 = prog_.new_row(pin(i, j).real());
                prog_.row_add_entry(r1, blk_sigma_, i, j, 1.0);
                rhs_affine_.push_back({pin(i, j).real(),
                                       Eigen::VectorXd::Zero(Score::kTestAlphabet)});
                if (i == j) continue;
                int r2 = prog_.new_row(pin(i, j).imag());
                prog_.row_add_entry(r2, blk_sigma_, i, j, -kI);
                rhs_affine_.push_back({pin(i, j).imag(),
                                       Eigen::VectorXd::Zero(Score::kTestAlphabet)});
            }
    }

    if (static_cast<int>(rhs_affine_.size()) != prog_.num_rows())
        throw std::logic_error("EntropySdp::build: rhs bookkeeping out of sync");
}

void EntropySdp::refresh_correction_rows() {
    const int top = Score::top().test_index();
    const bool on = corrections_.statistical_enabled;
    const double kap_stat = on ? kappa_ : 0.0;
    const double m_u = on ? corrections_.m_u : 0.0;
    const double c_u = on ? corrections_.c_u : 0.0;
    const double m_l = on ? corrections_.m_l : 0.0;
    const double c_l = on ? corrections_.c_l : 0.0;

    rhs_affine_[row_norm_upper_] = {1.0, Eigen::VectorXd::Zero(Score::kTestAlphabet)};
    Eigen::VectorXd bq = Eigen::VectorXd::Zero(Score::kTestAlphabet);
    bq(top) = -kap_stat;
    rhs_affine_[row_norm_lower_] = {1.0, bq};
    bq.setZero();
    bq(top) = kap_stat;
    rhs_affine_[row_dist_] = {0.0, bq};
    for (int c = 0; c < Score::kTestAlphabet; ++c) {
        bq.setZero();
        bq(c) += 1.0;
        bq(top) -= m_u;
        rhs_affine_[row_stat_upper_[c]] = {-c_u, bq};
        bq.setZero();
        bq(c) += 1.0;
        bq(top) -= m_l;
        rhs_affine_[row_stat_lower_[c]] = {-c_l, bq};
    }
}

void EntropySdp::set_corrections(const CorrectionSet& corrections) {
    corrections_ = corrections;
    refresh_correction_rows();
}

Eigen::VectorXd EntropySdp::rhs_vector(const Eigen::VectorXd& q) const {
    if (q.size() != Score::kTestAlphabet)
        throw std::invalid_argument("EntropySdp: q must have 9 entries");
    Eigen::VectorXd b(prog_.num_rows());
    for (int r = 0; r < prog_.num_rows(); ++r)
        b(r) = rhs_affine_[r].b0 + rhs_affine_[r].bq.dot(q);
    if (options_.clamp_stat_rhs) {
        for (int c = 0; c < Score::kTestAlphabet; ++c) {
            double& up = b(row_stat_upper_[c]);
            if (up > 1.0) up = 1.0;  // Tr[sigma Pi] <= 1 holds anyway
            double& lo = b(row_stat_lower_[c]);
            if (lo < 0.0) lo = 0.0;  // Tr[sigma Pi] >= 0 holds anyway
        }
    }
    return b;
}

DualCertificate EntropySdp::solve(const Eigen::VectorXd& q) {
    Eigen::VectorXd b = rhs_vector(q);
    for (int r = 0; r < prog_.num_rows(); ++r) prog_.set_rhs(r, b(r));

    // The verifier is the acceptance authority: keep tightening until the
    // extracted dual actually passes it (or the budget runs out).
    ConicProgram::Settings settings = options_.solver;
    std::string last_error;
    int total_iters = 0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        auto sol = prog_.solve(settings, warm_ ? &*warm_ : nullptr);
        total_iters += sol.iterations;
        warm_ = sol;
        if (!sol.converged) {
            std::ostringstream msg;
            msg << "EntropySdp::solve: solver did not converge (primal residual "
                << sol.primal_residual << ", dual residual " << sol.dual_residual << ", gap "
                << sol.gap << " after " << total_iters << " iterations)";
            last_error = msg.str();
            break;
        }
        DualCertificate cert;
        cert.y = clip_named_duals(sol.y);
        cert.q = q;
        cert.primal_value = sol.primal_obj;
        cert.dual_value = b.dot(cert.y);
        cert.iterations = total_iters;
        cert.solver_converged = sol.converged;
        name_duals(cert);
        try {
            DualCertificate probe = cert;
            verify(probe);
            return cert;
        } catch (const std::exception& e) {
            last_error = e.what();
            settings.tol *= 0.2;
        }
    }
    throw std::runtime_error("EntropySdp::solve: no verifiable certificate (" + last_error + ")");
}

Eigen::VectorXd EntropySdp::clip_named_duals(const Eigen::VectorXd& y_in) const {
    // sub-tolerance sign violations on the inequality-row duals are solver
    // noise; zero them out (larger violations are left for verify to reject)
    Eigen::VectorXd y = y_in;
    auto clip = [&](int row, double sgn) {
        double lam = sgn * y(row);
        if (lam < 0.0 && lam > -1e-7) y(row) = 0.0;
    };
    clip(row_norm_upper_, -1.0);
    clip(row_norm_lower_, 1.0);
    clip(row_dist_, -1.0);
    for (int c = 0; c < Score::kTestAlphabet; ++c) {
        clip(row_stat_upper_[c], -1.0);
        clip(row_stat_lower_[c], 1.0);
    }
    return y;
}

void EntropySdp::name_duals(DualCertificate& cert) const {
    cert.lambda_norm = cert.y(row_norm_lower_);
    cert.lambda_dist = -cert.y(row_dist_);
    for (int c = 0; c < Score::kTestAlphabet; ++c) {
        cert.lambda_upper[c] = -cert.y(row_stat_upper_[c]);
        cert.lambda_lower[c] = cert.y(row_stat_lower_[c]);
    }
    double phi = 0.0;
    for (int r = 0; r < prog_.num_rows(); ++r) phi += cert.y(r) * rhs_affine_[r].b0;
    cert.phi = phi;
}

double EntropySdp::verify(DualCertificate& cert) const {
    if (cert.y.size() != prog_.num_rows())
        throw std::runtime_error("verify: certificate does not match problem");
    const double sign_tol = 1e-7;
    const double psd_tol = 1e-7;

    // named-dual sign conditions (cone duals of the inequality slacks);
    // sub-tolerance negatives are numerical zeros and get clipped before the
    // slack matrices are recomputed from the clipped vector.
    Eigen::VectorXd y = clip_named_duals(cert.y);
    auto check_sign = [&](int row, double sgn, const char* what) {
        if (sgn * y(row) < -sign_tol)
            throw std::runtime_error(std::string("verify: negative dual on ") + what);
    };
    check_sign(row_norm_upper_, -1.0, "norm upper row");
    check_sign(row_norm_lower_, 1.0, "norm lower row");
    check_sign(row_dist_, -1.0, "distance row");
    for (int c = 0; c < Score::kTestAlphabet; ++c) {
        check_sign(row_stat_upper_[c], -1.0, "statistical upper row");
        check_sign(row_stat_lower_[c], 1.0, "statistical lower row");
    }

    // dual slack must lie in the dual cone
    Eigen::VectorXd s = prog_.dual_slack(y);
    double worst_psd = 0.0;
    for (int k = 0; k < prog_.num_blocks(); ++k) {
        Matrix sk = prog_.param_to_matrix(k, s);
        Eigen::SelfAdjointEigenSolver<Matrix> es(sk);
        double mn = es.eigenvalues().minCoeff();
        if (-mn > worst_psd) worst_psd = -mn;
    }
    cert.max_psd_violation = worst_psd;
    double worst_slack = 0.0;
    for (int p : prog_.slack_param_indices())
        if (-s(p) > worst_slack) worst_slack = -s(p);
    cert.max_slack_violation = worst_slack;

    if (worst_psd > psd_tol || worst_slack > psd_tol) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", std::max(worst_psd, worst_slack));
        throw std::runtime_error(std::string("verify: dual slack leaves the dual cone (violation ") +
                                 buf + ")");
    }

    Eigen::VectorXd b = rhs_vector(cert.q);
    double certified = b.dot(y);
    cert.certified_value = certified;
    cert.y = y;
    cert.verified = true;
    name_duals(cert);
    return certified;
}

std::string EntropySdp::snapshot_json(const DualCertificate* cert) const {
    nlohmann::json j;
    j["kind"] = "entropy-sdp-snapshot";
    j["dim_ab"] = dim_ab_;
    j["quad_order"] = quad_order_;
    j["gamma"] = gamma_;
    j["kappa"] = kappa_;
    j["reduced"] = options_.reduce_z4;
    j["rows"] = prog_.num_rows();
    j["params"] = prog_.num_params();
    j["corrections"] = {{"m_corr", corrections_.m_corr}, {"c_corr", corrections_.c_corr},
                        {"m_l", corrections_.m_l},       {"c_l", corrections_.c_l},
                        {"m_u", corrections_.m_u},       {"c_u", corrections_.c_u},
                        {"nu_c", corrections_.nu_c},
                        {"continuity", corrections_.continuity_enabled},
                        {"statistical", corrections_.statistical_enabled}};
    if (cert != nullptr) {
        nlohmann::json c;
        c["q"] = std::vector<double>(cert->q.data(), cert->q.data() + cert->q.size());
        c["primal_value"] = cert->primal_value;
        c["dual_value"] = cert->dual_value;
        c["certified_value"] = cert->certified_value;
        c["phi"] = cert->phi;
        c["lambda_norm"] = cert->lambda_norm;
        c["lambda_dist"] = cert->lambda_dist;
        c["lambda_upper"] = cert->lambda_upper;
        c["lambda_lower"] = cert->lambda_lower;
        c["verified"] = cert->verified;
        c["iterations"] = cert->iterations;
        c["max_psd_violation"] = cert->max_psd_violation;
        c["y"] = std::vector<double>(cert->y.data(), cert->y.data() + cert->y.size());
        j["certificate"] = c;
    }
    return j.dump(2);
}

}  // namespace dmcv
