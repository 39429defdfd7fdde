#include "dmcv/tradeoff.hpp"

#include <stdexcept>

namespace dmcv {

double AffineScoreFunction::evaluate(const Eigen::VectorXd& dist) const {
    if (dist.size() != coeff.size())
        throw std::invalid_argument("AffineScoreFunction: distribution size mismatch");
    return constant + coeff.dot(dist);
}

double AffineScoreFunction::max_over_simplex() const { return constant + coeff.maxCoeff(); }

double AffineScoreFunction::min_over_simplex() const { return constant + coeff.minCoeff(); }

AffineScoreFunction assemble_g(const EntropySdp& sdp, const DualCertificate& cert) {
    const auto& rows = sdp.rhs_affine();
    if (cert.y.size() != static_cast<Eigen::Index>(rows.size()))
        throw std::invalid_argument("assemble_g: certificate does not match problem");
    AffineScoreFunction g;
    g.coeff = Eigen::VectorXd::Zero(Score::kTestAlphabet);
    g.constant = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        g.constant += cert.y(r) * rows[r].b0;
        g.coeff += cert.y(r) * rows[r].bq;
    }
    // dimension-reduction continuity penalty, affine in q_top
    const CorrectionSet& cs = sdp.corrections();
    if (cs.continuity_enabled) {
        g.constant -= cs.c_corr - cs.m_corr * cs.nu_c;
        g.coeff(Score::top().test_index()) -= cs.m_corr;
    }
    return g;
}

AffineScoreFunction min_tradeoff_from_g(const AffineScoreFunction& g, double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("min_tradeoff_from_g: gamma outside (0,1)");
    if (g.full_alphabet) throw std::invalid_argument("min_tradeoff_from_g: g already converted");
    const int n = Score::kTestAlphabet;
    double lam_max = g.coeff.maxCoeff();
    double lam_min = g.coeff.minCoeff();

    AffineScoreFunction f;
    f.full_alphabet = true;
    f.coeff = Eigen::VectorXd::Zero(n + 1);
    // f(e_c) = Phi - (1-gamma)/gamma lam_max + lam_c / gamma on test scores,
    // f(e_bot) = Phi + lam_max; represent with constant Phi and coefficients.
    f.constant = g.constant;
    for (int c = 0; c < n; ++c)
        f.coeff(c) = -(1.0 - gamma) / gamma * lam_max + g.coeff(c) / gamma;
    f.coeff(n) = lam_max;

    f.max_f = g.constant + lam_max;
    f.min_sigma_lower = g.constant + lam_min;
    f.var_upper = (lam_max - lam_min) * (lam_max - lam_min) / gamma;
    return f;
}

}  // namespace dmcv
