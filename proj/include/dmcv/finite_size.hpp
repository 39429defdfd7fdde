#pragma once

#include <Eigen/Dense>
#include <string>

#include "dmcv/tradeoff.hpp"

namespace dmcv {

/// Tolerated frequency box around the honest score distribution, intersected
/// with the probability simplex.  Coordinates follow the full 10-letter
/// alphabet (9 test scores then bot).
struct AcceptanceSet {
    Eigen::VectorXd lower;  // max(0, p - zeta')
    Eigen::VectorXd upper;  // min(1, p + zeta)

    bool contains(const Eigen::VectorXd& freq, double tol = 0.0) const;
    void validate() const;  // nonempty: sum lower <= 1 <= sum upper
};

/// Second-order GEAT pieces, reported alongside the bound.
struct GeatTerms {
    double v = 0.0;
    double k_beta = 0.0;
    double bound_bits = 0.0;     // smooth-min-entropy lower bound
    double first_order = 0.0;    // N h
    double second_order = 0.0;   // everything subtracted from N h
};

/// Smooth-min-entropy lower bound from the accumulation theorem, evaluated
/// with the min-tradeoff metadata (Max, Min_Sigma lower bound, Var upper
/// bound).  beta in (0, 1/2); Pr[Omega] is replaced by eps_ea.
GeatTerms geat_bound(const AffineScoreFunction& f, double h, double n_rounds, double beta,
                     int d_z, double eps_s, double eps_ea);

/// Exact minimum of the affine f over the acceptance polytope
/// (box intersect simplex), by greedy mass assignment in coefficient order.
double floor_over_acceptance(const AffineScoreFunction& f, const AcceptanceSet& acc);

/// Smallest per-side tolerances such that the binomial tail bounds certify
/// abort probability <= budget for this score (budget split evenly between
/// the two sides).  Returns (zeta_upper, zeta_lower); feasible reports
/// whether the budget could be met (the widest valid interval is returned
/// otherwise).
struct ToleranceResult {
    double zeta_up = 0.0;
    double zeta_down = 0.0;
    bool feasible = true;
};
ToleranceResult completeness_tolerance(double p, double n_rounds, double budget);

/// One-sided abort-probability bounds used by the tolerance search: the
/// certified probability that freq exceeds p + zeta (resp. falls below
/// p - zeta'), from the binomial concentration bound.
double abort_tail_high(double p, double n_rounds, double zeta);
double abort_tail_low(double p, double n_rounds, double zeta_down);

/// Acceptance set for the full alphabet from per-score budgets.
AcceptanceSet build_acceptance(const Eigen::VectorXd& p_full, double n_rounds,
                               const Eigen::VectorXd& budgets);

/// Error-verification hash length ceil(log2(1/eps_cor)).
long long ev_hash_length(double eps_cor);

/// Largest key length (bits) satisfying the leftover-hash secrecy condition
///   2^{-(hmin - leak - l_ev - l + 2)/2} + 2 eps_s <= eps_sec,  eps_ea <= eps_sec.
/// Returns 0 when no positive length works.
double key_length(double hmin_bound, double leak_ec, double l_ev, double eps_s, double eps_ea,
                  double eps_sec);

/// Full per-point result with every term needed to re-derive the key length.
struct KeyRateReport {
    double loss_db = 0.0;
    double n_rounds = 0.0;
    double alpha = 0.0;
    double gamma = 0.0;
    double beta = 0.0;
    double nu_c = 0.0, nu_l = 0.0, nu_u = 0.0;
    double chi_dual = 0.0;
    double h = 0.0;            // min-tradeoff floor over the acceptance set
    double g_at_q = 0.0;       // g evaluated at the honest statistics
    double v_term = 0.0;
    double k_beta = 0.0;
    double hmin_bound = 0.0;
    double leak_ec = 0.0;
    double l_ev = 0.0;
    double key_len = 0.0;
    double rate = 0.0;
    double eps_s = 0.0, eps_ea = 0.0, eps_sec = 0.0, eps_cor = 0.0, eps_com_pe = 0.0;
    double entropy_certified = 0.0;  // certified SDP value at q_dual
    double g_corr_honest = 0.0;      // continuity penalty at the honest q_top
    std::string status = "zero";     // "positive" | "zero" | "failed"

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

}  // namespace dmcv
