#pragma once

#include <Eigen/Dense>

#include "dmcv/entropy_sdp.hpp"

namespace dmcv {

/// Affine function of a score distribution: value(p) = constant + coeff . p.
/// For g the domain is the 9-letter test alphabet; for a min-tradeoff f it is
/// the 10-letter full alphabet with bot as the last coordinate.
struct AffineScoreFunction {
    double constant = 0.0;
    Eigen::VectorXd coeff;
    bool full_alphabet = false;

    // min-tradeoff metadata (valid on full-alphabet functions)
    double max_f = 0.0;
    double min_sigma_lower = 0.0;
    double var_upper = 0.0;

    double evaluate(const Eigen::VectorXd& dist) const;
    double max_over_simplex() const;
    double min_over_simplex() const;
};

/// Dual-to-affine conversion: g(q) = sum_rows y_r rhs_r(q) - g_corr(q_top),
/// by direct Lagrangian bookkeeping over the problem's affine right-hand
/// sides.  Requires a verified certificate.
AffineScoreFunction assemble_g(const EntropySdp& sdp, const DualCertificate& cert);

/// Min-tradeoff conversion and its Max / Min_Sigma / Var metadata.
AffineScoreFunction min_tradeoff_from_g(const AffineScoreFunction& g, double gamma);

}  // namespace dmcv
