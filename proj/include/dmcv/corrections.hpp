#pragma once

#include <stdexcept>

namespace dmcv {

/// Tangent points for the three linearised correction curves.  Each must lie
/// strictly inside the concave/convex branch of its curve for the given kappa:
///   nu_c in (0, 2/(3 kappa)), nu_l in (0, (5+sqrt5)/(10 kappa)],
///   nu_u in (0, (5-sqrt5)/(10 kappa)].
struct LinearisationPoints {
    double nu_c = 0.0;
    double nu_l = 0.0;
    double nu_u = 0.0;

    void validate(double kappa) const;
};

/// Affine correction data entering the entropy bound and its constraints.
/// g_corr(nu)   = m_corr (nu - nu_c) + c_corr   dominates the continuity penalty,
/// delta_tan    = m_0 (nu - nu_0) + c_0         dominates the trace distance,
/// xi_hat_L(nu) = m_l nu + c_l                  dominates xi_L(kappa nu),
/// xi_hat_U(nu) = m_u nu + c_u                  is dominated by xi_U(kappa nu).
struct CorrectionSet {
    double m_corr = 0.0, c_corr = 0.0;
    double m_0 = 0.0, c_0 = 0.0;
    double m_l = 0.0, c_l = 0.0;
    double m_u = 0.0, c_u = 0.0;
    double nu_c = 0.0;
    bool continuity_enabled = true;   // g_corr term
    bool statistical_enabled = true;  // xi-hat terms and kappa q_top rows

    double g_corr(double q_top) const {
        return continuity_enabled ? m_corr * (q_top - nu_c) + c_corr : 0.0;
    }
    double xi_hat_l(double q_top) const { return statistical_enabled ? m_l * q_top + c_l : 0.0; }
    double xi_hat_u(double q_top) const { return statistical_enabled ? m_u * q_top + c_u : 0.0; }

    static CorrectionSet none();
};

/// Trace distance between a pure state and its projection carrying weight w
/// outside the kept subspace; clamped to its maximum 1/sqrt(3) past w = 2/3.
double delta_of_w(double w);

/// Continuity penalty v(delta) = delta log2 d_Z + (1+delta) h2(delta/(1+delta)).
double continuity_penalty(double delta, int d_z);

/// Tangent (slope, intercept) to delta(kappa nu) at nu = nu_0; requires
/// kappa nu_0 in (0, 2/3).
void delta_tangent(double nu_0, double kappa, double& m_0, double& c_0);

/// Tangent (m_corr, c_corr) to the continuity penalty nu -> v(delta(kappa nu))
/// at nu = nu_c; requires kappa nu_c in (0, 2/3).
void entropy_correction_tangent(double nu_c, double kappa, int d_z, double& m_corr,
                                double& c_corr);

/// Statistical-constraint corrections as functions of the high-energy weight w.
double xi_l(double w);
double xi_u(double w);

/// Tangent relaxations evaluated at nu, with tangent points nu_l / nu_u.
double xi_hat_l(double nu, double nu_l, double kappa);
double xi_hat_u(double nu, double nu_u, double kappa);

/// Assemble all tangents for the given linearisation points.
CorrectionSet make_corrections(const LinearisationPoints& pts, double kappa, int d_z);

}  // namespace dmcv
