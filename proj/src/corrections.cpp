#include "dmcv/corrections.hpp"

#include <cmath>

#include "dmcv/special_math.hpp"

namespace dmcv {

namespace {

const double kXiLCritical = (5.0 + std::sqrt(5.0)) / 10.0;
const double kXiUCritical = (5.0 - std::sqrt(5.0)) / 10.0;

// Bracket common to the delta derivative:
//   (3w + s)/sqrt(2-w+s) - (3w - s)/sqrt(2-w-s),  s = sqrt(w(4-3w)).
double delta_bracket(double w) {
    double s = std::sqrt(w * (4.0 - 3.0 * w));
    return (3.0 * w + s) / std::sqrt(2.0 - w + s) - (3.0 * w - s) / std::sqrt(2.0 - w - s);
}

}  // namespace

void LinearisationPoints::validate(double kappa) const {
    if (!(kappa >= 1.0)) throw std::domain_error("LinearisationPoints: kappa < 1");
    if (!(nu_c > 0.0 && kappa * nu_c < 2.0 / 3.0))
        throw std::domain_error("LinearisationPoints: nu_c outside (0, 2/(3 kappa))");
    if (!(nu_l > 0.0 && kappa * nu_l <= kXiLCritical))
        throw std::domain_error("LinearisationPoints: nu_l outside (0, (5+sqrt5)/(10 kappa)]");
    if (!(nu_u > 0.0 && kappa * nu_u <= kXiUCritical))
        throw std::domain_error("LinearisationPoints: nu_u outside (0, (5-sqrt5)/(10 kappa)]");
}

CorrectionSet CorrectionSet::none() {
    CorrectionSet c;
    c.continuity_enabled = false;
    c.statistical_enabled = false;
    return c;
}

double delta_of_w(double w) {
    if (w < 0.0 || w > 1.0) throw std::domain_error("delta_of_w: w outside [0,1]");
    if (w >= 2.0 / 3.0) return 1.0 / std::sqrt(3.0);
    double s = w * std::sqrt(w * (4.0 - 3.0 * w));
    double a = w * (2.0 - w);
    double inner = std::max(a - s, 0.0);
    return (std::sqrt(a + s) + std::sqrt(inner)) / (2.0 * std::sqrt(2.0));
}

double continuity_penalty(double delta, int d_z) {
    if (delta == 0.0) return 0.0;
    return delta * std::log2(static_cast<double>(d_z)) +
           (1.0 + delta) * binary_entropy(delta / (1.0 + delta));
}

void delta_tangent(double nu_0, double kappa, double& m_0, double& c_0) {
    double w0 = kappa * nu_0;
    if (!(nu_0 > 0.0 && w0 < 2.0 / 3.0))
        throw std::domain_error("delta_tangent: kappa nu_0 outside (0, 2/3)");
    m_0 = (1.0 - w0) / (2.0 * std::sqrt(2.0) * nu_0 * std::sqrt(4.0 - 3.0 * w0)) *
          delta_bracket(w0);
    c_0 = delta_of_w(w0);
}

void entropy_correction_tangent(double nu_c, double kappa, int d_z, double& m_corr,
                                double& c_corr) {
    double wc = kappa * nu_c;
    if (!(nu_c > 0.0 && wc < 2.0 / 3.0))
        throw std::domain_error("entropy_correction_tangent: kappa nu_c outside (0, 2/3)");
    double delta_c = delta_of_w(wc);
    double dv = std::log2(static_cast<double>(d_z)) + std::log2((1.0 + delta_c) / delta_c);
    m_corr = (1.0 - wc) / (2.0 * std::sqrt(2.0) * nu_c * std::sqrt(4.0 - 3.0 * wc)) *
             delta_bracket(wc) * dv;
    c_corr = continuity_penalty(delta_c, d_z);
}

double xi_l(double w) {
    if (w < 0.0) throw std::domain_error("xi_l: w < 0");
    if (w >= kXiLCritical) return (1.0 + std::sqrt(5.0)) / 2.0;
    return w + 2.0 * std::sqrt(w * (1.0 - w));
}

double xi_u(double w) {
    if (w < 0.0) throw std::domain_error("xi_u: w < 0");
    if (w >= kXiUCritical) return (1.0 - std::sqrt(5.0)) / 2.0;
    return w - 2.0 * std::sqrt(w * (1.0 - w));
}

double xi_hat_l(double nu, double nu_l, double kappa) {
    double wl = kappa * nu_l;
    if (!(nu_l > 0.0 && wl <= kXiLCritical))
        throw std::domain_error("xi_hat_l: nu_l outside (0, (5+sqrt5)/(10 kappa)]");
    double slope = 1.0 + (1.0 - 2.0 * wl) / std::sqrt(wl * (1.0 - wl));
    return slope * kappa * nu + std::sqrt(wl / (1.0 - wl));
}

double xi_hat_u(double nu, double nu_u, double kappa) {
    double wu = kappa * nu_u;
    if (!(nu_u > 0.0 && wu <= kXiUCritical))
        throw std::domain_error("xi_hat_u: nu_u outside (0, (5-sqrt5)/(10 kappa)]");
    double slope = 1.0 - (1.0 - 2.0 * wu) / std::sqrt(wu * (1.0 - wu));
    return slope * kappa * nu - std::sqrt(wu / (1.0 - wu));
}

CorrectionSet make_corrections(const LinearisationPoints& pts, double kappa, int d_z) {
    pts.validate(kappa);
    CorrectionSet c;
    c.nu_c = pts.nu_c;
    entropy_correction_tangent(pts.nu_c, kappa, d_z, c.m_corr, c.c_corr);
    delta_tangent(pts.nu_c, kappa, c.m_0, c.c_0);
    double wl = kappa * pts.nu_l;
    c.m_l = (1.0 + (1.0 - 2.0 * wl) / std::sqrt(wl * (1.0 - wl))) * kappa;
    c.c_l = std::sqrt(wl / (1.0 - wl));
    double wu = kappa * pts.nu_u;
    c.m_u = (1.0 - (1.0 - 2.0 * wu) / std::sqrt(wu * (1.0 - wu))) * kappa;
    c.c_u = -std::sqrt(wu / (1.0 - wu));
    return c;
}

}  // namespace dmcv
