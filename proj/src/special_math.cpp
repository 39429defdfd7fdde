#include "dmcv/special_math.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace dmcv {

namespace {

// Series for P(a,x), converges fast for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-17) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x), for x >= a+1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::domain_error("regularized_gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::domain_error("regularized_gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double upper_incomplete_gamma(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::domain_error("upper_incomplete_gamma: need a > 0, x >= 0");
    return regularized_gamma_q(a, x) * std::tgamma(a);
}

double lower_incomplete_gamma(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::domain_error("lower_incomplete_gamma: need a > 0, x >= 0");
    return regularized_gamma_p(a, x) * std::tgamma(a);
}

double regularized_gamma_band(double a, double w1, double w2) {
    if (a <= 0.0 || w1 < 0.0 || w2 < w1)
        throw std::domain_error("regularized_gamma_band: bad bounds");
    double p1 = regularized_gamma_p(a, w1);
    double p2 = std::isinf(w2) ? 1.0 : regularized_gamma_p(a, w2);
    // P-difference is accurate when both lie in the lower tail, Q-difference in
    // the upper tail; pick the side not squashed against 1.
    if (p2 < 0.5) return p2 - p1;
    double q1 = regularized_gamma_q(a, w1);
    double q2 = std::isinf(w2) ? 0.0 : regularized_gamma_q(a, w2);
    if (q1 < 0.5) return q1 - q2;
    return p2 - p1;
}

double gamma_band_integral(double a, double w1, double w2) {
    return regularized_gamma_band(a, w1, w2) * std::tgamma(a);
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw std::domain_error("binary_entropy: x outside [0,1]");
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double normal_cdf(double a) { return 0.5 * std::erfc(-a / std::sqrt(2.0)); }

double binomial_bound_F(long long n, double p, long long k) {
    if (p <= 0.0 || p >= 1.0) throw std::domain_error("binomial_bound_F: p outside (0,1)");
    if (n < 1 || k < 0 || k > n) throw std::domain_error("binomial_bound_F: k outside [0,n]");
    double q = static_cast<double>(k) / static_cast<double>(n);
    // D(q,p) with the 0 ln 0 = 0 convention at q in {0,1}.
    double d = 0.0;
    if (q > 0.0) d += q * std::log(q / p);
    if (q < 1.0) d += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
    if (d < 0.0) d = 0.0;  // roundoff near q == p
    double s = (q > p) ? 1.0 : (q < p ? -1.0 : 0.0);
    return normal_cdf(s * std::sqrt(2.0 * static_cast<double>(n) * d));
}

QuadratureRule gauss_radau(int m) {
    if (m < 1) throw std::domain_error("gauss_radau: m >= 1 required");
    QuadratureRule rule;
    if (m == 1) {
        rule.nodes = {1.0};
        rule.weights = {1.0};
        return rule;
    }
    // Jacobi matrix of the monic shifted Legendre polynomials on [0,1]:
    // alpha_k = 1/2, beta_k = k^2 / (4(4k^2 - 1)).  The Radau rule with fixed
    // node at t = 1 replaces the last diagonal entry by
    //   alpha_m = 1 - beta_{m-1} pi_{m-2}(1) / pi_{m-1}(1)
    // (Golub's endpoint modification), after which nodes and weights follow
    // from the eigen-decomposition as for plain Gauss rules.
    const int n = m;
    std::vector<double> alpha(n, 0.5), beta(n, 0.0);
    for (int k = 1; k < n; ++k) {
        double kk = static_cast<double>(k);
        beta[k] = kk * kk / (4.0 * (4.0 * kk * kk - 1.0));
    }
    // Evaluate monic pi_{m-2}(1), pi_{m-1}(1) by the three-term recurrence.
    double pm2 = 1.0;          // pi_0(1)
    double pm1 = 1.0 - alpha[0];  // pi_1(1)
    for (int k = 1; k <= n - 2; ++k) {
        double pk = (1.0 - alpha[k]) * pm1 - beta[k] * pm2;
        pm2 = pm1;
        pm1 = pk;
    }
    // After the loop pm1 = pi_{m-1}(1), pm2 = pi_{m-2}(1).
    alpha[n - 1] = 1.0 - beta[n - 1] * pm2 / pm1;

    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        jac(k, k) = alpha[k];
        if (k + 1 < n) {
            double off = std::sqrt(beta[k + 1]);
            jac(k, k + 1) = off;
            jac(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        double v0 = es.eigenvectors()(0, k);
        rule.weights[k] = v0 * v0;  // mu_0 = 1 on [0,1]
    }
    rule.nodes[n - 1] = 1.0;  // fixed endpoint, exact by construction
    return rule;
}

}  // namespace dmcv
