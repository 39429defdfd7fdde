#pragma once

// Shared numerical oracles for the test suites.  These deliberately avoid the
// library's closed-form code paths.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dmcv/channel.hpp"

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k - 1, k) = b;
        jac(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    x.resize(n);
    w.resize(n);
    for (int k = 0; k < n; ++k) {
        x[k] = es.eigenvalues()(k);
        w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
}

// Plain 2-D tensor-product quadrature of the heterodyne density over
// W in [w1,w2], theta in [th1,th2]; infinite w2 truncated far in the tail.
inline double region_probability_2d(int x, double w1, double w2, double th1, double th2,
                                    const dmcv::ChannelParams& ch, double chi, double alpha) {
    double s = 1.0 + ch.eta * chi / 2.0;
    double a = std::sqrt(ch.eta) * alpha;
    double phi = (2.0 * x + 1.0) * kPi / 4.0;
    double r1 = std::sqrt(w1);
    double r2 = std::isinf(w2) ? a + 30.0 * std::sqrt(s) : std::sqrt(w2);
    static std::vector<double> gx, gw;
    if (gx.empty()) gauss_legendre(220, gx, gw);
    const int seg = 6;  // subdivide to keep the oscillatory exponential resolved
    double total = 0.0;
    for (int sr = 0; sr < seg; ++sr) {
        double ra = r1 + (r2 - r1) * sr / seg;
        double rb = r1 + (r2 - r1) * (sr + 1) / seg;
        for (std::size_t i = 0; i < gx.size(); ++i) {
            double r = 0.5 * (rb - ra) * gx[i] + 0.5 * (ra + rb);
            double wr = 0.5 * (rb - ra) * gw[i];
            for (std::size_t j = 0; j < gx.size(); ++j) {
                double th = 0.5 * (th2 - th1) * gx[j] + 0.5 * (th1 + th2);
                double wt = 0.5 * (th2 - th1) * gw[j];
                double expo = -(r * r - 2.0 * a * r * std::cos(th - phi) + a * a) / s;
                total += wr * wt * r / (kPi * s) * std::exp(expo);
            }
        }
    }
    return total;
}

inline double poisson_cdf(double lambda, int k) {
    long double term = std::exp(-(long double)lambda);
    long double sum = term;
    for (int i = 1; i <= k; ++i) {
        term *= lambda / i;
        sum += term;
    }
    return static_cast<double>(sum);
}

inline double binomial_cdf(long long n, double p, long long k) {
    if (k < 0) return 0.0;
    if (k >= n) return 1.0;
    long double logpmf0 = n * std::log1p(-(long double)p);
    long double pmf = std::exp(logpmf0);
    long double sum = pmf;
    long double r = (long double)p / (1.0L - (long double)p);
    for (long long i = 0; i < k; ++i) {
        pmf *= r * (long double)(n - i) / (long double)(i + 1);
        sum += pmf;
    }
    return static_cast<double>(std::min(sum, 1.0L));
}

}  // namespace testutil
