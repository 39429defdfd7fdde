#pragma once

#include <stdexcept>
#include <vector>

namespace dmcv {

/// Gauss-Radau quadrature rule on [0,1] with the last node fixed at t = 1.
/// Exact for polynomials of degree <= 2m-2.
struct QuadratureRule {
    std::vector<double> nodes;    // strictly increasing, nodes.back() == 1
    std::vector<double> weights;  // positive, sum to 1

    int order() const { return static_cast<int>(nodes.size()); }
};

/// Upper incomplete gamma function Gamma(a,x) = int_x^inf t^{a-1} e^{-t} dt.
/// Supports real a > 0 (half-integer arguments included), x >= 0.
double upper_incomplete_gamma(double a, double x);

/// Lower incomplete gamma function gamma(a,x) = Gamma(a) - Gamma(a,x).
double lower_incomplete_gamma(double a, double x);

/// Regularized versions: P(a,x) = gamma(a,x)/Gamma(a), Q(a,x) = Gamma(a,x)/Gamma(a).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Radial Fock-basis integral int_{w1}^{w2} u^{a-1} e^{-u} du = Gamma(a,w1) - Gamma(a,w2),
/// evaluated through whichever regularized branch avoids cancellation.
/// w2 may be +inf.
double gamma_band_integral(double a, double w1, double w2);

/// Same integral divided by Gamma(a): P(a,w2) - P(a,w1) on a stable branch.
double regularized_gamma_band(double a, double w1, double w2);

/// Binary entropy h2(x) = -x log2 x - (1-x) log2 (1-x), continuous at 0 and 1.
double binary_entropy(double x);

/// Standard normal CDF.
double normal_cdf(double a);

/// Zubkov-Serov bound F(n,p,k) = Phi(sign(k/n - p) sqrt(2 n D(k/n, p))) with
/// D the natural-log binary relative entropy.  Satisfies
/// F(n,p,k) <= Pr[Bin(n,p) <= k] <= F(n,p,k+1) for 0 <= k < n.
double binomial_bound_F(long long n, double p, long long k);

/// Gauss-Radau rule of order m on [0,1], endpoint node at t = 1.
QuadratureRule gauss_radau(int m);

}  // namespace dmcv
