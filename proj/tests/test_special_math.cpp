#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dmcv/special_math.hpp"

using namespace dmcv;

namespace {

// Poisson CDF Pr[Pois(lambda) <= k] by direct summation.
double poisson_cdf(double lambda, int k) {
    long double term = std::exp(-(long double)lambda);
    long double sum = term;
    for (int i = 1; i <= k; ++i) {
        term *= lambda / i;
        sum += term;
    }
    return static_cast<double>(sum);
}

// Exact binomial CDF by pmf recurrence in extended precision.
double binomial_cdf(long long n, double p, long long k) {
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

}  // namespace

TEST_CASE("upper incomplete gamma: pinned values") {
    CHECK(upper_incomplete_gamma(1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(upper_incomplete_gamma(14.0, 0.0) == doctest::Approx(6227020800.0).epsilon(1e-13));
    // Gamma(14,20)/13! = Pr[Pois(20) <= 13]
    double lhs = upper_incomplete_gamma(14.0, 20.0) / 6227020800.0;
    double rhs = poisson_cdf(20.0, 13);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("upper incomplete gamma: domain errors") {
    CHECK_THROWS_AS(upper_incomplete_gamma(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(upper_incomplete_gamma(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(upper_incomplete_gamma(1.0, -0.5), std::domain_error);
}

TEST_CASE("gamma recurrence Gamma(a+1,x) = a Gamma(a,x) + x^a e^-x") {
    for (double a = 0.5; a <= 20.0; a += 0.5) {
        for (double x = 0.0; x <= 40.0; x += 2.5) {
            double lhs = upper_incomplete_gamma(a + 1.0, x);
            double rhs = a * upper_incomplete_gamma(a, x) +
                         (x > 0.0 ? std::exp(a * std::log(x) - x) : 0.0);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("gamma band integral matches plain difference and stays accurate in the tails") {
    // Reference by midpoint-refined Simpson on u^{a-1} e^{-u}.
    auto numeric = [](double a, double w1, double w2) {
        int n = 200000;
        long double h = (w2 - w1) / n;
        long double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            long double u = w1 + (i + 0.5L) * h;
            sum += std::pow((long double)u, (long double)(a - 1.0)) * std::exp(-u);
        }
        return static_cast<double>(sum * h);
    };
    for (auto [a, w1, w2] : std::vector<std::tuple<double, double, double>>{
             {7.5, 1.5, 20.0}, {14.0, 0.6, 1.5}, {3.0, 0.0, 0.6}, {10.5, 22.0, 30.0}}) {
        double got = gamma_band_integral(a, w1, w2);
        CHECK(got == doctest::Approx(numeric(a, w1, w2)).epsilon(1e-7));
    }
    // well-conditioned case: plain difference agrees too
    CHECK(gamma_band_integral(3.0, 1.0, 4.0) ==
          doctest::Approx(upper_incomplete_gamma(3.0, 1.0) - upper_incomplete_gamma(3.0, 4.0))
              .epsilon(1e-12));
    // Deep lower tail where Gamma(a,w1) - Gamma(a,w2) cancels catastrophically.
    double tiny = gamma_band_integral(30.0, 0.1, 0.2);
    CHECK(tiny > 0.0);
    CHECK(tiny == doctest::Approx(numeric(30.0, 0.1, 0.2)).epsilon(1e-7));
}

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328).epsilon(1e-14));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("normal cdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(normal_cdf(40.0) - 1.0) < 1e-15);
    // erf-based oracle
    double oracle = 0.5 * (1.0 + std::erf(1.0 / std::sqrt(2.0)));
    CHECK(normal_cdf(1.0) == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-12));
}

TEST_CASE("binomial bound F: pinned and sandwich") {
    CHECK(binomial_bound_F(10, 0.5, 5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(binomial_bound_F(10, 0.0, 5), std::domain_error);
    CHECK_THROWS_AS(binomial_bound_F(10, 1.0, 5), std::domain_error);

    double cdf = binomial_cdf(100, 0.3, 20);
    CHECK(binomial_bound_F(100, 0.3, 20) <= cdf);
    CHECK(cdf <= binomial_bound_F(100, 0.3, 21));

    // monotone in k near the upper end
    CHECK(binomial_bound_F(50, 0.1, 49) <= 1.0);
    CHECK(binomial_bound_F(50, 0.1, 49) >= binomial_bound_F(50, 0.1, 48));
    CHECK(binomial_bound_F(50, 0.1, 48) >= binomial_cdf(50, 0.1, 47));
}

TEST_CASE("binomial bound F: sandwich on a reduced grid") {
    for (long long n : {10, 100}) {
        for (double p : {0.1, 0.3, 0.5, 0.9}) {
            for (long long k = 0; k < n; ++k) {
                double cdf = binomial_cdf(n, p, k);
                CHECK(binomial_bound_F(n, p, k) <= cdf + 1e-15);
                CHECK(cdf <= binomial_bound_F(n, p, k + 1) + 1e-15);
            }
        }
    }
}

TEST_CASE("gauss radau: m=1 and m=2 against the moment-equation oracle") {
    auto r1 = gauss_radau(1);
    REQUIRE(r1.order() == 1);
    CHECK(r1.nodes[0] == 1.0);
    CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-14));

    // Moment equations for m=2 with t2 = 1 fixed:
    //   w1 + w2 = 1, w1 t1 + w2 = 1/2, w1 t1^2 + w2 = 1/3
    // eq1-eq2 gives w1 t1 (1-t1) = 1/6, eq0-eq1 gives w1 (1-t1) = 1/2,
    // hence t1 = 1/3, w1 = 3/4, w2 = 1/4.
    double t1 = (1.0 / 6.0) / (1.0 / 2.0);
    double w1 = (1.0 / 2.0) / (1.0 - t1);
    double w2 = 1.0 - w1;
    auto r2 = gauss_radau(2);
    REQUIRE(r2.order() == 2);
    CHECK(r2.nodes[0] == doctest::Approx(t1).epsilon(1e-13));
    CHECK(r2.nodes[1] == 1.0);
    CHECK(r2.weights[0] == doctest::Approx(w1).epsilon(1e-13));
    CHECK(r2.weights[1] == doctest::Approx(w2).epsilon(1e-13));
}

TEST_CASE("gauss radau: structural invariants and exactness up to degree 2m-2") {
    for (int m = 1; m <= 8; ++m) {
        auto r = gauss_radau(m);
        REQUIRE(r.order() == m);
        CHECK(r.nodes.back() == 1.0);
        double wsum = 0.0;
        for (int i = 0; i < m; ++i) {
            CHECK(r.nodes[i] > 0.0);
            CHECK(r.nodes[i] <= 1.0);
            if (i) CHECK(r.nodes[i] > r.nodes[i - 1]);
            CHECK(r.weights[i] > 0.0);
            wsum += r.weights[i];
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
        for (int k = 0; k <= 2 * m - 2; ++k) {
            double s = 0.0;
            for (int i = 0; i < m; ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
            CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-10));
        }
        if (m >= 2) {
            double s2 = 0.0;
            for (int i = 0; i < m; ++i) s2 += r.weights[i] * r.nodes[i] * r.nodes[i];
            CHECK(s2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("gauss radau: random polynomials integrate exactly") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    for (int m = 1; m <= 8; ++m) {
        auto r = gauss_radau(m);
        for (int rep = 0; rep < 20; ++rep) {
            int deg = 2 * m - 2;
            std::vector<double> c(deg + 1);
            for (auto& v : c) v = coef(rng);
            double exact = 0.0;
            for (int k = 0; k <= deg; ++k) exact += c[k] / (k + 1);
            double quad = 0.0;
            for (int i = 0; i < m; ++i) {
                double t = r.nodes[i], pw = 1.0, val = 0.0;
                for (int k = 0; k <= deg; ++k) {
                    val += c[k] * pw;
                    pw *= t;
                }
                quad += r.weights[i] * val;
            }
            CHECK(std::abs(quad - exact) < 1e-9);
        }
    }
}
