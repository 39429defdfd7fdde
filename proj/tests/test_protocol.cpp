#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdio>

#include "dmcv/operators.hpp"
#include "dmcv/protocol.hpp"
#include "dmcv/special_math.hpp"

using namespace dmcv;
using cd = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;

double poisson_cdf(double lambda, int k) {
    long double term = std::exp(-(long double)lambda);
    long double sum = term;
    for (int i = 1; i <= k; ++i) {
        term *= lambda / i;
        sum += term;
    }
    return static_cast<double>(sum);
}

// 2-D Gauss-Legendre tensor quadrature of the defining POVM integral in
// (r, theta) coordinates; independent of the closed-form path.
cd povm_entry_2d(int n, int np, double w1, double w2, double th1, double th2) {
    const int nq = 160;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(nq, nq);
    for (int k = 1; k < nq; ++k) {
        double b = k / std::sqrt(4.0 * k * k - 1.0);
        jac(k - 1, k) = b;
        jac(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    std::vector<double> x(nq), w(nq);
    for (int k = 0; k < nq; ++k) {
        x[k] = es.eigenvalues()(k);
        w[k] = 2.0 * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
    double r1 = std::sqrt(w1), r2 = std::sqrt(w2);
    cd total = 0.0;
    double lognorm = 0.5 * (std::lgamma(n + 1.0) + std::lgamma(np + 1.0));
    for (int i = 0; i < nq; ++i) {
        double r = 0.5 * (r2 - r1) * x[i] + 0.5 * (r1 + r2);
        double radial = std::exp((n + np) * std::log(r) - r * r - lognorm) * r;
        for (int j = 0; j < nq; ++j) {
            double th = 0.5 * (th2 - th1) * x[j] + 0.5 * (th1 + th2);
            total += w[i] * w[j] * radial * std::exp(cd(0.0, (n - np) * th));
        }
    }
    total *= 0.25 * (r2 - r1) * (th2 - th1) / kPi;
    return total;
}

ProtocolParams default_params() {
    ProtocolParams p;
    p.n_max = 6;
    return p;
}
}  // namespace

TEST_CASE("discretisation maps: worked examples") {
    ProtocolParams p = default_params();
    CHECK(discretize_key({1.0, 1.0}, p) == KeySymbol::q0);
    CHECK(discretize_key({0.1, 0.1}, p) == KeySymbol::empty);
    CHECK(discretize_key({-1.0, 1.0}, p) == KeySymbol::q1);

    CHECK(discretize_test({5.0, 0.0}, p) == TestSymbol{TestSymbol::Kind::top, 0});
    CHECK(discretize_test({1.0, 1.0}, p) == TestSymbol{TestSymbol::Kind::band, 0});
    CHECK(discretize_test({0.5, 0.0}, p) == TestSymbol{TestSymbol::Kind::inner, 0});

    // boundaries closed below, open above
    CHECK(quadrant_of({0.0, 2.0}) == 1);
    CHECK(quadrant_of({2.0, 0.0}) == 0);
    CHECK(quadrant_of({-2.0, 0.0}) == 2);
    CHECK(quadrant_of({0.0, -2.0}) == 3);
    // W exactly tau_max stays in the band (exactly representable threshold)
    ProtocolParams p16 = p;
    p16.tau_max = 16.0;
    CHECK(discretize_test({4.0, 0.0}, p16).kind == TestSymbol::Kind::band);
    CHECK(discretize_test({1.0, 1.0}, p16).kind == TestSymbol::Kind::band);  // W == 2 >= tau_min
}

TEST_CASE("score function") {
    CHECK(score(0, -1, {}) == Score::bot());
    CHECK(score(1, 2, {TestSymbol::Kind::band, 2}) == Score::rotation(0));
    CHECK(score(1, 1, {TestSymbol::Kind::inner, 2}) == Score::inner(1));
    CHECK(score(1, 0, {TestSymbol::Kind::top, 0}) == Score::top());
    CHECK(score(1, 3, {TestSymbol::Kind::band, 1}) == Score::rotation(2));
    CHECK_THROWS_AS(score(0, 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(score(1, -1, {TestSymbol::Kind::band, 0}), std::invalid_argument);
    CHECK_THROWS_AS(score(2, 0, {TestSymbol::Kind::band, 0}), std::invalid_argument);

    // score is 0 exactly when Bob's quadrant equals Alice's symbol
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) {
            Score s = score(1, x, {TestSymbol::Kind::band, z});
            CHECK((s == Score::rotation(0)) == (x == z));
        }
}

TEST_CASE("score round trip through indices") {
    for (int i = 0; i < Score::kTestAlphabet; ++i)
        CHECK(Score::from_test_index(i).test_index() == i);
}

TEST_CASE("kappa: Poisson oracle, limit, monotonicity") {
    double k = kappa_constant(12, 20.0);
    CHECK(k == doctest::Approx(1.0 / poisson_cdf(20.0, 13)).epsilon(1e-12));
    CHECK(k > 14.0);
    CHECK(k < 17.0);
    CHECK(kappa_constant(12, 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    double prev = 1.0;
    for (double w : {1.0, 5.0, 10.0, 20.0, 30.0}) {
        double cur = kappa_constant(12, w);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("alice marginal") {
    Matrix rho0 = alice_marginal(1e-12);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::abs(rho0(i, j) - 0.25) < 1e-10);

    Matrix rho = alice_marginal(0.5);
    for (int i = 0; i < 4; ++i) CHECK(rho(i, i) == cd(0.25, 0.0));
    CHECK(std::abs(rho(0, 2) - 0.25 * std::exp(-0.5)) < 1e-14);
    CHECK(std::abs(rho(1, 3) - 0.25 * std::exp(-0.5)) < 1e-14);

    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("top POVM is diagonal with Q(n+1, tau_max) entries") {
    ProtocolParams p = default_params();
    auto ops = build_operators(p);
    const Matrix& top = ops.test_povm[Score::top().test_index()];
    int nb = ops.dim_b;
    for (int a = 0; a < 4; ++a)
        for (int n = 0; n < nb; ++n)
            for (int np = 0; np < nb; ++np) {
                cd v = top(a * nb + n, a * nb + np);
                if (n == np)
                    CHECK(std::abs(v - regularized_gamma_q(n + 1.0, p.tau_max)) < 1e-12);
                else
                    CHECK(std::abs(v) < 1e-14);
            }
}

TEST_CASE("test POVMs: hermitian, PSD, eigenvalues in [0,1], completeness") {
    ProtocolParams p = default_params();
    auto ops = build_operators(p);
    Matrix sum = Matrix::Zero(ops.dim_ab(), ops.dim_ab());
    for (const auto& povm : ops.test_povm) {
        CHECK((povm - povm.adjoint()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Matrix> es(povm);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-10);
        sum += povm;
    }
    Matrix eye = Matrix::Identity(ops.dim_ab(), ops.dim_ab());
    CHECK((sum - eye).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("key POVMs: completeness, empty slot, quadrant rotation symmetry") {
    ProtocolParams p = default_params();
    auto ops = build_operators(p);
    int nb = ops.dim_b;

    Matrix sum = ops.key_povm_empty;
    for (int z = 0; z < 4; ++z) sum += ops.key_povm[z];
    CHECK((sum - Matrix::Identity(nb, nb)).cwiseAbs().maxCoeff() < 1e-10);

    for (int n = 0; n < nb; ++n)
        CHECK(std::abs(ops.key_povm_empty(n, n) - regularized_gamma_p(n + 1.0, p.tau_min_key)) <
              1e-12);

    Matrix u = z4_rotation_b(nb);
    for (int z = 1; z < 4; ++z) {
        Matrix rotated = u * ops.key_povm[z - 1] * u.adjoint();
        CHECK((rotated - ops.key_povm[z]).cwiseAbs().maxCoeff() < 1e-12);
    }

    // eigenvalues in [0,1]
    for (int z = 0; z < 4; ++z) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(ops.key_povm[z]);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-10);
    }
}

TEST_CASE("closed-form POVM entries agree with 2-D numerical integration") {
    double w1 = 1.5, w2 = 20.0;
    Matrix band = fock_region_povm(5, w1, w2, 0.0, kPi / 2.0);
    for (auto [n, np] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {3, 2}, {4, 1}, {2, 2}}) {
        cd oracle = povm_entry_2d(n, np, w1, w2, 0.0, kPi / 2.0);
        CHECK(std::abs(band(n, np) - oracle) < 1e-10);
    }
    // inner region, different quadrant
    Matrix inner = fock_region_povm(4, 0.0, 1.5, kPi, 1.5 * kPi);
    for (auto [n, np] : std::vector<std::pair<int, int>>{{0, 0}, {2, 1}, {3, 0}}) {
        cd oracle = povm_entry_2d(n, np, 1e-12, 1.5, kPi, 1.5 * kPi);
        CHECK(std::abs(inner(n, np) - oracle) < 1e-9);
    }
}

TEST_CASE("phase cancellation: Alice-summed band blocks vanish off the mod-4 diagonal") {
    ProtocolParams p = default_params();
    auto ops = build_operators(p);
    int nb = ops.dim_b;
    for (int idx : {0, 1, 4, 5}) {
        const Matrix& povm = ops.test_povm[idx];
        Matrix acc = Matrix::Zero(nb, nb);
        for (int a = 0; a < 4; ++a) acc += povm.block(a * nb, a * nb, nb, nb);
        for (int n = 0; n < nb; ++n)
            for (int np = 0; np < nb; ++np)
                if (((n - np) % 4 + 4) % 4 != 0) CHECK(std::abs(acc(n, np)) < 1e-12);
    }
}

TEST_CASE("operators are Z4 covariant: U Pi_c U^dag = Pi_c, U P_PS U^dag = P_PS") {
    ProtocolParams p = default_params();
    auto ops = build_operators(p);
    Matrix u = z4_unitary_ab(ops.dim_b);
    for (const auto& povm : ops.test_povm)
        CHECK((u * povm * u.adjoint() - povm).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((u * ops.p_ps * u.adjoint() - ops.p_ps).cwiseAbs().maxCoeff() < 1e-12);
    Matrix s = z4_shift_a();
    CHECK((s * ops.rho_a_target * s.adjoint() - ops.rho_a_target).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("operator dump round trip") {
    ProtocolParams p = default_params();
    p.n_max = 3;
    auto ops = build_operators(p);
    std::string path = "ops_dump_test.bin";
    dump_operators(ops, path);
    auto loaded = load_operator_dump(path);
    REQUIRE(loaded.size() == 17);
    CHECK(loaded[0].first == "test_povm_r0");
    CHECK((loaded[0].second - ops.test_povm[0]).norm() == 0.0);
    bool found_kappa = false;
    for (auto& [label, m] : loaded)
        if (label == "kappa") {
            found_kappa = true;
            CHECK(m(0, 0).real() == ops.kappa);
        }
    CHECK(found_kappa);
    std::remove(path.c_str());
}

TEST_CASE("params validation") {
    ProtocolParams p;
    CHECK_NOTHROW(p.validate());
    ProtocolParams bad = p;
    bad.eps.ea = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = p;
    bad.eps.ea = bad.eps.sec;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = p;
    bad.tau_min = 25.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    bad = p;
    bad.eps.s = bad.eps.sec;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}
