#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "dmcv/conic.hpp"

using namespace dmcv;
using cd = std::complex<double>;

TEST_CASE("parameter <-> matrix round trip is isometric") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(4);
    Eigen::MatrixXcd h(4, 4);
    h.setRandom();
    Eigen::MatrixXcd herm = (h + h.adjoint()) * 0.5;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(prog.num_params());
    prog.matrix_to_param(blk, herm, params);
    Eigen::MatrixXcd back = prog.param_to_matrix(blk, params);
    CHECK((back - herm).norm() < 1e-14);
    // Frobenius norm preserved
    CHECK(params.norm() == doctest::Approx(herm.norm()).epsilon(1e-13));
}

TEST_CASE("row entry semantics with Hermitian mirroring") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(3);
    Eigen::MatrixXcd h(3, 3);
    h.setRandom();
    Eigen::MatrixXcd herm = (h + h.adjoint()) * 0.5;
    Eigen::VectorXd params = Eigen::VectorXd::Zero(prog.num_params());
    prog.matrix_to_param(blk, herm, params);

    auto eval_row = [&](int row) {
        double v = 0.0;
        for (auto [idx, coef] : prog.row_entries(row)) v += coef * params(idx);
        return v;
    };

    cd coeff(0.7, -1.3);
    int r1 = prog.new_row(0.0);
    prog.row_add_entry(r1, blk, 0, 2, coeff);
    CHECK(eval_row(r1) == doctest::Approx((coeff * herm(0, 2)).real()).epsilon(1e-12));

    int r2 = prog.new_row(0.0);
    prog.row_add_entry(r2, blk, 2, 0, coeff);  // lower triangle reference
    CHECK(eval_row(r2) == doctest::Approx((coeff * herm(2, 0)).real()).epsilon(1e-12));

    int r3 = prog.new_row(0.0);
    prog.row_add_entry(r3, blk, 1, 1, coeff);
    CHECK(eval_row(r3) == doctest::Approx((coeff * herm(1, 1)).real()).epsilon(1e-12));

    // <H, X> row
    Eigen::MatrixXcd g(3, 3);
    g.setRandom();
    Eigen::MatrixXcd gh = (g + g.adjoint()) * 0.5;
    int r4 = prog.new_row(0.0);
    prog.row_add_inner(r4, blk, gh);
    double expect = (gh.adjoint() * herm).trace().real();
    CHECK(eval_row(r4) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("LP: min x1 + 2 x2, x1 + x2 = 1, x >= 0") {
    ConicProgram prog;
    int x1 = prog.add_slack();
    int x2 = prog.add_slack();
    prog.add_objective_param(x1, 1.0);
    prog.add_objective_param(x2, 2.0);
    int row = prog.new_row(1.0);
    prog.row_add_param(row, x1, 1.0);
    prog.row_add_param(row, x2, 1.0);

    ConicProgram::Settings st;
    st.tol = 1e-9;
    auto sol = prog.solve(st);
    CHECK(sol.converged);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.dual_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.y(row) == doctest::Approx(1.0).epsilon(1e-5));
    // dual slack nonnegative
    auto s = prog.dual_slack(sol.y);
    CHECK(s(x1) > -1e-7);
    CHECK(s(x2) > -1e-7);
}

TEST_CASE("SDP: min Tr X with Re X01 = 1/2") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(2);
    Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(2, 2);
    prog.add_objective(blk, eye);
    int row = prog.new_row(0.5);
    prog.row_add_entry(row, blk, 0, 1, cd(1.0, 0.0));

    ConicProgram::Settings st;
    st.tol = 1e-9;
    auto sol = prog.solve(st);
    CHECK(sol.converged);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.dual_obj == doctest::Approx(1.0).epsilon(1e-6));
    Eigen::MatrixXcd x = prog.param_to_matrix(blk, sol.z);
    CHECK(x(0, 1).real() == doctest::Approx(0.5).epsilon(1e-5));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x);
    CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("complex SDP: min <C,X>, Tr X = 1 gives lambda_min(C)") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(2);
    Eigen::MatrixXcd c(2, 2);
    c << cd(2.0, 0.0), cd(0.0, 1.0), cd(0.0, -1.0), cd(2.0, 0.0);
    prog.add_objective(blk, c);
    int row = prog.new_row(1.0);
    prog.row_add_inner(row, blk, Eigen::MatrixXcd::Identity(2, 2));

    ConicProgram::Settings st;
    st.tol = 1e-9;
    auto sol = prog.solve(st);
    CHECK(sol.converged);
    CHECK(sol.primal_obj == doctest::Approx(1.0).epsilon(1e-6));

    // verify the dual certificate: S = C - A^T y PSD, b.y <= primal
    auto s = prog.dual_slack(sol.y);
    Eigen::MatrixXcd smat = prog.param_to_matrix(blk, s);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(smat);
    CHECK(es.eigenvalues().minCoeff() > -1e-6);
    CHECK(prog.b_dot(sol.y) <= sol.primal_obj + 1e-6);
}

TEST_CASE("mixed SDP/slack with inequality encoded through a slack") {
    // min Tr X subject to Tr X - s = 0.5, s >= 0  (Tr X >= 0.5)
    ConicProgram prog;
    int blk = prog.add_hermitian_block(3);
    prog.add_objective(blk, Eigen::MatrixXcd::Identity(3, 3));
    int s = prog.add_slack();
    int row = prog.new_row(0.5);
    prog.row_add_inner(row, blk, Eigen::MatrixXcd::Identity(3, 3));
    prog.row_add_param(row, s, -1.0);

    ConicProgram::Settings st;
    st.tol = 1e-9;
    auto sol = prog.solve(st);
    CHECK(sol.converged);
    CHECK(sol.primal_obj == doctest::Approx(0.5).epsilon(1e-6));
    // row dual for a >= constraint is nonnegative
    CHECK(sol.y(row) > -1e-7);
}

TEST_CASE("warm start accelerates a nearby re-solve") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(6);
    Eigen::MatrixXcd h(6, 6);
    h.setRandom();
    Eigen::MatrixXcd c = (h + h.adjoint()) * 0.5 + 6.0 * Eigen::MatrixXcd::Identity(6, 6);
    prog.add_objective(blk, c);
    int row = prog.new_row(1.0);
    prog.row_add_inner(row, blk, Eigen::MatrixXcd::Identity(6, 6));

    ConicProgram::Settings st;
    st.tol = 1e-9;
    auto cold = prog.solve(st);
    CHECK(cold.converged);

    prog.set_rhs(row, 1.02);
    auto warm = prog.solve(st, &cold);
    CHECK(warm.converged);
    CHECK(warm.iterations <= cold.iterations);
    CHECK(warm.primal_obj == doctest::Approx(1.02 * cold.primal_obj).epsilon(1e-4));
}

TEST_CASE("pop_row removes the trailing row") {
    ConicProgram prog;
    int blk = prog.add_hermitian_block(2);
    (void)blk;
    int r = prog.new_row(1.0);
    prog.row_add_entry(r, 0, 0, 0, 1.0);
    CHECK(prog.num_rows() == 1);
    prog.pop_row();
    CHECK(prog.num_rows() == 0);
}
