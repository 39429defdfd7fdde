#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "dmcv/protocol.hpp"

namespace dmcv {

using Matrix = Eigen::MatrixXcd;

/// Finite-dimensional operator family entering the entropy optimisation.
/// All B-space operators live on the photon-number subspace n <= n_max;
/// AB operators use the index (a, n) -> a * (n_max + 1) + n.
struct TruncatedOperators {
    int dim_a = 4;
    int dim_b = 0;

    std::array<Matrix, Score::kTestAlphabet> test_povm;  // AB space, indexed by test_index
    std::array<Matrix, 4> key_povm;                      // B space, quadrants 0..3
    Matrix key_povm_empty;                               // B space, post-selected slot
    Matrix p_ps;                                         // AB space, sum of kept key POVMs
    Matrix rho_a_target;                                 // 4x4 Alice marginal
    double kappa = 1.0;

    int dim_ab() const { return dim_a * dim_b; }
};

/// POVM element of heterodyne detection restricted to the phase-space region
/// W in [w1, w2], theta in [th1, th2], projected onto the first n_dim Fock
/// states.  w2 may be +inf.
Matrix fock_region_povm(int n_dim, double w1, double w2, double th1, double th2);

/// kappa = Gamma(n_max+2, 0) / Gamma(n_max+2, w_max) for the intensity
/// threshold w_max = tau_max.
double kappa_constant(int n_max, double tau_max);

/// Alice marginal Tr_Q |Psi><Psi| for QPSK amplitude alpha.
Matrix alice_marginal(double alpha);

/// Build the full operator family for the given protocol parameters.
TruncatedOperators build_operators(const ProtocolParams& params);

/// Z4 covariance helpers: R = diag(i^n) on B, S the cyclic shift on A, and
/// their product S (x) R on AB.
Matrix z4_rotation_b(int dim_b);
Matrix z4_shift_a();
Matrix z4_unitary_ab(int dim_b);

/// Dense-matrix interchange dump: per matrix a text header line
/// "matrix <label> <rows> <cols>" followed by row-major interleaved
/// (re, im) little-endian float64 payload.
void dump_operators(const TruncatedOperators& ops, const std::string& path);

/// Reads back a dump (labels in file order).
std::vector<std::pair<std::string, Matrix>> load_operator_dump(const std::string& path);

}  // namespace dmcv
