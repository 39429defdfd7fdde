#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace dmcv {

/// Standard-form conic program over complex Hermitian PSD blocks and a
/// nonnegative scalar cone:
///
///   minimize    sum_k <C_k, X_k> + c_s . s
///   subject to  A(X, s) = b,   X_k >= 0 (PSD),  s >= 0
///
/// Everything is carried in a real parameter vector: a Hermitian block of
/// dimension d contributes d^2 parameters (diagonal entries, then
/// sqrt(2)-scaled real/imaginary parts of the upper triangle), which makes the
/// Frobenius inner product the plain dot product.  Rows of A are built through
/// entry-level helpers that take care of Hermitian mirroring.
class ConicProgram {
  public:
    using Cplx = std::complex<double>;
    using Mat = Eigen::MatrixXcd;
    using Vec = Eigen::VectorXd;

    int add_hermitian_block(int dim);
    /// Adds one nonnegative scalar; returns its parameter index.
    int add_slack();

    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    int block_dim(int k) const { return blocks_[k].dim; }
    int num_params() const { return num_params_; }
    int num_rows() const { return static_cast<int>(b_.size()); }

    /// Objective contributions.
    void add_objective(int block, const Mat& h);
    void add_objective_param(int param_index, double coeff);

    /// Starts a new constraint row with right-hand side rhs; returns row id.
    int new_row(double rhs);
    void set_rhs(int row, double rhs);
    double rhs(int row) const { return b_[row]; }

    /// Adds Re(coeff * X_block(i, j)) to the row functional.  Indices may
    /// address either triangle; mirroring applies the conjugate coefficient.
    void row_add_entry(int row, int block, int i, int j, Cplx coeff);
    /// Adds <H, X_block> (H Hermitian) to the row functional.
    void row_add_inner(int row, int block, const Mat& h);
    void row_add_param(int row, int param_index, double coeff);

    /// Dense row coefficients over a small set of parameters (rank filtering).
    std::vector<std::pair<int, double>> row_entries(int row) const;
    /// Drops the most recently added row (used by rank filters).
    void pop_row();
    /// Triplet high-water mark / entries added since a mark (last row only).
    std::size_t triplet_mark() const { return triplets_.size(); }
    std::vector<std::pair<int, double>> entries_since(std::size_t mark) const;
    const std::vector<int>& slack_param_indices() const { return slack_params_; }

    /// Parameter/matrix conversions for one block.
    Mat param_to_matrix(int block, const Vec& params) const;
    void matrix_to_param(int block, const Mat& m, Vec& params) const;
    int block_param_offset(int k) const { return blocks_[k].offset; }

    struct Settings {
        double tol = 1e-7;            // residual + gap target (relative)
        int max_iter = 200000;
        int check_every = 25;
        double rho = 10.0;
        double over_relax = 1.0;
        bool adaptive_rho = true;
        int accel_memory = 10;        // Anderson acceleration window (0 = off)
        bool verbose = false;
    };

    struct Solution {
        Vec x;            // affine-feasible iterate
        Vec z;            // cone-feasible iterate
        Vec u;            // scaled dual state (for warm starts)
        Vec y;            // equality-row duals (bound = b . y)
        double rho = 0.0;
        double primal_obj = 0.0;
        double dual_obj = 0.0;
        double primal_residual = 0.0;
        double dual_residual = 0.0;
        double gap = 0.0;
        int iterations = 0;
        bool converged = false;
    };

    /// ADMM solve.  warm (z, u) from a previous solution with identical
    /// structure may be supplied to continue.
    Solution solve(const Settings& settings, const Solution* warm = nullptr) const;

    /// Dual slack S = C - A^T y in parameter space.
    Vec dual_slack(const Vec& y) const;
    double b_dot(const Vec& y) const;

    /// Objective vector access (parameter space).
    const Vec objective() const;

  private:
    struct Block {
        int dim;
        int offset;
    };

    void ensure_assembled() const;
    void compute_scaling() const;

    std::vector<Block> blocks_;
    std::vector<int> slack_params_;
    int num_params_ = 0;
    std::vector<Eigen::Triplet<double>> triplets_;
    std::vector<double> b_;
    std::vector<std::pair<int, double>> obj_entries_;

    // assembled lazily; equilibration and the A A^T factorization are kept
    // since right-hand-side updates between solves do not touch them
    mutable Eigen::SparseMatrix<double> a_;
    mutable Eigen::SparseMatrix<double> at_;
    mutable Eigen::SparseMatrix<double> a_scaled_;
    mutable Eigen::SparseMatrix<double> at_scaled_;
    mutable Vec row_scale_;
    mutable Vec col_scale_;
    mutable std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> chol_;
    mutable bool assembled_ = false;
};

}  // namespace dmcv
