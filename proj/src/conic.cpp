#include "dmcv/conic.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dmcv {

namespace {
const double kSqrt2 = std::sqrt(2.0);

// position of the pair (i,j), i<j, among row-major upper-triangle entries
inline int offdiag_index(int dim, int i, int j) {
    return i * (2 * dim - i - 1) / 2 + (j - i - 1);
}
}  // namespace

int ConicProgram::add_hermitian_block(int dim) {
    if (dim < 1) throw std::domain_error("add_hermitian_block: dim < 1");
    blocks_.push_back({dim, num_params_});
    num_params_ += dim * dim;
    assembled_ = false;
    return static_cast<int>(blocks_.size()) - 1;
}

int ConicProgram::add_slack() {
    slack_params_.push_back(num_params_);
    assembled_ = false;
    return num_params_++;
}

void ConicProgram::row_add_entry(int row, int block, int i, int j, Cplx coeff) {
    const Block& blk = blocks_[block];
    if (i < 0 || j < 0 || i >= blk.dim || j >= blk.dim)
        throw std::out_of_range("row_add_entry: index outside block");
    if (i == j) {
        if (coeff.real() != 0.0) triplets_.emplace_back(row, blk.offset + i, coeff.real());
        assembled_ = false;
        return;
    }
    if (i > j) {
        // X(i,j) = conj(X(j,i)); Re(c conj(w)) = Re(conj(c) w)
        std::swap(i, j);
        coeff = std::conj(coeff);
    }
    // X(i,j) = (p_re + i p_im)/sqrt2; Re(c X) = Re(c) p_re/sqrt2 - Im(c) p_im/sqrt2
    int base = blk.offset + blk.dim + 2 * offdiag_index(blk.dim, i, j);
    if (coeff.real() != 0.0) triplets_.emplace_back(row, base, coeff.real() / kSqrt2);
    if (coeff.imag() != 0.0) triplets_.emplace_back(row, base + 1, -coeff.imag() / kSqrt2);
    assembled_ = false;
}

void ConicProgram::row_add_inner(int row, int block, const Mat& h) {
    const Block& blk = blocks_[block];
    if (h.rows() != blk.dim || h.cols() != blk.dim)
        throw std::invalid_argument("row_add_inner: dimension mismatch");
    for (int i = 0; i < blk.dim; ++i) {
        if (h(i, i).real() != 0.0) triplets_.emplace_back(row, blk.offset + i, h(i, i).real());
        for (int j = i + 1; j < blk.dim; ++j) {
            Cplx v = h(i, j);
            if (v == Cplx(0.0, 0.0)) continue;
            int base = blk.offset + blk.dim + 2 * offdiag_index(blk.dim, i, j);
            // <H,X> = sum_i H_ii X_ii + sum_{i<j} 2 Re(conj(H_ij) X_ij)
            triplets_.emplace_back(row, base, kSqrt2 * v.real());
            triplets_.emplace_back(row, base + 1, kSqrt2 * v.imag());
        }
    }
    assembled_ = false;
}

void ConicProgram::row_add_param(int row, int param_index, double coeff) {
    triplets_.emplace_back(row, param_index, coeff);
    assembled_ = false;
}

int ConicProgram::new_row(double rhs) {
    b_.push_back(rhs);
    return static_cast<int>(b_.size()) - 1;
}

void ConicProgram::set_rhs(int row, double rhs) { b_[row] = rhs; }

void ConicProgram::add_objective(int block, const Mat& h) {
    const Block& blk = blocks_[block];
    if (h.rows() != blk.dim || h.cols() != blk.dim)
        throw std::invalid_argument("add_objective: dimension mismatch");
    for (int i = 0; i < blk.dim; ++i) {
        if (h(i, i).real() != 0.0) obj_entries_.emplace_back(blk.offset + i, h(i, i).real());
        for (int j = i + 1; j < blk.dim; ++j) {
            Cplx v = h(i, j);
            if (v == Cplx(0.0, 0.0)) continue;
            int base = blk.offset + blk.dim + 2 * offdiag_index(blk.dim, i, j);
            obj_entries_.emplace_back(base, kSqrt2 * v.real());
            obj_entries_.emplace_back(base + 1, kSqrt2 * v.imag());
        }
    }
}

void ConicProgram::add_objective_param(int param_index, double coeff) {
    obj_entries_.emplace_back(param_index, coeff);
}

std::vector<std::pair<int, double>> ConicProgram::row_entries(int row) const {
    std::vector<std::pair<int, double>> out;
    for (const auto& t : triplets_)
        if (t.row() == row) out.emplace_back(t.col(), t.value());
    return out;
}

void ConicProgram::pop_row() {
    int row = static_cast<int>(b_.size()) - 1;
    while (!triplets_.empty() && triplets_.back().row() == row) triplets_.pop_back();
    b_.pop_back();
    assembled_ = false;
}

std::vector<std::pair<int, double>> ConicProgram::entries_since(std::size_t mark) const {
    std::vector<std::pair<int, double>> out;
    for (std::size_t i = mark; i < triplets_.size(); ++i)
        out.emplace_back(triplets_[i].col(), triplets_[i].value());
    return out;
}

ConicProgram::Mat ConicProgram::param_to_matrix(int block, const Vec& params) const {
    const Block& blk = blocks_[block];
    Mat m(blk.dim, blk.dim);
    for (int i = 0; i < blk.dim; ++i) {
        m(i, i) = params(blk.offset + i);
        for (int j = i + 1; j < blk.dim; ++j) {
            int base = blk.offset + blk.dim + 2 * offdiag_index(blk.dim, i, j);
            Cplx v(params(base) / kSqrt2, params(base + 1) / kSqrt2);
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    return m;
}

void ConicProgram::matrix_to_param(int block, const Mat& m, Vec& params) const {
    const Block& blk = blocks_[block];
    for (int i = 0; i < blk.dim; ++i) {
        params(blk.offset + i) = m(i, i).real();
        for (int j = i + 1; j < blk.dim; ++j) {
            int base = blk.offset + blk.dim + 2 * offdiag_index(blk.dim, i, j);
            params(base) = kSqrt2 * m(i, j).real();
            params(base + 1) = kSqrt2 * m(i, j).imag();
        }
    }
}

const ConicProgram::Vec ConicProgram::objective() const {
    Vec c = Vec::Zero(num_params_);
    for (const auto& [idx, v] : obj_entries_) c(idx) += v;
    return c;
}

void ConicProgram::ensure_assembled() const {
    if (assembled_) return;
    a_.resize(static_cast<int>(b_.size()), num_params_);
    a_.setFromTriplets(triplets_.begin(), triplets_.end());
    a_.makeCompressed();
    at_ = a_.transpose();
    at_.makeCompressed();
    chol_.reset();
    assembled_ = true;
}

ConicProgram::Vec ConicProgram::dual_slack(const Vec& y) const {
    ensure_assembled();
    return objective() - at_ * y;
}

double ConicProgram::b_dot(const Vec& y) const {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(b_.size()); ++i) s += b_[i] * y(i);
    return s;
}

void ConicProgram::compute_scaling() const {
    // Ruiz-style equilibration with cone-safe column scaling: every parameter
    // of a PSD block shares one factor, slack columns scale individually.
    const int n = num_params_;
    const int mrows = static_cast<int>(b_.size());
    row_scale_ = Vec::Ones(mrows);
    col_scale_ = Vec::Ones(n);

    std::vector<int> col_group(n, -1);  // block id, or -1 for slack columns
    for (int k = 0; k < static_cast<int>(blocks_.size()); ++k) {
        int off = blocks_[k].offset, cnt = blocks_[k].dim * blocks_[k].dim;
        for (int j = 0; j < cnt; ++j) col_group[off + j] = k;
    }

    Eigen::SparseMatrix<double> work = a_;
    for (int pass = 0; pass < 10; ++pass) {
        Vec rmax = Vec::Zero(mrows), cmax = Vec::Zero(n);
        for (int outer = 0; outer < work.outerSize(); ++outer)
            for (Eigen::SparseMatrix<double>::InnerIterator itr(work, outer); itr; ++itr) {
                double v = std::abs(itr.value());
                rmax(itr.row()) = std::max(rmax(itr.row()), v);
                cmax(itr.col()) = std::max(cmax(itr.col()), v);
            }
        // pool column maxima per block
        Vec gmax = Vec::Zero(blocks_.size());
        for (int j = 0; j < n; ++j)
            if (col_group[j] >= 0) gmax(col_group[j]) = std::max(gmax(col_group[j]), cmax(j));
        Vec dr(mrows), dc(n);
        for (int i = 0; i < mrows; ++i) dr(i) = rmax(i) > 0.0 ? 1.0 / std::sqrt(rmax(i)) : 1.0;
        for (int j = 0; j < n; ++j) {
            double m = col_group[j] >= 0 ? gmax(col_group[j]) : cmax(j);
            dc(j) = m > 0.0 ? 1.0 / std::sqrt(m) : 1.0;
        }
        row_scale_ = row_scale_.cwiseProduct(dr);
        col_scale_ = col_scale_.cwiseProduct(dc);
        work = dr.asDiagonal() * work * dc.asDiagonal();
    }
    a_scaled_ = work;
    at_scaled_ = work.transpose();
    at_scaled_.makeCompressed();
}

ConicProgram::Solution ConicProgram::solve(const Settings& settings, const Solution* warm) const {
    ensure_assembled();
    const int n = num_params_;
    const int mrows = static_cast<int>(b_.size());
    Vec c_true = objective();
    Vec b_true(mrows);
    for (int i = 0; i < mrows; ++i) b_true(i) = b_[i];

    if (!chol_) {
        compute_scaling();
        Eigen::SparseMatrix<double> gram = (a_scaled_ * at_scaled_).pruned();
        chol_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
        chol_->compute(gram);
        if (chol_->info() != Eigen::Success) {
            chol_.reset();
            throw std::runtime_error(
                "ConicProgram::solve: A A^T factorization failed (dependent rows?)");
        }
    }
    const auto& chol = *chol_;

    // scaled data: x = E x^, y = D y^ / sigma_c, obj^ = sigma_c sigma_b obj
    Vec b = row_scale_.cwiseProduct(b_true);
    Vec c = col_scale_.cwiseProduct(c_true);
    double sigma_b = 1.0 / std::max(b.norm(), 1e-6);
    double sigma_c = 1.0 / std::max(c.norm(), 1e-6);
    b *= sigma_b;
    c *= sigma_c;

    double rho = settings.rho;
    Vec z = Vec::Zero(n), u = Vec::Zero(n);
    if (warm != nullptr && warm->z.size() == n) {
        // map the unscaled warm point into the scaled coordinates
        z = sigma_b * warm->z.cwiseQuotient(col_scale_);
        u = warm->u;
        if (warm->rho > 0.0) rho = warm->rho;
    }

    Vec x(n), yhat(mrows), xh(n);
    Vec z_out(n), u_out(n), z_prev = z;

    // one ADMM pass: (z, u) -> (z_out, u_out); x, yhat are by-products
    auto apply_map = [&](const Vec& z_in, const Vec& u_in) {
        Vec v = z_in - u_in - c / rho;
        yhat = chol.solve(a_scaled_ * v - b);
        x = v - at_scaled_ * yhat;
        xh = settings.over_relax * x + (1.0 - settings.over_relax) * z_in;
        z_out = xh + u_in;
        int nblocks = static_cast<int>(blocks_.size());
#pragma omp parallel for schedule(dynamic)
        for (int k = 0; k < nblocks; ++k) {
            Mat m = param_to_matrix(k, z_out);
            Eigen::SelfAdjointEigenSolver<Mat> es(m);
            const auto& ev = es.eigenvalues();
            if (ev(0) >= 0.0) continue;
            Mat clipped = Mat::Zero(m.rows(), m.cols());
            for (int e = 0; e < ev.size(); ++e) {
                if (ev(e) <= 0.0) continue;
                clipped.noalias() +=
                    ev(e) * es.eigenvectors().col(e) * es.eigenvectors().col(e).adjoint();
            }
            matrix_to_param(k, clipped, z_out);
        }
        for (int p : slack_params_)
            if (z_out(p) < 0.0) z_out(p) = 0.0;
        u_out = u_in + xh - z_out;
    };

    // Anderson acceleration (type II) over the stacked iterate (z, u); the
    // degenerate faces of these problems give plain ADMM a long 1/k tail.
    const int mem = std::max(0, settings.accel_memory);
    Eigen::MatrixXd hist_dxi, hist_dg;
    Vec xi_prev, g_prev;
    int hist_count = 0;
    double best_res = std::numeric_limits<double>::infinity();
    auto reset_accel = [&]() {
        hist_count = 0;
        xi_prev.resize(0);
        best_res = std::numeric_limits<double>::infinity();
    };
    if (mem > 0) {
        hist_dxi.resize(2 * n, mem);
        hist_dg.resize(2 * n, mem);
    }

    Solution sol;
    int it = 0;
    for (it = 1; it <= settings.max_iter; ++it) {
        apply_map(z, u);

        if (mem > 0) {
            Vec xi(2 * n), g(2 * n);
            xi << z, u;
            g << z_out - z, u_out - u;
            double res = g.norm();
            if (res > 2.0 * best_res) {
                reset_accel();
                best_res = res;
            } else {
                best_res = std::min(best_res, res);
            }
            if (xi_prev.size() == 2 * n) {
                int col = std::min(hist_count, mem - 1);
                if (hist_count >= mem) {
                    hist_dxi.leftCols(mem - 1) = hist_dxi.rightCols(mem - 1).eval();
                    hist_dg.leftCols(mem - 1) = hist_dg.rightCols(mem - 1).eval();
                }
                hist_dxi.col(col) = xi - xi_prev;
                hist_dg.col(col) = g - g_prev;
                ++hist_count;
            }
            xi_prev = xi;
            g_prev = g;

            int k = std::min(hist_count, mem);
            if (k >= 2) {
                auto dg = hist_dg.leftCols(k);
                Eigen::VectorXd gamma =
                    (dg.transpose() * dg +
                     1e-12 * Eigen::MatrixXd::Identity(k, k))
                        .ldlt()
                        .solve(dg.transpose() * g);
                Vec xi_acc = xi + g - (hist_dxi.leftCols(k) + dg) * gamma;
                z = xi_acc.head(n);
                u = xi_acc.tail(n);
            } else {
                z = z_out;
                u = u_out;
            }
        } else {
            z = z_out;
            u = u_out;
        }

        if (it % settings.check_every == 0 || it == settings.max_iter) {
            double pri = (x - z_out).norm() / std::max({x.norm(), z_out.norm(), 1.0});
            double dua = rho * (z_out - z_prev).norm() / std::max(1.0, rho * u_out.norm());
            Vec y_true = (rho / sigma_c) * row_scale_.cwiseProduct(-yhat);
            double pobj = c_true.dot((1.0 / sigma_b) * col_scale_.cwiseProduct(z_out));
            double dobj = b_true.dot(y_true);
            double gap = std::abs(pobj - dobj) / std::max({1.0, std::abs(pobj), std::abs(dobj)});
            if (settings.verbose && it % (settings.check_every * 40) == 0)
                std::fprintf(stderr, "  admm it %6d rho %.2e pri %.2e dua %.2e gap %.2e obj %.8f\n",
                             it, rho, pri, dua, gap, pobj);
            if (pri < settings.tol && dua < settings.tol && gap < 10.0 * settings.tol) {
                sol.converged = true;
                break;
            }
            if (settings.adaptive_rho && it % (settings.check_every * 4) == 0) {
                bool changed = false;
                if (pri > 10.0 * dua && rho < 1e6) {
                    rho *= 2.0;
                    u_out *= 0.5;
                    changed = true;
                } else if (dua > 10.0 * pri && rho > 1e-6) {
                    rho *= 0.5;
                    u_out *= 2.0;
                    changed = true;
                }
                if (changed) {
                    z = z_out;
                    u = u_out;
                    reset_accel();
                }
            }
        }
        z_prev = z_out;
    }

    sol.x = (1.0 / sigma_b) * col_scale_.cwiseProduct(x);
    sol.z = (1.0 / sigma_b) * col_scale_.cwiseProduct(z_out);
    sol.u = u_out;
    sol.rho = rho;
    sol.y = (rho / sigma_c) * row_scale_.cwiseProduct(-yhat);
    sol.primal_obj = c_true.dot(sol.z);
    sol.dual_obj = b_true.dot(sol.y);
    sol.primal_residual = (x - z_out).norm() / std::max({x.norm(), z_out.norm(), 1.0});
    sol.dual_residual = rho * (z_out - z_prev).norm() / std::max(1.0, rho * u_out.norm());
    sol.gap = std::abs(sol.primal_obj - sol.dual_obj) /
              std::max({1.0, std::abs(sol.primal_obj), std::abs(sol.dual_obj)});
    sol.iterations = it > settings.max_iter ? settings.max_iter : it;
    return sol;
}

}  // namespace dmcv
