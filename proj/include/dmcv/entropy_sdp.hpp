#pragma once

#include <array>
#include <optional>
#include <string>

#include "dmcv/conic.hpp"
#include "dmcv/corrections.hpp"
#include "dmcv/operators.hpp"
#include "dmcv/special_math.hpp"

namespace dmcv {

struct EntropySdpOptions {
    /// Exploit the protocol's Z4 covariance: one moment-block family instead
    /// of four.  Gives the same optimum; the unreduced build remains available
    /// as an independent cross-check backend.
    bool reduce_z4 = true;
    /// Clamp statistical right-hand sides into [0,1] at solve time.
    bool clamp_stat_rhs = true;
    /// Diagnostic: pin the state to a fixed matrix (adds equality rows); the
    /// solve then evaluates the quadrature objective at that state.
    std::optional<Matrix> pin_sigma;
    ConicProgram::Settings solver;
};

/// Dual data of one entropy solve.  The feasibility of (y) against the
/// program data is what certifies the bound; verify() never trusts solver
/// status.
struct DualCertificate {
    Eigen::VectorXd y;   // row duals
    Eigen::VectorXd q;   // statistics the solve ran at (9 test scores)
    double primal_value = 0.0;
    double dual_value = 0.0;
    double certified_value = 0.0;  // set by verify()
    // named duals, paper convention (all >= 0 when feasible)
    double lambda_norm = 0.0;
    double lambda_dist = 0.0;
    std::array<double, Score::kTestAlphabet> lambda_upper{};
    std::array<double, Score::kTestAlphabet> lambda_lower{};
    double phi = 0.0;  // constant term of the affine dual bound (q = 0 value)
    double max_psd_violation = 0.0;
    double max_slack_violation = 0.0;
    int iterations = 0;
    bool solver_converged = false;
    bool verified = false;
};

/// Conditional-entropy lower-bound program: quadrature objective over the
/// truncated operator family, normalisation/trace-distance/statistics
/// constraints with their linearised corrections, and the moment-matrix PSD
/// blocks.  The structure (A, C) is fixed at construction; only right-hand
/// sides depend on the statistics q, so re-solves warm start.
class EntropySdp {
  public:
    EntropySdp(const TruncatedOperators& ops, const QuadratureRule& rule,
               const CorrectionSet& corrections, double gamma,
               EntropySdpOptions options = {});

    /// Solve at statistics q (9-vector over the test alphabet).  Throws
    /// std::runtime_error when the solver fails to reach its tolerances,
    /// naming the worst-violated constraint group.
    DualCertificate solve(const Eigen::VectorXd& q);

    /// Recomputes dual feasibility from (program data, cert.y) only; fills
    /// certified_value and violation fields.  Rejects certificates infeasible
    /// beyond 1e-7.  Returns the certified lower bound (bits).
    double verify(DualCertificate& cert) const;

    /// Per-row affine right-hand side rhs(q) = b0 + bq . q (before clamping).
    struct RowAffine {
        double b0 = 0.0;
        Eigen::VectorXd bq;
    };
    const std::vector<RowAffine>& rhs_affine() const { return rhs_affine_; }

    const ConicProgram& program() const { return prog_; }
    const CorrectionSet& corrections() const { return corrections_; }
    /// Swap the linearisation tangents without rebuilding the program: the
    /// constraint matrices are untouched, only right-hand sides change, so the
    /// factorization and warm start survive.
    void set_corrections(const CorrectionSet& corrections);
    double gamma() const { return gamma_; }
    double kappa() const { return kappa_; }

    int row_norm_upper() const { return row_norm_upper_; }
    int row_norm_lower() const { return row_norm_lower_; }
    int row_dist() const { return row_dist_; }
    const std::array<int, Score::kTestAlphabet>& rows_stat_upper() const {
        return row_stat_upper_;
    }
    const std::array<int, Score::kTestAlphabet>& rows_stat_lower() const {
        return row_stat_lower_;
    }

    /// Serialises problem metadata and a certificate as a JSON snapshot.
    std::string snapshot_json(const DualCertificate* cert) const;

  private:
    void build(const TruncatedOperators& ops, const QuadratureRule& rule);
    void add_tie(int blk_a, int ia, int ja, int blk_b, int ib, int jb,
                 std::complex<double> phase);
    void add_invariance_rows(int nb);
    Eigen::VectorXd rhs_vector(const Eigen::VectorXd& q) const;
    Eigen::VectorXd clip_named_duals(const Eigen::VectorXd& y) const;
    void name_duals(DualCertificate& cert) const;
    void refresh_correction_rows();

    ConicProgram prog_;
    CorrectionSet corrections_;
    EntropySdpOptions options_;
    double gamma_ = 0.0;
    double kappa_ = 1.0;
    int dim_ab_ = 0;
    int blk_sigma_ = -1;
    int blk_zeta_ = -1;
    int row_norm_upper_ = -1, row_norm_lower_ = -1, row_dist_ = -1;
    std::array<int, Score::kTestAlphabet> row_stat_upper_{}, row_stat_lower_{};
    std::vector<RowAffine> rhs_affine_;
    std::optional<ConicProgram::Solution> warm_;
    int quad_order_ = 0;
};

}  // namespace dmcv
