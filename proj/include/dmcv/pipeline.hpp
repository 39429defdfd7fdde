#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dmcv/channel.hpp"
#include "dmcv/config.hpp"
#include "dmcv/entropy_sdp.hpp"
#include "dmcv/finite_size.hpp"
#include "dmcv/tradeoff.hpp"

namespace dmcv {

struct SweepResult {
    std::vector<KeyRateReport> reports;  // deterministic grid order
    std::string csv() const;
    std::string json_sidecar(const Config& cfg) const;
};

struct CompletenessResult {
    double abort_rate = 0.0;
    double wilson_low = 0.0;
    double wilson_high = 1.0;
    long long trials = 0;
    long long aborts = 0;
    double budget = 0.0;
};

/// Orchestration: per-point optimisation, sweeps, and the Monte Carlo
/// completeness validator.  Each grid point is evaluated in isolation
/// (deterministic regardless of worker interleaving); certified solves are
/// cached and warm-started within a point.
class Pipeline {
  public:
    explicit Pipeline(Config cfg);

    /// Finite-size key rate at one (loss, N) point, optimising the scalars
    /// enabled in the sweep spec.
    KeyRateReport keyrate_point(double loss_db, double n_rounds);

    /// Asymptotic rate (N -> infinity, beta -> 0, acceptance = {p}).
    KeyRateReport asymptotic_point(double loss_db);

    /// Grid sweep per the config; points run concurrently, results merged in
    /// grid order.
    SweepResult run_sweep();

    /// Multinomial abort-rate estimate against the acceptance box built for
    /// the given total parameter-estimation budget.
    CompletenessResult simulate_completeness(long long trials, double budget_total,
                                             double n_rounds);

    const Config& config() const { return cfg_; }

  private:
    KeyRateReport evaluate_point(double loss_db, double n_rounds, bool asymptotic) const;
    LinearisationPoints auto_points(double q_top, double kappa) const;

    Config cfg_;
};

}  // namespace dmcv
