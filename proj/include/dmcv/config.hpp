#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmcv/channel.hpp"
#include "dmcv/conic.hpp"
#include "dmcv/corrections.hpp"
#include "dmcv/protocol.hpp"

namespace dmcv {

/// Grid and optimisation plan for a sweep.
struct SweepSpec {
    std::vector<double> loss_db;   // channel loss grid (dB)
    std::vector<double> n_rounds;  // block-size grid (finite mode)
    std::string mode = "asymptotic";  // "asymptotic" | "finite"
    bool optimize_alpha = true;
    bool optimize_beta = true;
    bool optimize_nu = true;
    bool optimize_chi_dual = false;
    bool optimize_eps_split = false;
    bool continuity_penalty = true;
    bool statistical_corrections = true;
    std::vector<double> alpha_grid = {0.45, 0.66, 0.9, 1.15};
    std::vector<double> chi_dual_grid = {0.0, 0.01, 0.05};
    int descent_rounds = 1;
    int workers = 1;
};

struct Config {
    ProtocolParams protocol;
    ChannelParams channel;
    double loss_db = 0.0;  // convenience mirror of channel.eta
    bool lin_auto = true;  // pick tangent points from the honest q_top
    LinearisationPoints lin;
    double lin_scale = 30.0;  // auto tangent point = lin_scale * q_top
    ConicProgram::Settings solver;
    bool reduce_z4 = true;
    SweepSpec sweep;
    std::uint64_t seed = 1;
    bool leak_reverse = false;  // use H(Z|X) instead of the default H(X|Z)

    void validate() const;
};

Config default_config();
Config load_config(const std::string& path);
std::string config_to_yaml(const Config& cfg);

}  // namespace dmcv
