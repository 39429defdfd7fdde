#pragma once

#include <Eigen/Dense>
#include <array>
#include <complex>

#include "dmcv/protocol.hpp"
#include "dmcv/rng.hpp"

namespace dmcv {

/// Honest-implementation channel: pure loss eta plus excess noise chi.
/// chi_dual is the trial noise used to generate the statistics the dual
/// certificate is built from.
struct ChannelParams {
    double eta = 1.0;
    double chi = 0.0;
    double chi_dual = 0.0;

    void validate() const;
};

/// eta = 10^(-dB/10)
double eta_from_loss_db(double db);

/// Probability that a heterodyne outcome falls in the region
/// W in [w1, w2], theta in [th1, th2], for Alice symbol x and noise chi.
/// Analytic radial reduction plus adaptive angular quadrature, target 1e-9.
double region_probability(int x, double w1, double w2, double th1, double th2,
                          const ChannelParams& channel, double chi, double alpha);

/// Full-radius angular density by the closed erf form (one theta slice
/// integrated over W in [0, inf)).
double angular_density(int x, double theta, const ChannelParams& channel, double chi,
                       double alpha);

/// Honest score statistics and key-round tables.
struct HonestStatistics {
    Eigen::VectorXd q;                      // 9 test-conditional scores, Score::test_index order
    std::array<std::array<double, 5>, 4> joint;  // Pr[X=x, Z=z | T=0], z in {0..3, empty=4}
    double pass_prob = 0.0;                 // Pr[Z != empty | T = 0]
    double h_x_given_z = 0.0;               // bits, conditioned on passing post-selection
    double h_z_given_x = 0.0;               // bits, conditioned on passing post-selection
};

/// Statistics at excess noise chi (use channel.chi or channel.chi_dual).
HonestStatistics honest_statistics(const ProtocolParams& params, const ChannelParams& channel,
                                   double chi);

/// One protocol round under the honest channel.
struct RoundSample {
    int x = 0;
    int t = 0;
    std::complex<double> y;
    KeySymbol key_z = KeySymbol::empty;  // valid when t == 0
    TestSymbol test_z;                   // valid when t == 1
    Score c;
};

RoundSample sample_round(const ProtocolParams& params, const ChannelParams& channel,
                         RandomStream& stream);

}  // namespace dmcv
