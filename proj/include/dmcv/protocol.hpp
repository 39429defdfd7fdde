#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace dmcv {

/// Failure-probability budget.  eps_com_ec is the error-correction completeness
/// share; an ideal code (zero failure) is modelled by 0.
struct EpsilonBudget {
    double cor = 1e-15;
    double sec = 1e-6;
    double s = 1e-6 / 8.0;
    double ea = 1e-6 / 2.0;
    double com_pe = 1e-10;
    double com_ec = 0.0;
};

/// Protocol and proof parameters.  The three tau thresholds are intensity
/// values: a heterodyne outcome y is binned by W = |y|^2 compared against them
/// directly (defaults 0.6 / 1.5 / 20).
struct ProtocolParams {
    double n_rounds = 1e14;
    double alpha = 0.66;
    double gamma = 0.1;
    double tau_min_key = 0.6;
    double tau_min = 1.5;
    double tau_max = 20.0;
    int n_max = 12;
    int quad_order = 4;
    int d_z = 5;
    EpsilonBudget eps;

    void validate() const;
};

/// Raw-key symbol for a generation round: post-selection slot plus quadrant.
enum class KeySymbol : int { empty = -1, q0 = 0, q1 = 1, q2 = 2, q3 = 3 };

/// Discretised outcome of a test round.
struct TestSymbol {
    enum class Kind { inner, band, top };
    Kind kind = Kind::band;
    int quadrant = 0;  // valid for inner/band

    bool operator==(const TestSymbol&) const = default;
};

/// Per-round public score.  Nine test labels plus the generation label bot.
struct Score {
    enum class Kind { bot, top, rotation, inner };
    Kind kind = Kind::bot;
    int k = 0;  // rotation class, valid for rotation/inner

    bool operator==(const Score&) const = default;

    /// Index in the test alphabet C \ {bot}: rotation 0..3, inner 4..7, top 8.
    int test_index() const;
    std::string label() const;

    static constexpr int kTestAlphabet = 9;
    static Score bot() { return {Kind::bot, 0}; }
    static Score top() { return {Kind::top, 0}; }
    static Score rotation(int k) { return {Kind::rotation, k}; }
    static Score inner(int k) { return {Kind::inner, k}; }
    static Score from_test_index(int idx);
};

/// Quadrant of the phase angle, intervals closed below and open above.
int quadrant_of(std::complex<double> y);

/// Generation-round discretisation map (T = 0).
KeySymbol discretize_key(std::complex<double> y, const ProtocolParams& params);

/// Test-round discretisation map (T = 1), nine regions.
TestSymbol discretize_test(std::complex<double> y, const ProtocolParams& params);

/// Score function f_PE.  x must be -1 when t = 0 and in 0..3 when t = 1.
Score score(int t, int x, const TestSymbol& z);

}  // namespace dmcv
