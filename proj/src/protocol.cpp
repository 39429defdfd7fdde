#include "dmcv/protocol.hpp"

#include <cmath>

namespace dmcv {

namespace {
constexpr double kPi = 3.14159265358979323846;

void check_eps_open(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0))
        throw std::domain_error(std::string("ProtocolParams: ") + name + " outside (0,1)");
}
}  // namespace

void ProtocolParams::validate() const {
    if (!(n_rounds >= 1.0)) throw std::domain_error("ProtocolParams: n_rounds < 1");
    if (!(alpha > 0.0)) throw std::domain_error("ProtocolParams: alpha <= 0");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::domain_error("ProtocolParams: gamma outside (0,1)");
    if (!(tau_min_key > 0.0)) throw std::domain_error("ProtocolParams: tau_min_key <= 0");
    if (!(tau_min >= 0.0 && tau_min < tau_max))
        throw std::domain_error("ProtocolParams: need 0 <= tau_min < tau_max");
    if (n_max < 1) throw std::domain_error("ProtocolParams: n_max < 1");
    if (quad_order < 1) throw std::domain_error("ProtocolParams: quad_order < 1");
    if (d_z < 1) throw std::domain_error("ProtocolParams: d_z < 1");
    check_eps_open(eps.cor, "eps_cor");
    check_eps_open(eps.sec, "eps_sec");
    check_eps_open(eps.s, "eps_s");
    check_eps_open(eps.ea, "eps_ea");
    check_eps_open(eps.com_pe, "eps_com_pe");
    if (!(eps.com_ec >= 0.0 && eps.com_ec < 1.0))
        throw std::domain_error("ProtocolParams: eps_com_ec outside [0,1)");
    if (!(eps.ea < eps.sec)) throw std::domain_error("ProtocolParams: eps_ea >= eps_sec");
    if (!(2.0 * eps.s < eps.sec)) throw std::domain_error("ProtocolParams: 2 eps_s >= eps_sec");
}

int Score::test_index() const {
    switch (kind) {
        case Kind::rotation: return k;
        case Kind::inner: return 4 + k;
        case Kind::top: return 8;
        case Kind::bot: break;
    }
    throw std::logic_error("Score::test_index called on bot");
}

Score Score::from_test_index(int idx) {
    if (idx >= 0 && idx < 4) return rotation(idx);
    if (idx >= 4 && idx < 8) return inner(idx - 4);
    if (idx == 8) return top();
    throw std::out_of_range("Score::from_test_index");
}

std::string Score::label() const {
    switch (kind) {
        case Kind::bot: return "bot";
        case Kind::top: return "top";
        case Kind::rotation: return "r" + std::to_string(k);
        case Kind::inner: return "n" + std::to_string(k);
    }
    return "?";
}

int quadrant_of(std::complex<double> y) {
    double theta = std::atan2(y.imag(), y.real());
    if (theta < 0.0) theta += 2.0 * kPi;
    int q = static_cast<int>(theta / (kPi / 2.0));
    return q > 3 ? 3 : q;  // theta == 2 pi falls back into the last quadrant
}

KeySymbol discretize_key(std::complex<double> y, const ProtocolParams& params) {
    double w = std::norm(y);
    if (w < params.tau_min_key) return KeySymbol::empty;
    return static_cast<KeySymbol>(quadrant_of(y));
}

TestSymbol discretize_test(std::complex<double> y, const ProtocolParams& params) {
    double w = std::norm(y);
    if (w > params.tau_max) return {TestSymbol::Kind::top, 0};
    if (w < params.tau_min) return {TestSymbol::Kind::inner, quadrant_of(y)};
    return {TestSymbol::Kind::band, quadrant_of(y)};
}

Score score(int t, int x, const TestSymbol& z) {
    if (t == 0) {
        if (x != -1) throw std::invalid_argument("score: x must be absent in a generation round");
        return Score::bot();
    }
    if (t != 1) throw std::invalid_argument("score: t must be 0 or 1");
    if (x < 0 || x > 3) throw std::invalid_argument("score: x outside 0..3 in a test round");
    switch (z.kind) {
        case TestSymbol::Kind::top: return Score::top();
        case TestSymbol::Kind::band: return Score::rotation(((z.quadrant - x) % 4 + 4) % 4);
        case TestSymbol::Kind::inner: return Score::inner(((z.quadrant - x) % 4 + 4) % 4);
    }
    throw std::logic_error("score: unreachable");
}

}  // namespace dmcv
