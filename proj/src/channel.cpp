#include "dmcv/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmcv {

namespace {
constexpr double kPi = 3.14159265358979323846;

double phase_of(int x) { return (2.0 * x + 1.0) * kPi / 4.0; }

// int_{r1}^{r2} r exp(-(r - mu)^2 / s) dr, r2 may be +inf.
double radial_moment(double r1, double r2, double mu, double s) {
    double rs = std::sqrt(s);
    double e1 = std::exp(-(r1 - mu) * (r1 - mu) / s);
    double e2 = std::isinf(r2) ? 0.0 : std::exp(-(r2 - mu) * (r2 - mu) / s);
    double f2 = std::isinf(r2) ? 1.0 : std::erf((r2 - mu) / rs);
    double f1 = std::erf((r1 - mu) / rs);
    return 0.5 * s * (e1 - e2) + mu * 0.5 * std::sqrt(kPi * s) * (f2 - f1);
}

struct Integrand {
    double a;   // sqrt(eta) * alpha
    double s;   // 1 + eta chi / 2
    double phi; // Alice phase
    double r1, r2;

    double operator()(double theta) const {
        double c = std::cos(theta - phi);
        double arg = a * a * (1.0 - c * c) / s;
        return std::exp(-arg) * radial_moment(r1, r2, a * c, s) / (kPi * s);
    }
};

// Adaptive Simpson with absolute tolerance.
double adaptive_simpson(const Integrand& f, double lo, double hi, double flo, double fmid,
                        double fhi, double whole, double tol, int depth) {
    double mid = 0.5 * (lo + hi);
    double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    double flm = f(lm), frm = f(rm);
    double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, lo, mid, flo, flm, fmid, left, tol * 0.5, depth - 1) +
           adaptive_simpson(f, mid, hi, fmid, frm, fhi, right, tol * 0.5, depth - 1);
}

double integrate_theta(const Integrand& f, double lo, double hi, double tol) {
    // seed with a few panels so narrow structure near the mean phase is seen
    const int panels = 8;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        double a = lo + (hi - lo) * i / panels;
        double b = lo + (hi - lo) * (i + 1) / panels;
        double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson(f, a, b, fa, fm, fb, whole, tol / panels, 28);
    }
    return total;
}

}  // namespace

void ChannelParams::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::domain_error("ChannelParams: eta outside (0,1]");
    if (!(chi >= 0.0)) throw std::domain_error("ChannelParams: chi < 0");
    if (!(chi_dual >= 0.0)) throw std::domain_error("ChannelParams: chi_dual < 0");
}

double eta_from_loss_db(double db) {
    if (db < 0.0) throw std::domain_error("eta_from_loss_db: negative loss");
    return std::pow(10.0, -db / 10.0);
}

double region_probability(int x, double w1, double w2, double th1, double th2,
                          const ChannelParams& channel, double chi, double alpha) {
    if (x < 0 || x > 3) throw std::domain_error("region_probability: x outside 0..3");
    if (w1 < 0.0 || w2 < w1 || th2 < th1) throw std::domain_error("region_probability: bad region");
    double s = 1.0 + channel.eta * chi / 2.0;
    double a = std::sqrt(channel.eta) * alpha;
    double r1 = std::sqrt(w1);
    double r2 = std::isinf(w2) ? w2 : std::sqrt(w2);
    if (a == 0.0) {
        // rotation invariant: radial factor times the arc fraction
        double e1 = std::exp(-w1 / s);
        double e2 = std::isinf(w2) ? 0.0 : std::exp(-w2 / s);
        return (e1 - e2) * (th2 - th1) / (2.0 * kPi);
    }
    Integrand f{a, s, phase_of(x), r1, r2};
    return integrate_theta(f, th1, th2, 1e-12);
}

double angular_density(int x, double theta, const ChannelParams& channel, double chi,
                       double alpha) {
    double s = 1.0 + channel.eta * chi / 2.0;
    double phi_bar = std::sqrt(channel.eta * alpha * alpha / s);
    double c = std::cos(theta - phase_of(x));
    double fc = phi_bar * c;
    return std::exp(-phi_bar * phi_bar) / (2.0 * kPi) *
           (1.0 + std::sqrt(kPi) * fc * std::exp(fc * fc) * (1.0 + std::erf(fc)));
}

HonestStatistics honest_statistics(const ProtocolParams& params, const ChannelParams& channel,
                                   double chi) {
    params.validate();
    channel.validate();
    const double inf = std::numeric_limits<double>::infinity();
    HonestStatistics st;
    st.q = Eigen::VectorXd::Zero(Score::kTestAlphabet);

    auto quadrant = [](int q) {
        return std::pair<double, double>{q * kPi / 2.0, (q + 1) * kPi / 2.0};
    };

    // Test-round scores, averaged over the uniform Alice symbol.
    for (int x = 0; x < 4; ++x) {
        for (int k = 0; k < 4; ++k) {
            auto [th1, th2] = quadrant((x + k) % 4);
            st.q(Score::rotation(k).test_index()) +=
                0.25 * region_probability(x, params.tau_min, params.tau_max, th1, th2, channel,
                                          chi, params.alpha);
            st.q(Score::inner(k).test_index()) +=
                0.25 * region_probability(x, 0.0, params.tau_min, th1, th2, channel, chi,
                                          params.alpha);
        }
        st.q(Score::top().test_index()) +=
            0.25 * region_probability(x, params.tau_max, inf, 0.0, 2.0 * kPi, channel, chi,
                                      params.alpha);
    }

    // Key-round joint table.
    for (int x = 0; x < 4; ++x) {
        for (int z = 0; z < 4; ++z) {
            auto [th1, th2] = quadrant(z);
            st.joint[x][z] = 0.25 * region_probability(x, params.tau_min_key, inf, th1, th2,
                                                       channel, chi, params.alpha);
        }
        st.joint[x][4] = 0.25 * region_probability(x, 0.0, params.tau_min_key, 0.0, 2.0 * kPi,
                                                   channel, chi, params.alpha);
    }
    double pass = 0.0;
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) pass += st.joint[x][z];
    st.pass_prob = pass;

    auto xlog2x = [](double v) { return v > 0.0 ? v * std::log2(v) : 0.0; };
    double hxz = 0.0, hz = 0.0, hx = 0.0;
    std::array<double, 4> pz{}, px{};
    for (int x = 0; x < 4; ++x)
        for (int z = 0; z < 4; ++z) {
            double pj = st.joint[x][z] / pass;
            hxz -= xlog2x(pj);
            pz[z] += pj;
            px[x] += pj;
        }
    for (int z = 0; z < 4; ++z) hz -= xlog2x(pz[z]);
    for (int x = 0; x < 4; ++x) hx -= xlog2x(px[x]);
    st.h_x_given_z = hxz - hz;
    st.h_z_given_x = hxz - hx;
    return st;
}

RoundSample sample_round(const ProtocolParams& params, const ChannelParams& channel,
                         RandomStream& stream) {
    RoundSample r;
    r.x = stream.uniform_int(4);
    r.t = stream.bernoulli(params.gamma) ? 1 : 0;
    double s = 1.0 + channel.eta * channel.chi / 2.0;
    double sd = std::sqrt(s / 2.0);
    double a = std::sqrt(channel.eta) * params.alpha;
    std::complex<double> mu = a * std::exp(std::complex<double>(0.0, phase_of(r.x)));
    r.y = mu + std::complex<double>(sd * stream.normal(), sd * stream.normal());
    if (r.t == 0) {
        r.key_z = discretize_key(r.y, params);
        r.c = Score::bot();
    } else {
        r.test_z = discretize_test(r.y, params);
        r.c = score(1, r.x, r.test_z);
    }
    return r;
}

}  // namespace dmcv
