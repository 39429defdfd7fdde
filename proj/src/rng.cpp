#include "dmcv/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace dmcv {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : root_seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

RandomStream RandomStream::derive(std::uint64_t stream_id) const {
    std::uint64_t mix = root_seed_;
    std::uint64_t a = splitmix64(mix);
    mix ^= 0x6a09e667f3bcc909ULL + stream_id * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(mix);
    return RandomStream(a ^ rotl(b, 17) ^ (stream_id + 1));
}

// xoshiro256**
std::uint64_t RandomStream::next_u64() {
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

int RandomStream::uniform_int(int n) {
    // rejection sampling, no modulo bias
    std::uint64_t bound = ~0ULL - (~0ULL % static_cast<std::uint64_t>(n));
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= bound);
    return static_cast<int>(v % static_cast<std::uint64_t>(n));
}

bool RandomStream::bernoulli(double p) { return uniform() < p; }

long long RandomStream::binomial(long long n, double p) {
    if (n < 0 || p < 0.0 || p > 1.0) throw std::domain_error("binomial: bad arguments");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    bool flip = p > 0.5;
    double pp = flip ? 1.0 - p : p;
    long long k;
    if (static_cast<double>(n) * pp < 30.0) {
        // geometric skipping
        k = 0;
        long long i = -1;
        double lq = std::log1p(-pp);
        while (true) {
            double u;
            do {
                u = uniform();
            } while (u <= 0.0);
            i += 1 + static_cast<long long>(std::floor(std::log(u) / lq));
            if (i >= n) break;
            ++k;
        }
    } else {
        // inverse CDF walked outward from the mode; expected O(sqrt(n p q)) steps
        long long mode = static_cast<long long>(std::floor((n + 1) * pp));
        if (mode > n) mode = n;
        double logpmf_mode = std::lgamma(n + 1.0) - std::lgamma(mode + 1.0) -
                             std::lgamma(n - mode + 1.0) + mode * std::log(pp) +
                             (n - mode) * std::log1p(-pp);
        double pmf_mode = std::exp(logpmf_mode);
        double u = uniform();
        double r = pp / (1.0 - pp);
        double acc = pmf_mode;
        long long lo = mode, hi = mode;
        double pmf_lo = pmf_mode, pmf_hi = pmf_mode;
        k = mode;
        while (u > acc) {
            bool can_up = hi < n, can_dn = lo > 0;
            double up_next = can_up ? pmf_hi * r * (n - hi) / (hi + 1.0) : 0.0;
            double dn_next = can_dn ? pmf_lo / r * lo / (n - lo + 1.0) : 0.0;
            if (!can_up && !can_dn) break;
            if (up_next >= dn_next) {
                ++hi;
                pmf_hi = up_next;
                acc += up_next;
                k = hi;
            } else {
                --lo;
                pmf_lo = dn_next;
                acc += dn_next;
                k = lo;
            }
        }
    }
    return flip ? n - k : k;
}

std::vector<long long> RandomStream::multinomial(long long n, const std::vector<double>& probs) {
    std::vector<long long> counts(probs.size(), 0);
    double remaining = 1.0;
    long long left = n;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        if (left == 0 || remaining <= 0.0) break;
        double cond = probs[i] / remaining;
        if (cond > 1.0) cond = 1.0;
        counts[i] = binomial(left, cond);
        left -= counts[i];
        remaining -= probs[i];
    }
    if (!probs.empty()) counts.back() = left;
    return counts;
}

}  // namespace dmcv
