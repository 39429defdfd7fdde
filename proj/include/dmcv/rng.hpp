#pragma once

#include <cstdint>
#include <vector>

namespace dmcv {

/// Deterministic random stream with explicit algorithms (no reliance on
/// implementation-defined std distributions), so identical seeds give
/// bit-identical sequences.  Worker streams derive from a root seed by
/// splitmix64 mixing of the stream id.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed);

    /// Independent child stream for worker `stream_id`.
    RandomStream derive(std::uint64_t stream_id) const;

    std::uint64_t next_u64();
    double uniform();                   // [0,1)
    double normal();                    // standard normal, Box-Muller
    int uniform_int(int n);             // {0,...,n-1}
    bool bernoulli(double p);
    long long binomial(long long n, double p);
    /// One multinomial draw of n trials over probs (sequential binomials).
    std::vector<long long> multinomial(long long n, const std::vector<double>& probs);

  private:
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t root_seed_ = 0;
};

}  // namespace dmcv
