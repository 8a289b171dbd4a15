#pragma once

#include <cstdint>
#include <random>

namespace qkd {

/// Seeded uniform random stream. Streams constructed from the same seed but
/// different stream ids are independent, so a run can be split into batches
/// that each own one stream. mt19937_64 and seed_seq are fully specified by
/// the standard and the uniform double below uses only integer generator
/// output, so the draw sequence is identical across platforms.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        gen_.seed(seq);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// True with probability p; consumes exactly one draw.
    bool bernoulli(double p) { return uniform() < p; }

    /// Fair coin; consumes exactly one draw.
    bool flip() { return (gen_() >> 63) != 0; }

private:
    std::mt19937_64 gen_;
};

}  // namespace qkd
