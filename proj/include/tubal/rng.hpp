#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace tubal::rng {

// Philox4x32-10 counter-based generator. Every value is a pure function of
// (key, counter), so any element of a stream can be produced independently
// of chunking or thread count.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

// splitmix64 finalizer, used to derive independent sub-seeds.
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

// Stream of i.i.d. N(0,1) doubles addressable by element index.
// Consecutive index pairs (2p, 2p+1) come from one Philox block via
// Box-Muller, so random access costs the same as sequential access.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream) {}

    double at(std::uint64_t idx) const;
    void fill(std::uint64_t start_idx, double* dst, std::size_t count) const;

private:
    std::array<double, 2> pair(std::uint64_t p) const;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
};

// Stream identifiers; measurement tensors are keyed by their index so that
// A_i is reproducible from (seed, i) alone.
inline std::uint64_t ensemble_stream(std::uint64_t i) { return (0x1ull << 56) | i; }
constexpr std::uint64_t kFactorStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
inline std::uint64_t trial_stream(std::uint64_t salt, std::uint64_t t) {
    return (salt << 56) | t;
}

}  // namespace tubal::rng
