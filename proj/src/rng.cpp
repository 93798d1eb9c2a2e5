#include "tubal/rng.hpp"

#include <cmath>

namespace tubal::rng {

namespace {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(const std::array<std::uint32_t, 4>& c,
                                               const std::array<std::uint32_t, 2>& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

// Map 64 random bits to a uniform double in (0,1]; never 0 so log() is safe.
inline double to_unit(std::uint64_t bits) {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) {
        ctr = round_once(ctr, key);
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ull + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::array<double, 2> GaussianStream::pair(std::uint64_t p) const {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(p >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const auto out = philox4x32(ctr, key_);
    const std::uint64_t a = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    const double u1 = to_unit(a);
    const double u2 = to_unit(b);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

double GaussianStream::at(std::uint64_t idx) const { return pair(idx >> 1)[idx & 1]; }

void GaussianStream::fill(std::uint64_t start_idx, double* dst, std::size_t count) const {
    std::uint64_t idx = start_idx;
    std::size_t done = 0;
    if ((idx & 1) && done < count) {
        dst[done++] = at(idx++);
    }
    while (done + 2 <= count) {
        const auto z = pair(idx >> 1);
        dst[done] = z[0];
        dst[done + 1] = z[1];
        done += 2;
        idx += 2;
    }
    if (done < count) dst[done] = at(idx);
}

}  // namespace tubal::rng
