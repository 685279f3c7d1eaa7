#pragma once

#include <cmath>
#include <cstdint>

namespace lif::rng {

// Philox4x32-10 counter-based generator. Every draw is a pure function of
// (key, stream, counter), so random structures can be filled in any order
// (or in parallel) and still come out identical. Matches the published
// Random123 test vectors.
struct PhiloxBlock {
    std::uint32_t w[4];
};

inline PhiloxBlock philox4x32(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                              std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    std::uint32_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * x0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * x2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t n0 = hi1 ^ x1 ^ k0;
        const std::uint32_t n1 = lo1;
        const std::uint32_t n2 = hi0 ^ x3 ^ k1;
        const std::uint32_t n3 = lo0;
        x0 = n0; x1 = n1; x2 = n2; x3 = n3;
        k0 += W0; k1 += W1;
    }
    return PhiloxBlock{{x0, x1, x2, x3}};
}

// key = seed, counter words = (counter, stream).
inline PhiloxBlock block(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return philox4x32(static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32));
}

// Two uniforms per block: words 0,1 give u1 in (0,1], words 2,3 give u2 in [0,1).
// Each variate combines two 32-bit outputs into a 53-bit mantissa.
struct UniformPair {
    double u1, u2;
};

inline UniformPair uniform_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const PhiloxBlock b = block(seed, stream, counter);
    const std::uint64_t m1 = (static_cast<std::uint64_t>(b.w[0]) << 21) | (b.w[1] >> 11);
    const std::uint64_t m2 = (static_cast<std::uint64_t>(b.w[2]) << 21) | (b.w[3] >> 11);
    constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
    return UniformPair{static_cast<double>(m1 + 1) * scale, static_cast<double>(m2) * scale};
}

inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return uniform_pair(seed, stream, counter).u2;
}

// One standard normal per counter (Box-Muller on the block's uniform pair).
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const UniformPair u = uniform_pair(seed, stream, counter);
    return std::sqrt(-2.0 * std::log(u.u1)) * std::cos(6.283185307179586476925286766559 * u.u2);
}

// Derives an independent 64-bit sub-seed, used to split a master seed into
// per-replicate (lattice, field, partition) streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter) {
    const PhiloxBlock b = block(master, stream, counter);
    return (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
}

}  // namespace lif::rng
