#include <doctest.h>

#include "lif/rng.hpp"

using namespace lif;

TEST_SUITE("rng") {

// Random123 known-answer vectors for philox4x32-10.
TEST_CASE("philox known answers") {
    const auto z = rng::philox4x32(0, 0, 0, 0, 0, 0);
    CHECK(z.w[0] == 0x6627e8d5u);
    CHECK(z.w[1] == 0xe169c58du);
    CHECK(z.w[2] == 0xbc57ac4cu);
    CHECK(z.w[3] == 0x9b00dbd8u);

    const auto o = rng::philox4x32(0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu,
                                   0xffffffffu, 0xffffffffu);
    CHECK(o.w[0] == 0x408f276du);
    CHECK(o.w[1] == 0x41c83b0eu);
    CHECK(o.w[2] == 0xa20bc7c6u);
    CHECK(o.w[3] == 0x6d5451fdu);

    const auto p = rng::philox4x32(0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u,
                                   0xa4093822u, 0x299f31d0u);
    CHECK(p.w[0] == 0xd16cfe09u);
    CHECK(p.w[1] == 0x94fdccebu);
    CHECK(p.w[2] == 0x5001e420u);
    CHECK(p.w[3] == 0x24126ea1u);
}

TEST_CASE("uniforms land in their half-open ranges") {
    double lo1 = 1.0, hi1 = 0.0, lo2 = 1.0, hi2 = 0.0;
    for (std::uint64_t c = 0; c < 20000; ++c) {
        const auto u = rng::uniform_pair(42, 7, c);
        lo1 = std::min(lo1, u.u1);
        hi1 = std::max(hi1, u.u1);
        lo2 = std::min(lo2, u.u2);
        hi2 = std::max(hi2, u.u2);
        CHECK(u.u1 > 0.0);
        CHECK(u.u1 <= 1.0);
        CHECK(u.u2 >= 0.0);
        CHECK(u.u2 < 1.0);
    }
    CHECK(hi1 > 0.99);
    CHECK(lo2 < 0.01);
}

TEST_CASE("streams and counters are independent axes") {
    CHECK(rng::uniform01(1, 0, 0) != rng::uniform01(1, 0, 1));
    CHECK(rng::uniform01(1, 0, 0) != rng::uniform01(1, 1, 0));
    CHECK(rng::uniform01(1, 0, 0) != rng::uniform01(2, 0, 0));
    CHECK(rng::uniform01(1, 3, 5) == rng::uniform01(1, 3, 5));
}

TEST_CASE("normal moments roughly standard") {
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng::normal(99, 0, static_cast<std::uint64_t>(i));
        sum += z;
        sum2 += z * z;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

}  // TEST_SUITE
