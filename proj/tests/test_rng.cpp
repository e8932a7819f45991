#include "samplecurve/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <vector>

using namespace samplecurve;

// Known-answer vectors computed with an independent Philox 4x32-10
// implementation (10 rounds, key schedule 0x9E3779B9 / 0xBB67AE85).
TEST_CASE("philox 4x32-10 known answers", "[rng]") {
    const auto zeros = philox4x32_10({0, 0, 0, 0}, {0, 0});
    CHECK(zeros[0] == 0x6627e8d5u);
    CHECK(zeros[1] == 0xe169c58du);
    CHECK(zeros[2] == 0xbc57ac4cu);
    CHECK(zeros[3] == 0x9b00dbd8u);

    const auto ones = philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);

    const auto pi_digits = philox4x32_10(
        {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
        {0xa4093822u, 0x299f31d0u});
    CHECK(pi_digits[0] == 0xd16cfe09u);
    CHECK(pi_digits[1] == 0x94fdccebu);
    CHECK(pi_digits[2] == 0x5001e420u);
    CHECK(pi_digits[3] == 0x24126ea1u);

    const auto structured = philox4x32_10({1, 0, 0x12345678u, 0x9abcdef0u},
                                          {0xdeadbeefu, 0xcafef00du});
    CHECK(structured[0] == 0xcb8318ccu);
    CHECK(structured[1] == 0x2da5dff5u);
    CHECK(structured[2] == 0x4b389e9bu);
    CHECK(structured[3] == 0x8619a637u);
}

TEST_CASE("stream ids keep domains disjoint", "[rng]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t n : {std::uint64_t{1}, std::uint64_t{100}, std::uint64_t{50000}}) {
        for (std::uint64_t rep = 0; rep < 200; ++rep) {
            for (auto dom : {StreamDomain::dev, StreamDomain::val, StreamDomain::tune}) {
                const std::uint64_t id = stream_id(dom, n, rep);
                CHECK((id >> 56) == static_cast<std::uint64_t>(dom));
                CHECK(seen.insert(id).second);
            }
        }
    }
    // validation streams can never alias development streams
    CHECK(stream_id(StreamDomain::dev, 100, 1) != stream_id(StreamDomain::val, 100, 1));
}

TEST_CASE("identical (seed, stream) reproduces the sequence", "[rng]") {
    CounterRng a(42, stream_id(StreamDomain::dev, 100, 1));
    CounterRng b(42, stream_id(StreamDomain::dev, 100, 1));
    for (int i = 0; i < 100; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    CounterRng c(42, stream_id(StreamDomain::dev, 100, 2));
    CounterRng d(43, stream_id(StreamDomain::dev, 100, 1));
    bool all_equal_c = true, all_equal_d = true;
    CounterRng a2(42, stream_id(StreamDomain::dev, 100, 1));
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t ref = a2.next_u64();
        all_equal_c = all_equal_c && (c.next_u64() == ref);
        all_equal_d = all_equal_d && (d.next_u64() == ref);
    }
    CHECK_FALSE(all_equal_c);
    CHECK_FALSE(all_equal_d);
}

TEST_CASE("uniform and normal moments", "[rng]") {
    CounterRng rng(7, stream_id(StreamDomain::tune, 0, 0));
    const int n = 200000;
    double u_sum = 0.0, u_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        u_sum += u;
        u_sq += u * u;
    }
    CHECK_THAT(u_sum / n, Catch::Matchers::WithinAbs(0.5, 0.005));
    CHECK_THAT(u_sq / n - (u_sum / n) * (u_sum / n),
               Catch::Matchers::WithinAbs(1.0 / 12.0, 0.005));

    double z_sum = 0.0, z_sq = 0.0, z_cube = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        z_sum += z;
        z_sq += z * z;
        z_cube += z * z * z;
    }
    CHECK_THAT(z_sum / n, Catch::Matchers::WithinAbs(0.0, 0.01));
    CHECK_THAT(z_sq / n, Catch::Matchers::WithinAbs(1.0, 0.02));
    CHECK_THAT(z_cube / n, Catch::Matchers::WithinAbs(0.0, 0.05));
}
