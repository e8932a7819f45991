#pragma once

// Counter-based random number generation (Philox 4x32-10).
//
// Every random draw in the library is a pure function of
// (master seed, stream id, draw index), so datasets are reproducible
// bit-for-bit regardless of execution order or thread count. Streams for
// distinct purposes are carved out of disjoint namespaces via stream_id().

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>
#include <span>
#include <string_view>

namespace samplecurve {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace detail

/// One 128-bit Philox 4x32 block with 10 rounds.
inline std::array<std::uint32_t, 4>
philox4x32_10(std::array<std::uint32_t, 4> counter,
              std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key);
        if (round != 9) {
            key[0] += detail::kPhiloxW0;
            key[1] += detail::kPhiloxW1;
        }
    }
    return counter;
}

/// Stream namespaces. Data streams use dev/val/tune; boot is reserved for
/// bootstrap resampling inside summary statistics.
enum class StreamDomain : std::uint8_t {
    dev = 1,
    val = 2,
    tune = 3,
    boot = 4,
};

inline constexpr std::string_view stream_domain_tag(StreamDomain d) {
    switch (d) {
    case StreamDomain::dev: return "dev";
    case StreamDomain::val: return "val";
    case StreamDomain::tune: return "tune";
    case StreamDomain::boot: return "boot";
    }
    return "?";
}

namespace detail {

inline std::uint64_t fnv1a64(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ull;
    }
    return h;
}

} // namespace detail

/// Stream id for (domain tag, n, replicate). The domain code occupies the top
/// byte, which keeps the dev/val/tune/boot namespaces structurally disjoint;
/// the low 56 bits are FNV-1a over the tag bytes followed by n and replicate
/// as 8-byte little-endian integers.
inline std::uint64_t stream_id(StreamDomain domain, std::uint64_t n,
                               std::uint64_t replicate) {
    const std::string_view tag = stream_domain_tag(domain);
    std::uint64_t h = 0xCBF29CE484222325ull;
    h = detail::fnv1a64(h, tag.data(), tag.size());
    unsigned char buf[16];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(n >> (8 * i));
    for (int i = 0; i < 8; ++i) buf[8 + i] = static_cast<unsigned char>(replicate >> (8 * i));
    h = detail::fnv1a64(h, buf, sizeof(buf));
    return (static_cast<std::uint64_t>(domain) << 56) | (h & 0x00FFFFFFFFFFFFFFull);
}

/// Sequential view of one Philox stream. The key is the master seed, the
/// counter holds (draw index, stream id); advancing the object only moves
/// the draw index. Cheap to construct, safe to use from any thread as long
/// as each instance is thread-local.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(master_seed),
               static_cast<std::uint32_t>(master_seed >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::uint64_t next_u64() {
        if (buffered_ == 0) refill();
        --buffered_;
        const std::uint32_t lo = block_[2 * buffered_];
        const std::uint32_t hi = block_[2 * buffered_ + 1];
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; used where log(u) must stay finite.
    double uniform_open01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Pairs are generated together and the
    /// second value is cached, so one normal costs one uniform pair on
    /// average.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(angle);
        have_cached_ = true;
        return r * std::cos(angle);
    }

    void fill_normals(std::span<double> out) {
        for (double& v : out) v = normal();
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Uniform integer in [0, bound) by rejection-free scaling; bound must be
    /// well below 2^53 (always true here: it is a replicate count).
    std::uint64_t uniform_index(std::uint64_t bound) {
        return static_cast<std::uint64_t>(uniform01() * static_cast<double>(bound));
    }

private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(index_),
            static_cast<std::uint32_t>(index_ >> 32),
            stream_lo_,
            stream_hi_,
        };
        const auto out = philox4x32_10(ctr, key_);
        // two u64 per block, consumed in order (out[0],out[1]) then (out[2],out[3])
        block_ = {out[2], out[3], out[0], out[1]};
        buffered_ = 2;
        ++index_;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t index_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int buffered_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace samplecurve
