/**
 * @file rng.hpp
 * @brief Counter-based random streams for reproducible parallel Monte Carlo
 *
 * Every draw is a pure function of (seed, stream_id, substream, draw index),
 * computed with the Philox4x32-10 block cipher. Work units that own distinct
 * (stream_id, substream) pairs never share state, so results do not depend on
 * how many threads run them or in which order.
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace fbshare {

namespace detail {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
    constexpr std::uint32_t kMul0 = 0xD2511F53u;
    constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

}  // namespace detail

/// Packs two small indices (e.g. grid row and column) into one stream id.
constexpr std::uint64_t make_stream_id(std::uint32_t major, std::uint32_t minor) {
    return (std::uint64_t{major} << 32) | minor;
}

/**
 * @brief A reproducible random stream keyed by (seed, stream_id, substream).
 *
 * Value type: copying a stream copies its position, so a copy replays the
 * same draws. Use substream() to hand independent sequences to work items
 * (one per Monte Carlo realization, typically).
 */
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t substream = 0)
        : seed_(seed), stream_id_(stream_id), substream_(substream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    std::uint32_t substream_index() const { return substream_; }

    /// Fresh stream positioned at the start of substream `index`.
    RngStream substream(std::uint32_t index) const { return RngStream(seed_, stream_id_, index); }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() { return next_u64(); }

    std::uint64_t next_u64() {
        if (lane_ == 2) refill();
        return buffer_[lane_++];
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Circularly symmetric complex Gaussian with unit variance (1/2 per real part).
    std::complex<double> complex_normal() {
        const double radius = std::sqrt(-std::log(uniform()));
        const double phase = 2.0 * std::numbers::pi * uniform();
        return {radius * std::cos(phase), radius * std::sin(phase)};
    }

  private:
    void refill() {
        const detail::PhiloxCounter ctr{block_, substream_, static_cast<std::uint32_t>(stream_id_),
                                        static_cast<std::uint32_t>(stream_id_ >> 32)};
        const detail::PhiloxKey key{static_cast<std::uint32_t>(seed_),
                                    static_cast<std::uint32_t>(seed_ >> 32)};
        const auto out = detail::philox4x32_10(ctr, key);
        buffer_[0] = (std::uint64_t{out[1]} << 32) | out[0];
        buffer_[1] = (std::uint64_t{out[3]} << 32) | out[2];
        ++block_;
        lane_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint32_t substream_;
    std::uint32_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int lane_ = 2;
};

}  // namespace fbshare
