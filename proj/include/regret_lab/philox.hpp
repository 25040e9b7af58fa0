#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
//
// Every uniform used by the simulator is a pure function of
// (seed, run, t, channel), so draws never depend on the order in which runs
// are scheduled or on how many draws another branch consumed.

#include <array>
#include <cstdint>
#include <limits>

namespace regret_lab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
    constexpr std::uint32_t kMulA = 0xD2511F53u;
    constexpr std::uint32_t kMulB = 0xCD9E8D57u;
    constexpr std::uint32_t kWeylA = 0x9E3779B9u;
    constexpr std::uint32_t kWeylB = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMulA} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kMulB} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

/// Maps the top 53 bits of a 64-bit word to [0, 1).
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Independent draw streams per timestep.
enum class Channel : std::uint32_t { agent = 0, reward = 1, transition = 2, auxiliary = 3 };

/// Keyed uniform source: uniform(run, t, channel) is deterministic in all
/// four inputs and the seed.
class KeyedUniforms {
public:
    constexpr explicit KeyedUniforms(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    constexpr double uniform(std::uint64_t run, std::uint64_t t, Channel channel) const noexcept {
        const PhiloxCounter out = philox4x32_10(
            {static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(channel),
             static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(run >> 32)},
            key_);
        return bits_to_unit((std::uint64_t{out[0]} << 32) | out[1]);
    }

private:
    PhiloxKey key_;
};

/// A sequential 64-bit stream over a fixed Philox key, usable as a
/// UniformRandomBitGenerator. Used where an agent needs several draws from
/// one supplied uniform (e.g. posterior sampling).
class PhiloxStream {
public:
    using result_type = std::uint64_t;

    constexpr PhiloxStream(std::uint64_t key, std::uint64_t stream_id) noexcept
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          stream_lo_(static_cast<std::uint32_t>(stream_id)),
          stream_hi_(static_cast<std::uint32_t>(stream_id >> 32)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        if (lane_ == 0) {
            block_ = philox4x32_10({static_cast<std::uint32_t>(counter_),
                                    static_cast<std::uint32_t>(counter_ >> 32), stream_lo_,
                                    stream_hi_},
                                   key_);
            ++counter_;
        }
        const result_type value =
            (std::uint64_t{block_[2 * lane_]} << 32) | block_[2 * lane_ + 1];
        lane_ ^= 1;
        return value;
    }

    constexpr double uniform() noexcept { return bits_to_unit((*this)()); }

private:
    PhiloxKey key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
    std::uint64_t counter_ = 0;
    PhiloxCounter block_{};
    int lane_ = 0;
};

} // namespace regret_lab
