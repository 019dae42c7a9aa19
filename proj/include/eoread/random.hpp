#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace eoread {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by a 64-bit key (the user seed) and the upper two
/// counter words (stream_hi, stream_lo); the lower two counter words index
/// 128-bit blocks within the stream. Streams with distinct identifiers are
/// statistically independent, so work items can be generated in any order.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint32_t stream_hi, std::uint32_t stream_lo)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_hi_(stream_hi), stream_lo_(stream_lo)
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (used_ == 4) {
            refill();
        }
        return buffer_[used_++];
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    void refill()
    {
        std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                         static_cast<std::uint32_t>(block_ >> 32), stream_lo_,
                                         stream_hi_};
        std::array<std::uint32_t, 2> key = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
                   static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
                   static_cast<std::uint32_t>(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        buffer_ = ctr;
        ++block_;
        used_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_hi_;
    std::uint32_t stream_lo_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

/// Stream identifiers used across the library (upper counter word).
namespace stream {
inline constexpr std::uint32_t kNoiseTrace = 1;  ///< noise sampler, lo = caller index
inline constexpr std::uint32_t kShotGround = 2;  ///< lo = shot index
inline constexpr std::uint32_t kShotExcited = 3; ///< lo = shot index
inline constexpr std::uint32_t kRabi = 4;        ///< lo = grid point index
inline constexpr std::uint32_t kCalibration = 5; ///< lo = voltage index
} // namespace stream

} // namespace eoread
