#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace ssa {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A draw is a pure function of (key, counter): the 64-bit seed is the key
/// and every stream position is addressed explicitly, so output is identical
/// on every platform and independent of evaluation order. `Stream` wraps a
/// (seed, stream id) pair and walks the counter sequentially.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    static Block generate(std::uint64_t key, Block counter) noexcept {
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
            counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ k0, static_cast<std::uint32_t>(p1),
                       static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ k1, static_cast<std::uint32_t>(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return counter;
    }

    /// Sequential view over counters (stream_lo, stream_hi, i_lo, i_hi).
    class Stream {
    public:
        Stream(std::uint64_t seed, std::uint64_t stream_id) noexcept : seed_(seed), stream_(stream_id) {}

        std::uint64_t next_u64() noexcept {
            if (have_spare_) {
                have_spare_ = false;
                return spare_;
            }
            const Block out = generate(seed_, {static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                                               static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32)});
            ++counter_;
            spare_ = (std::uint64_t{out[3]} << 32) | out[2];
            have_spare_ = true;
            return (std::uint64_t{out[1]} << 32) | out[0];
        }

        /// Uniform on [0, 1) with 53 random bits.
        double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

        /// Exponential with the given rate, by inversion.
        double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

        /// Uniform integer in [0, bound), bound > 0, by rejection.
        std::uint64_t below(std::uint64_t bound) noexcept {
            const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
            std::uint64_t x;
            do {
                x = next_u64();
            } while (x >= limit);
            return x % bound;
        }

    private:
        std::uint64_t seed_;
        std::uint64_t stream_;
        std::uint64_t counter_ = 0;
        std::uint64_t spare_ = 0;
        bool have_spare_ = false;
    };
};

}  // namespace ssa
