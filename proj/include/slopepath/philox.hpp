#pragma once

#include <array>
#include <cstdint>

namespace slopepath {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
/// pure function of (counter, key), so independent streams are addressed by
/// counter words instead of by advancing shared state.
class Philox4x32 {
public:
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Block generate(Block counter, Key key)
    {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += 0x9E3779B9u;
                key[1] += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * counter[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * counter[2];
            counter = {static_cast<std::uint32_t>(p1 >> 32) ^ counter[1] ^ key[0], static_cast<std::uint32_t>(p1),
                       static_cast<std::uint32_t>(p0 >> 32) ^ counter[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return counter;
    }
};

/// Uniform and Gaussian draws from one (seed, stream, replicate) substream,
/// indexed by element number. Element i reads block i/2, half i%2.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t replicate)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_(stream), replicate_(replicate)
    {
    }

    std::uint64_t bits(std::uint64_t index) const
    {
        const std::uint64_t block = index >> 1;
        const auto out = Philox4x32::generate(
            {static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32), stream_, replicate_}, key_);
        const int half = static_cast<int>(index & 1) * 2;
        return (std::uint64_t{out[half]} << 32) | out[half + 1];
    }

    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform(std::uint64_t index) const
    {
        return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, count).
    int below(std::uint64_t index, int count) const
    {
        return static_cast<int>(uniform(index) * count);
    }

    /// Standard normal by inverse CDF.
    double normal(std::uint64_t index) const;

private:
    Philox4x32::Key key_;
    std::uint32_t stream_;
    std::uint32_t replicate_;
};

} // namespace slopepath
