#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace catcon {

/// Identifier written into run metadata so traces name their generator.
inline constexpr std::string_view kRngId =
    "xoshiro256** 1.0, state from splitmix64; substream seed = mix(seed, replicate, agent, stage)";

/// Stage slot used for per-agent initialisation draws.
inline constexpr std::uint64_t kGenesisStage = std::numeric_limits<std::uint64_t>::max();

[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator, but
/// the helpers below are used instead of <random> distributions so draws are
/// identical across standard libraries.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept
    {
        for (auto& word : s_) {
            word = splitmix64(seed);
        }
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        std::uint64_t const result = rotl(s_[1] * 5, 7) * 9;
        std::uint64_t const t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) noexcept { return uniform01() < p; }

    /// Uniform integer in [0, n); n > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) noexcept
    {
        std::uint64_t const threshold = (0 - n) % n;
        for (;;) {
            std::uint64_t const r = (*this)();
            if (r >= threshold) return r % n;
        }
    }

  private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
};

/// Seed of the independent stream owned by (replicate, agent, stage).
[[nodiscard]] constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t replicate, std::uint64_t agent,
                                                     std::uint64_t stage) noexcept
{
    std::uint64_t h = seed;
    std::uint64_t out = splitmix64(h);
    for (std::uint64_t part : {replicate, agent, stage}) {
        h = out ^ part;
        out = splitmix64(h);
    }
    return out;
}

[[nodiscard]] inline Rng substream(std::uint64_t seed, std::uint64_t replicate, std::uint64_t agent,
                                   std::uint64_t stage) noexcept
{
    return Rng(substream_seed(seed, replicate, agent, stage));
}

}  // namespace catcon
