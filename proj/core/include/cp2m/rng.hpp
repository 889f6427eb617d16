#pragma once

#include <array>
#include <cstdint>

namespace cp2m {

/// Portable deterministic random stream.
///
/// The generator is xoshiro256** seeded through SplitMix64. All derived
/// quantities (bounded integers, unit doubles, Bernoulli draws) are computed
/// here rather than through <random> distributions, whose output is
/// implementation-defined, so a seed produces identical draws on every
/// platform and standard library.
///
/// Streams for independent work items are derived with for_sample(seed, i);
/// sample i's draws never depend on how many other samples were generated.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept;

    /// Stream dedicated to work item `index` under `seed`.
    [[nodiscard]] static RngStream for_sample(std::uint64_t seed, std::uint64_t index) noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept;

    /// Uniform integer in [lo, hi] (inclusive, unbiased). Requires lo <= hi.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept;

    /// Uniform double in [0, 1) with 53 bits of resolution.
    double uniform01() noexcept;

    /// True with probability p (p <= 0 never, p >= 1 always; one draw is consumed either way).
    bool bernoulli(double p) noexcept;

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
};

/// SplitMix64 finalizer, exposed for stream derivation and hashing.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t& state) noexcept;

} // namespace cp2m
