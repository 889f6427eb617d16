#include "cp2m/rng.hpp"

namespace cp2m {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept
{
    return (x << k) | (x >> (64 - k));
}

} // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) noexcept : seed_(seed)
{
    std::uint64_t s = seed;
    for (auto& word : state_) {
        word = splitmix64(s);
    }
}

RngStream RngStream::for_sample(std::uint64_t seed, std::uint64_t index) noexcept
{
    std::uint64_t s = seed;
    const auto a = splitmix64(s);
    std::uint64_t t = index ^ a;
    const auto b = splitmix64(t);
    return RngStream(a ^ rotl(b, 17));
}

std::uint64_t RngStream::next_u64() noexcept
{
    const auto result = rotl(state_[1] * 5, 7) * 9;
    const auto t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) noexcept
{
    const auto range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (range == ~std::uint64_t{0}) {
        return static_cast<std::int64_t>(next_u64());
    }
    const auto span = range + 1;
    // Rejection sampling on the top of the 64-bit range keeps the draw unbiased.
    const auto limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span + 1) % span;
    std::uint64_t x = next_u64();
    while (x > limit) {
        x = next_u64();
    }
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + x % span);
}

double RngStream::uniform01() noexcept
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RngStream::bernoulli(double p) noexcept
{
    return uniform01() < p;
}

} // namespace cp2m
