#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace tentlab {

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Counter-based generator: the i-th draw of stream s under seed k is a pure
// function of (k, s, i). Two generators with the same key replay identically,
// and draws for unrelated cells never depend on evaluation order.
class CounterRng {
public:
    constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : key_(mix64(seed ^ mix64(stream + 0x632be59bd9b4e019ULL))) {}

    static constexpr std::uint64_t bits_at(std::uint64_t seed, std::uint64_t stream,
                                           std::uint64_t counter) noexcept {
        return CounterRng(seed, stream).bits(counter);
    }

    constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(key_ ^ mix64(counter * 0xd1b54a32d192ed03ULL + 1));
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform_at(std::uint64_t counter) const noexcept {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    double uniform() noexcept { return uniform_at(counter_++); }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; consumes two counters.
    double normal() noexcept {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t next_bits() noexcept { return bits(counter_++); }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace tentlab
