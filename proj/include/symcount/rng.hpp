#pragma once

// Counter-based RNG: every variate is a pure function of (seed, stream, index),
// so Monte Carlo batches can run in any order or thread layout and still
// reproduce bit-identical results.

#include <cstdint>

namespace symcount {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
} // namespace detail

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(detail::mix64(seed ^ detail::mix64(stream))) {}

    std::uint64_t bits(std::uint64_t index) const {
        return detail::mix64(base_ ^ index * 0xD1B54A32D192ED03ull);
    }

    // Uniform in [0, 1).
    double uniform(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    // Uniform in [lo, hi).
    double uniform(std::uint64_t index, double lo, double hi) const {
        return lo + (hi - lo) * uniform(index);
    }

private:
    std::uint64_t base_;
};

} // namespace symcount
