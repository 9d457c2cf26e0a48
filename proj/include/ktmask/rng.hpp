#pragma once

// Counter-based random number generation. Every stream is a pure function of
// (seed, stream tags, counter), so draws are reproducible across platforms and
// independent of thread scheduling: a consumer forks a named substream instead
// of sharing generator state.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ktmask {

namespace detail {

// SplitMix64 finalizer (Steele et al.), used both as the output function and
// as the mixing step when deriving substream keys.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(detail::mix64(seed)) {}

    // Derive an independent substream from up to two tags. Forking does not
    // advance this generator.
    CounterRng fork(std::uint64_t tag_a, std::uint64_t tag_b = 0) const {
        CounterRng child(0);
        child.key_ = detail::mix64(detail::mix64(key_ ^ tag_a) ^ ~tag_b);
        child.counter_ = 0;
        return child;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

    // Uniform double in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Standard normal via Box-Muller; one deviate per call, even counter usage.
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// First `count` steps of a Fisher-Yates shuffle over 0..population-1; returns
// `count` distinct indices in draw order.
inline std::vector<int> sample_without_replacement(int population, int count, CounterRng& rng) {
    if (count < 0 || count > population)
        throw std::invalid_argument("sample_without_replacement: count out of range");
    std::vector<int> pool(static_cast<std::size_t>(population));
    for (int i = 0; i < population; ++i) pool[static_cast<std::size_t>(i)] = i;
    std::vector<int> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(population - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }
    return out;
}

} // namespace ktmask
