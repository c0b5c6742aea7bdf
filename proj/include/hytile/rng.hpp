#pragma once

#include <cstdint>
#include <initializer_list>

namespace hytile {

// Counter-based randomness. Every random decision in the library is a pure
// function of (seed, stream tag, counter), so output never depends on how
// work is split across threads.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_words(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
    for (std::uint64_t w : words)
        h = splitmix64(h ^ splitmix64(w + 0x2545f4914f6cdd1dULL));
    return h;
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double unit_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return to_unit(hash_words(seed, {stream, counter}));
}

// Derive an independent child seed; stage logs record these.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
    return hash_words(seed, {0xd1b54a32d192ed03ULL, tag, index});
}

// Sequential stream for code that consumes randomness in a loop.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return to_unit(next()); }

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, bound); bound > 0. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

// Stream tags, one per consumer.
namespace stream {
inline constexpr std::uint64_t iid_edges = 1;
inline constexpr std::uint64_t cons_a_color = 2;
inline constexpr std::uint64_t cons_b_color = 3;
inline constexpr std::uint64_t denseness_trial = 4;
inline constexpr std::uint64_t reachability = 5;
inline constexpr std::uint64_t absorbing = 6;
inline constexpr std::uint64_t family = 7;
inline constexpr std::uint64_t regularity = 8;
inline constexpr std::uint64_t sweep = 9;
} // namespace stream

} // namespace hytile
