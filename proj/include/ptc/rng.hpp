#pragma once

// Portable random streams.
//
// Engine: std::mt19937_64, whose output sequence is fixed by the C++ standard.
// The std:: distributions are implementation-defined, so every variate below is
// derived from raw 64-bit draws by hand. Streams are split by hashing
// (seed, tag...) through SplitMix64; tags are strings (FNV-1a 64) or integers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string_view>
#include <type_traits>
#include <vector>

namespace ptc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char ch : s) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001B3ull;
    }
    return h;
}

namespace detail {
inline constexpr std::uint64_t tag_value(std::string_view s) { return fnv1a64(s); }
inline constexpr std::uint64_t tag_value(const char* s) { return fnv1a64(s); }
template <typename T>
    requires std::is_integral_v<T>
inline constexpr std::uint64_t tag_value(T v) {
    return static_cast<std::uint64_t>(v);
}
}  // namespace detail

/// Seed for the sub-stream identified by (seed, tags...). Order of tags matters.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, const Tags&... tags) {
    std::uint64_t h = splitmix64(seed);
    ((h = splitmix64(h ^ detail::tag_value(tags))), ...);
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    template <typename... Tags>
    static Rng stream(std::uint64_t seed, const Tags&... tags) {
        return Rng(derive_seed(seed, tags...));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi] (inclusive), bias-free via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(engine_());
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % range;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<std::int64_t>(x % range);
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double exponential(double rate = 1.0) { return -std::log1p(-uniform01()) / rate; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = i;
        for (std::size_t i = n; i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i - 1)));
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace ptc
