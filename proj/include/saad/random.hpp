#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string_view>
#include <vector>

#include "saad/errors.hpp"

namespace saad {

/**
 * Deterministic RNG used everywhere in the library.
 *
 * The engine (std::mt19937_64) has a bit-exact output sequence mandated by
 * the standard. The distribution helpers are hand-rolled because the
 * standard distribution adapters are implementation-defined, which would
 * break byte-identical reruns across toolchains.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1), 53 bits of randomness.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw ValidationError("uniform_index: n must be positive");
        // Rejection sampling keeps the draw unbiased.
        const std::uint64_t bound = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t u;
        do {
            u = engine_();
        } while (u >= bound);
        return u % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        if (items.size() < 2) return;
        for (std::size_t i = items.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(items[i], items[j]);
        }
    }

    /// k distinct indices drawn from [0, n), returned in ascending order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// 64-bit FNV-1a over a tag string.
constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : text) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/**
 * Derives a per-component seed from one root seed and a component tag,
 * e.g. derive_seed(seed, "synth.train"). Used by the CLI so each stage is
 * reproducible when rerun alone.
 */
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
    return splitmix64(root ^ fnv1a64(tag));
}

inline std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw ValidationError("sample_without_replacement: k exceeds n");
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    // Partial Fisher-Yates: after k steps the tail holds the sample.
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(k);
    std::sort(indices.begin(), indices.end());
    return indices;
}

} // namespace saad
