#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

#include "jamguard/common.hpp"

namespace jamguard {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives a child seed from a master seed and a path of indices, e.g.
/// (master, record) or (master, class, clause). Order-sensitive.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL);
    for (auto p : path) h = mix64(h ^ mix64(p + 0x9E3779B97F4A7C15ULL));
    return h;
}

/// Counter-based generator: output i is mix64(key + i * golden). The stream
/// is fully defined by (key, counter), so it reproduces bit-for-bit on any
/// platform with IEEE doubles.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key = 0) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform in (0, 1].
    double uniform() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        // Lemire's multiply-shift; bias is < 2^-64 * n, irrelevant here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    cplx complex_gaussian(double variance) noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-variance * std::log(u1));
        const double th = 2.0 * kPi * u2;
        return {r * std::cos(th), r * std::sin(th)};
    }

    /// Standard normal (Box-Muller, one draw per pair).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace jamguard
