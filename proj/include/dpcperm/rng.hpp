#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace dpcperm {

/// Counter-based SplitMix64 stream. Output i of a stream is mix(key + (i+1)*gamma),
/// so a stream is fully named by its 64-bit key and independent streams are
/// derived by hashing (seed, tag, index...) into fresh keys. Normal variates use
/// Box-Muller with std::log/std::cos only, keeping draws identical across
/// standard libraries (std::normal_distribution is implementation-defined).
class Stream {
public:
    static constexpr std::string_view kName = "splitmix64-ctr-v1";

    explicit Stream(std::uint64_t key) noexcept : key_(key) {}

    static Stream derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
        std::uint64_t k = mix(seed ^ 0x6a09e667f3bcc909ULL);
        for (std::uint64_t p : path) k = mix(k + kGamma * (p + 1) + 0xbb67ae8584caa73bULL);
        return Stream(k);
    }

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix(key_ + counter_ * kGamma);
    }

    // [0, 1)
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // (0, 1]
    double uniform_open_low() noexcept { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    std::uint8_t bit() noexcept { return static_cast<std::uint8_t>(next_u64() >> 63); }

    double normal() noexcept {
        const double r = std::sqrt(-2.0 * std::log(uniform_open_low()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance) noexcept {
        const double r = std::sqrt(-variance * std::log(uniform_open_low()));
        const double th = 2.0 * std::numbers::pi * uniform();
        return {r * std::cos(th), r * std::sin(th)};
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t position() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace dpcperm
