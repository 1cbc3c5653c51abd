#pragma once

#include <cstdint>
#include <filesystem>

#include "dpcperm/linalg.hpp"

namespace dpcperm {

enum class ChannelDistribution { ComplexGaussianUnit };

struct ChannelSpec {
    std::size_t n_users = 1;
    std::uint64_t seed = 0;
    ChannelDistribution distribution = ChannelDistribution::ComplexGaussianUnit;
};

/// i.i.d. CN(0,1) entries (variance 1/2 per real component), a pure function of spec.
ChannelMatrix generate_channel(const ChannelSpec& spec);

/// Channel for Monte Carlo trial `trial` of a sweep seeded with `seed`.
ChannelMatrix generate_trial_channel(std::size_t n_users, std::uint64_t seed, std::uint64_t trial);

// Binary container: "DPCM", u16 version, u32 n, then n*n (re, im) f64 pairs,
// row-major, all little-endian.
inline constexpr std::uint16_t kChannelFormatVersion = 1;

void save_channel(const ChannelMatrix& h, const std::filesystem::path& path);
ChannelMatrix load_channel(const std::filesystem::path& path);

}  // namespace dpcperm
