#pragma once

// Monte Carlo BER sweep.
//
// SNR axis: the noise variance is E|s|^2 / snr with unit-energy symbols, i.e.
// the per-user symbol SNR of a user whose effective gain is 1.
//  - DPC family (conventional, linear): effective gains K are normalized to
//    sum k_n^2 = n_users, so user n sees k_n^2 * snr after compensation.
//  - Baselines (zf, mmse, thp, bd): W is scaled to tr(W W^H) = power_budget.
// Receiver: y_n / g_n with g_n the user's effective gain, hard decision.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dpcperm/modem.hpp"
#include "dpcperm/precoder.hpp"

namespace dpcperm {

enum class ChannelMode { FixedChannel, PerTrialChannel };
enum class PrecoderKind { DpcConventional, DpcLinear, Zf, Mmse, Thp, Bd };
enum class GainMode { DiagL, Waterfill };

std::string_view to_string(ChannelMode m) noexcept;
std::string_view to_string(PrecoderKind p) noexcept;
std::string_view to_string(GainMode g) noexcept;
std::optional<ChannelMode> parse_channel_mode(std::string_view s) noexcept;
std::optional<PrecoderKind> parse_precoder(std::string_view s) noexcept;
std::optional<GainMode> parse_gain_mode(std::string_view s) noexcept;

bool is_dpc_family(PrecoderKind p) noexcept;

struct SweepConfig {
    std::size_t n_users = 10;
    unsigned modulation = 4;
    std::vector<double> snr_grid_db;  // +inf allowed (noiseless)
    std::size_t trials_per_point = 1000;
    ChannelMode channel_mode = ChannelMode::PerTrialChannel;
    PrecoderKind precoder = PrecoderKind::DpcLinear;
    GainMode gain_mode = GainMode::DiagL;
    double power_budget = 10.0;
    std::uint64_t seed = 1;
    std::size_t bd_group_size = 1;
    std::size_t workers = 1;

    /// Throws Error(InvalidArgument) naming the offending field.
    void validate() const;
};

struct BerRecord {
    double snr_db = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    Interval wilson_ci_95;
};

struct SweepResult {
    SweepConfig config;
    std::vector<BerRecord> records;
    double mean_transmit_power = 0.0;  // average |x|^2 over every transmitted vector
};

SweepResult run_ber_sweep(const SweepConfig& cfg);

}  // namespace dpcperm
