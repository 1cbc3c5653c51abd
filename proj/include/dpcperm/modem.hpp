#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpcperm/matrix.hpp"
#include "dpcperm/rng.hpp"

namespace dpcperm {

using Bits = std::vector<std::uint8_t>;

/// Unit-energy QAM with label i (MSB-first bit string) at points()[i].
///
/// Square orders (4, 16, 64): the first half of the label drives the in-phase
/// PAM level and the second half the quadrature level, each Gray coded with
/// bit value 0 on the positive side; QPSK label 00 is (1+j)/sqrt(2).
/// 128: 12x12 cross. Built from a 16x8 Gray rectangle whose four outer
/// columns (|I| in {13, 15}) fold onto the top and bottom bands via
/// (I, Q) -> (Q, sign(I)(|I| - 4)); labels stay Gray except across the fold.
class Constellation {
public:
    explicit Constellation(unsigned order);

    unsigned order() const noexcept { return order_; }
    unsigned bits_per_symbol() const noexcept { return bits_; }
    std::span<const cplx> points() const noexcept { return points_; }
    /// Largest |Re(point)| plus half the minimum distance.
    double thp_modulo_base() const noexcept { return modulo_base_; }
    double min_distance() const noexcept { return min_distance_; }

    /// Label of the nearest point; ties go to the lower label.
    unsigned nearest(cplx y) const noexcept;

private:
    unsigned order_;
    unsigned bits_;
    std::vector<cplx> points_;
    double modulo_base_ = 0.0;
    double min_distance_ = 0.0;
};

CVector qam_modulate(std::span<const std::uint8_t> bits, const Constellation& c);
Bits qam_demodulate(std::span<const cplx> y, const Constellation& c);

/// Adds CN(0, signal_power / 10^(snr_db/10)) to each entry; snr_db = +inf adds nothing.
CVector add_awgn(std::span<const cplx> x, double snr_db, double signal_power, Stream& stream);

struct BitErrorCount {
    std::uint64_t errors = 0;
    std::uint64_t total = 0;
};

BitErrorCount count_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval at 95% for `errors` successes out of `total`.
Interval wilson_interval_95(std::uint64_t errors, std::uint64_t total);

}  // namespace dpcperm
