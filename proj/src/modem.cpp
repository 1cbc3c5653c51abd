#include "dpcperm/modem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpcperm/error.hpp"
#include "dpcperm/kernels.hpp"

namespace dpcperm {

namespace {

unsigned gray_to_binary(unsigned g) {
    unsigned b = 0;
    for (; g != 0; g >>= 1) b ^= g;
    return b;
}

// Gray-coded PAM: label 0 sits on the most positive level.
double pam_level(unsigned label, unsigned levels) {
    return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(gray_to_binary(label));
}

}  // namespace

Constellation::Constellation(unsigned order) : order_(order) {
    switch (order) {
        case 4: bits_ = 2; break;
        case 16: bits_ = 4; break;
        case 64: bits_ = 6; break;
        case 128: bits_ = 7; break;
        default: throw Error(ErrorKind::InvalidArgument, "unsupported QAM order " + std::to_string(order));
    }
    points_.resize(order);
    if (order != 128) {
        const unsigned half = bits_ / 2;
        const unsigned levels = 1u << half;
        for (unsigned lab = 0; lab < order; ++lab) {
            points_[lab] = {pam_level(lab >> half, levels), pam_level(lab & (levels - 1), levels)};
        }
    } else {
        for (unsigned lab = 0; lab < order; ++lab) {
            const double i = pam_level(lab >> 3, 16);
            const double q = pam_level(lab & 7u, 8);
            if (std::abs(i) > 12.0) {
                points_[lab] = {q, std::copysign(std::abs(i) - 4.0, i)};
            } else {
                points_[lab] = {i, q};
            }
        }
    }
    double energy = 0.0;
    for (const cplx& p : points_) energy += std::norm(p);
    const double scale = 1.0 / std::sqrt(energy / static_cast<double>(order));
    for (cplx& p : points_) p *= scale;

    double dmin = std::numeric_limits<double>::infinity();
    double max_re = 0.0;
    for (std::size_t a = 0; a < points_.size(); ++a) {
        max_re = std::max(max_re, std::abs(points_[a].real()));
        for (std::size_t b = a + 1; b < points_.size(); ++b) dmin = std::min(dmin, std::abs(points_[a] - points_[b]));
    }
    min_distance_ = dmin;
    modulo_base_ = max_re + dmin / 2.0;
}

unsigned Constellation::nearest(cplx y) const noexcept {
    unsigned best = 0;
    double best_d = std::norm(y - points_[0]);
    for (unsigned i = 1; i < order_; ++i) {
        const double d = std::norm(y - points_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

CVector qam_modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
    const unsigned b = c.bits_per_symbol();
    if (bits.size() % b != 0) {
        throw Error(ErrorKind::LengthMismatch,
                    std::to_string(bits.size()) + " bits is not a multiple of " + std::to_string(b));
    }
    CVector out(bits.size() / b);
    for (std::size_t s = 0; s < out.size(); ++s) {
        unsigned label = 0;
        for (unsigned k = 0; k < b; ++k) label = (label << 1) | (bits[s * b + k] & 1u);
        out[s] = c.points()[label];
    }
    return out;
}

Bits qam_demodulate(std::span<const cplx> y, const Constellation& c) {
    const unsigned b = c.bits_per_symbol();
    Bits out(y.size() * b);
    for (std::size_t s = 0; s < y.size(); ++s) {
        const unsigned label = c.nearest(y[s]);
        for (unsigned k = 0; k < b; ++k) out[s * b + k] = static_cast<std::uint8_t>((label >> (b - 1 - k)) & 1u);
    }
    return out;
}

CVector add_awgn(std::span<const cplx> x, double snr_db, double signal_power, Stream& stream) {
    if (!(signal_power > 0.0)) throw Error(ErrorKind::InvalidArgument, "signal power must be positive");
    CVector y(x.begin(), x.end());
    if (std::isinf(snr_db) && snr_db > 0.0) return y;
    const double noise_var = signal_power / std::pow(10.0, snr_db / 10.0);
    for (cplx& z : y) z += stream.complex_normal(noise_var);
    return y;
}

BitErrorCount count_ber(std::span<const std::uint8_t> tx, std::span<const std::uint8_t> rx) {
    if (tx.size() != rx.size()) throw Error(ErrorKind::LengthMismatch, "bit vectors differ in length");
    return BitErrorCount{kernels::bit_mismatches(tx, rx), tx.size()};
}

Interval wilson_interval_95(std::uint64_t errors, std::uint64_t total) {
    if (total == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(errors) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    // clamp so rounding never leaves the point estimate outside the interval
    return {std::clamp(centre - half, 0.0, p), std::clamp(centre + half, p, 1.0)};
}

}  // namespace dpcperm
