#include "dpcperm/kernels.hpp"

#include <algorithm>

namespace dpcperm::kernels::scalar {

cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2_squared(std::span<const cplx> a) noexcept {
    double acc = 0.0;
    for (const cplx& z : a) acc += z.real() * z.real() + z.imag() * z.imag();
    return acc;
}

void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept {
    for (std::size_t r = 0; r < rows; ++r) {
        const cplx* row = m.data() + r * cols;
        double re = 0.0;
        double im = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            re += row[c].real() * v[c].real() - row[c].imag() * v[c].imag();
            im += row[c].real() * v[c].imag() + row[c].imag() * v[c].real();
        }
        out[r] = {re, im};
    }
}

void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept {
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx wb = w * b[i];
        const cplx ai = a[i];
        a[i] = c * ai - s * wb;
        b[i] = s * ai + c * wb;
    }
}

PowerStats power_stats(std::span<const cplx> x) noexcept {
    PowerStats st;
    for (const cplx& z : x) {
        const double p = z.real() * z.real() + z.imag() * z.imag();
        st.sum += p;
        st.peak = std::max(st.peak, p);
    }
    return st;
}

std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]) ? 1u : 0u;
    return n;
}

}  // namespace dpcperm::kernels::scalar
