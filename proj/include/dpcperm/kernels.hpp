#pragma once

// Data-parallel inner loops. Every kernel has a portable scalar reference
// and, on x86-64, an AVX2+FMA variant selected once at runtime. The two
// agree to rounding (summation order differs), which the kernel tests pin.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace dpcperm::kernels {

using cplx = std::complex<double>;

struct PowerStats {
    double sum = 0.0;  // sum of |x_i|^2
    double peak = 0.0; // max of |x_i|^2
};

enum class Backend { Scalar, Avx2 };

std::string_view to_string(Backend b) noexcept;

/// True when the running CPU can execute the AVX2 variants and they were compiled in.
bool avx2_available() noexcept;

/// Backend currently used by the dispatching entry points below.
Backend active_backend() noexcept;

/// Force a backend (tests, DPC_PERM_SIMD=scalar). Requesting Avx2 on a machine
/// without it falls back to Scalar; the effective backend is returned.
Backend select_backend(Backend b) noexcept;

// sum_i conj(a_i) * b_i
cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept;
// sum_i |a_i|^2
double norm2_squared(std::span<const cplx> a) noexcept;
// out = m * v, m row-major rows x cols
void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept;
// (a_i, b_i) <- (c a_i - s e^{-i phi} b_i, s a_i + c e^{-i phi} b_i), with w = e^{-i phi}
void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept;
PowerStats power_stats(std::span<const cplx> x) noexcept;
// Number of positions where the 0/1 bytes differ.
std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;

namespace scalar {
cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm2_squared(std::span<const cplx> a) noexcept;
void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept;
void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept;
PowerStats power_stats(std::span<const cplx> x) noexcept;
std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;
}  // namespace scalar

#if defined(DPCPERM_HAVE_AVX2)
namespace avx2 {
cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept;
double norm2_squared(std::span<const cplx> a) noexcept;
void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept;
void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept;
PowerStats power_stats(std::span<const cplx> x) noexcept;
std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;
}  // namespace avx2
#endif

}  // namespace dpcperm::kernels
