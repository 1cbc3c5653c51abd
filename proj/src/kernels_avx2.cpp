// Compiled with -mavx2 -mfma. Only reached through the dispatcher after a
// runtime CPU check, so nothing here may be inlined into generic code.

#include "dpcperm/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <bit>

namespace dpcperm::kernels::avx2 {

namespace {

inline const double* dp(const cplx* z) noexcept { return reinterpret_cast<const double*>(z); }
inline double* dp(cplx* z) noexcept { return reinterpret_cast<double*>(z); }

inline double hsum(__m256d v) noexcept {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// lanes 0,2 minus lanes 1,3
inline double halt(__m256d v) noexcept {
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return (t[0] + t[2]) - (t[1] + t[3]);
}

}  // namespace

cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept {
    const std::size_t n = a.size();
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(dp(a.data() + i));
        const __m256d vb = _mm256_loadu_pd(dp(b.data() + i));
        const __m256d vb_sw = _mm256_permute_pd(vb, 0b0101);
        acc_re = _mm256_fmadd_pd(va, vb, acc_re);     // ar*br, ai*bi
        acc_im = _mm256_fmadd_pd(va, vb_sw, acc_im);  // ar*bi, ai*br
    }
    double re = hsum(acc_re);
    double im = halt(acc_im);
    for (; i < n; ++i) {
        re += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        im += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re, im};
}

double norm2_squared(std::span<const cplx> a) noexcept {
    const std::size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(dp(a.data() + i));
        acc = _mm256_fmadd_pd(va, va, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    return s;
}

void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept {
    for (std::size_t r = 0; r < rows; ++r) {
        const cplx* row = m.data() + r * cols;
        __m256d acc_re = _mm256_setzero_pd();
        __m256d acc_im = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 2 <= cols; c += 2) {
            const __m256d vm = _mm256_loadu_pd(dp(row + c));
            const __m256d vv = _mm256_loadu_pd(dp(v.data() + c));
            const __m256d vv_sw = _mm256_permute_pd(vv, 0b0101);
            acc_re = _mm256_fmadd_pd(vm, vv, acc_re);     // mr*vr, mi*vi
            acc_im = _mm256_fmadd_pd(vm, vv_sw, acc_im);  // mr*vi, mi*vr
        }
        double re = halt(acc_re);
        double im = hsum(acc_im);
        for (; c < cols; ++c) {
            re += row[c].real() * v[c].real() - row[c].imag() * v[c].imag();
            im += row[c].real() * v[c].imag() + row[c].imag() * v[c].real();
        }
        out[r] = {re, im};
    }
}

void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept {
    const std::size_t n = a.size();
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_set1_pd(s);
    const __m256d wr = _mm256_set1_pd(w.real());
    const __m256d wi = _mm256_set1_pd(w.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d va = _mm256_loadu_pd(dp(a.data() + i));
        const __m256d vb = _mm256_loadu_pd(dp(b.data() + i));
        const __m256d vb_sw = _mm256_permute_pd(vb, 0b0101);
        const __m256d wb = _mm256_fmaddsub_pd(vb, wr, _mm256_mul_pd(vb_sw, wi));
        const __m256d na = _mm256_fnmadd_pd(vs, wb, _mm256_mul_pd(vc, va));
        const __m256d nb = _mm256_fmadd_pd(vc, wb, _mm256_mul_pd(vs, va));
        _mm256_storeu_pd(dp(a.data() + i), na);
        _mm256_storeu_pd(dp(b.data() + i), nb);
    }
    for (; i < n; ++i) {
        const cplx wb = w * b[i];
        const cplx ai = a[i];
        a[i] = c * ai - s * wb;
        b[i] = s * ai + c * wb;
    }
}

PowerStats power_stats(std::span<const cplx> x) noexcept {
    const std::size_t n = x.size();
    __m256d acc = _mm256_setzero_pd();
    __m256d peak = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v0 = _mm256_loadu_pd(dp(x.data() + i));
        const __m256d v1 = _mm256_loadu_pd(dp(x.data() + i + 2));
        const __m256d p = _mm256_hadd_pd(_mm256_mul_pd(v0, v0), _mm256_mul_pd(v1, v1));
        acc = _mm256_add_pd(acc, p);
        peak = _mm256_max_pd(peak, p);
    }
    PowerStats st;
    st.sum = hsum(acc);
    alignas(32) double t[4];
    _mm256_store_pd(t, peak);
    st.peak = std::max(std::max(t[0], t[1]), std::max(t[2], t[3]));
    for (; i < n; ++i) {
        const double p = x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
        st.sum += p;
        st.peak = std::max(st.peak, p);
    }
    return st;
}

std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
    const std::size_t n = a.size();
    std::uint64_t count = 0;
    std::size_t i = 0;
    for (; i + 32 <= n; i += 32) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a.data() + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b.data() + i));
        const auto eq = static_cast<std::uint32_t>(_mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
        count += 32u - static_cast<unsigned>(std::popcount(eq));
    }
    for (; i < n; ++i) count += (a[i] != b[i]) ? 1u : 0u;
    return count;
}

}  // namespace dpcperm::kernels::avx2
