#include "dpcperm/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace dpcperm::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(DPCPERM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend initial_backend() noexcept {
    if (const char* env = std::getenv("DPC_PERM_SIMD"); env != nullptr && std::string(env) == "scalar") {
        return Backend::Scalar;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() noexcept {
    static std::atomic<Backend> b{initial_backend()};
    return b;
}

inline bool use_avx2() noexcept {
#if defined(DPCPERM_HAVE_AVX2)
    return current().load(std::memory_order_relaxed) == Backend::Avx2;
#else
    return false;
#endif
}

}  // namespace

std::string_view to_string(Backend b) noexcept {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

bool avx2_available() noexcept {
    static const bool ok = cpu_has_avx2();
    return ok;
}

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

Backend select_backend(Backend b) noexcept {
    if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
    current().store(b, std::memory_order_relaxed);
    return b;
}

#if defined(DPCPERM_HAVE_AVX2)
#define DPCPERM_DISPATCH(fn, ...) return use_avx2() ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define DPCPERM_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

cplx dotc(std::span<const cplx> a, std::span<const cplx> b) noexcept { DPCPERM_DISPATCH(dotc, a, b); }

double norm2_squared(std::span<const cplx> a) noexcept { DPCPERM_DISPATCH(norm2_squared, a); }

void matvec(std::span<const cplx> m, std::size_t rows, std::size_t cols,
            std::span<const cplx> v, std::span<cplx> out) noexcept {
    DPCPERM_DISPATCH(matvec, m, rows, cols, v, out);
}

void jacobi_rotate(std::span<cplx> a, std::span<cplx> b, double c, double s, cplx w) noexcept {
    DPCPERM_DISPATCH(jacobi_rotate, a, b, c, s, w);
}

PowerStats power_stats(std::span<const cplx> x) noexcept { DPCPERM_DISPATCH(power_stats, x); }

std::uint64_t bit_mismatches(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
    DPCPERM_DISPATCH(bit_mismatches, a, b);
}

#undef DPCPERM_DISPATCH

}  // namespace dpcperm::kernels
