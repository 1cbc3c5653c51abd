#pragma once

// Complex decompositions and the permutation algebra the order search is
// built on. Everything here is a pure function of its arguments.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpcperm/matrix.hpp"

namespace dpcperm {

namespace tol {
inline constexpr double lin = 1e-10;   // relative Frobenius tolerance for factor contracts
inline constexpr double sing = 1e-12;  // relative singularity threshold
}  // namespace tol

/// Square, finite n x n broadcast channel; row u is user u's receive antenna.
class ChannelMatrix {
public:
    explicit ChannelMatrix(CMatrix h);

    std::size_t n() const noexcept { return h_.rows(); }
    const CMatrix& matrix() const noexcept { return h_; }
    cplx operator()(std::size_t r, std::size_t c) const noexcept { return h_(r, c); }

    bool operator==(const ChannelMatrix&) const = default;

private:
    CMatrix h_;
};

/// H = L Q with L lower triangular (real, non-negative diagonal) and Q unitary.
struct LqFactors {
    CMatrix l;
    CMatrix q;

    /// diag(L) as a real vector; non-negative by construction.
    RVector diagonal_gains() const;
};

/// H = U diag(sigma) V^H, sigma sorted descending.
struct SvdFactors {
    CMatrix u;
    RVector sigma;
    CMatrix v;

    CMatrix reconstruct() const;
};

/// Bijection on {0..n-1} in one-line notation. Its operator G row-permutes:
/// row i of G*A is row order[i] of A.
class Permutation {
public:
    explicit Permutation(std::vector<std::size_t> order);
    static Permutation identity(std::size_t n);
    static Permutation from_one_based(std::span<const std::size_t> order);

    std::size_t size() const noexcept { return order_.size(); }
    std::size_t operator[](std::size_t i) const noexcept { return order_[i]; }
    const std::vector<std::size_t>& order() const noexcept { return order_; }
    std::vector<std::size_t> one_based() const;

    bool is_identity() const noexcept;
    Permutation inverse() const;

    /// (p o q)(i) = p(q(i)); diagonal_permute by p o q equals q then p.
    friend Permutation compose(const Permutation& p, const Permutation& q);

    bool operator==(const Permutation&) const = default;
    auto operator<=>(const Permutation&) const = default;

private:
    std::vector<std::size_t> order_;
};

/// Diagonal gain matrix K stored as its diagonal. Entries are finite and
/// non-negative; a zero marks a user switched off by water-filling.
class EffectiveGain {
public:
    explicit EffectiveGain(RVector gains);

    std::size_t size() const noexcept { return gains_.size(); }
    double operator[](std::size_t i) const noexcept { return gains_[i]; }
    const RVector& values() const noexcept { return gains_; }
    bool strictly_positive() const noexcept;
    CMatrix matrix() const { return CMatrix::diagonal(std::span<const double>(gains_)); }

    bool operator==(const EffectiveGain&) const = default;

private:
    RVector gains_;
};

LqFactors lq_decompose(const ChannelMatrix& h);
SvdFactors svd_decompose(const ChannelMatrix& h);

/// G_p as a real 0/1 matrix.
CMatrix permutation_matrix(const Permutation& p);

/// G_p * a without forming G_p.
CMatrix permute_rows(const CMatrix& a, const Permutation& p);
CVector permute(std::span<const cplx> v, const Permutation& p);

/// SVD of G_p H obtained from the SVD of H: only U's rows move.
SvdFactors permuted_svd(const SvdFactors& f, const Permutation& p);

/// G_p^H K G_p: gain k[i] moves to position p(i).
EffectiveGain diagonal_permute(const EffectiveGain& k, const Permutation& p);

/// True iff G_p L (L from lq_decompose(h)) has a non-zero strictly-upper entry,
/// i.e. permuting the channel does not just permute its LQ factors.
bool lq_not_permutation_linear_witness(const ChannelMatrix& h, const Permutation& p);

/// Counts lq_decompose / svd_decompose calls made on any thread that has the
/// tally installed through a ScopedTally.
class DecompositionTally {
public:
    std::uint64_t count() const noexcept { return count_.load(std::memory_order_relaxed); }
    void record() noexcept { count_.fetch_add(1, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_{0};
};

/// Installs a tally on the current thread for the lifetime of the scope.
/// Scopes nest: a decomposition counts toward every enclosing tally.
class ScopedTally {
public:
    explicit ScopedTally(DecompositionTally& tally) noexcept;
    ~ScopedTally();
    ScopedTally(const ScopedTally&) = delete;
    ScopedTally& operator=(const ScopedTally&) = delete;

    /// Called by lq_decompose / svd_decompose.
    static void note_decomposition() noexcept;

private:
    DecompositionTally& tally_;
    ScopedTally* previous_;
};

}  // namespace dpcperm
