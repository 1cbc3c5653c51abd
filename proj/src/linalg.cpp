#include "dpcperm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "dpcperm/error.hpp"
#include "dpcperm/kernels.hpp"

namespace dpcperm {

namespace {

thread_local ScopedTally* active_scope = nullptr;

void note_decomposition() noexcept { ScopedTally::note_decomposition(); }

cplx unit_phase(cplx z) {
    const double a = std::abs(z);
    return a == 0.0 ? cplx(1.0) : z / a;
}

// Fill exactly-zero columns of u (flagged in `missing`) with an orthonormal
// completion of the others, using modified Gram-Schmidt on e_0, e_1, ...
void complete_basis(std::vector<CVector>& cols, const std::vector<bool>& missing) {
    const std::size_t n = cols.size();
    std::size_t next_e = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!missing[j]) continue;
        while (next_e < n) {
            CVector cand(n, 0.0);
            cand[next_e++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == j || (missing[k] && k > j)) continue;
                    const cplx proj = kernels::dotc(cols[k], cand);
                    for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * cols[k][i];
                }
            }
            const double nrm = norm2(cand);
            if (nrm > 1e-8) {
                for (cplx& z : cand) z /= nrm;
                cols[j] = std::move(cand);
                break;
            }
        }
    }
}

}  // namespace

ChannelMatrix::ChannelMatrix(CMatrix h) : h_(std::move(h)) {
    if (!h_.square() || h_.rows() == 0) {
        throw Error(ErrorKind::InvalidArgument, "channel matrix must be square with n >= 1");
    }
    if (!all_finite(h_)) throw Error(ErrorKind::InvalidArgument, "channel matrix has non-finite entries");
}

RVector LqFactors::diagonal_gains() const {
    RVector d(l.rows());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = l(i, i).real();
    return d;
}

CMatrix SvdFactors::reconstruct() const {
    CMatrix us = u;
    for (std::size_t r = 0; r < us.rows(); ++r)
        for (std::size_t c = 0; c < us.cols(); ++c) us(r, c) *= sigma[c];
    return us * v.adjoint();
}

Permutation::Permutation(std::vector<std::size_t> order) : order_(std::move(order)) {
    std::vector<bool> seen(order_.size(), false);
    for (std::size_t idx : order_) {
        if (idx >= order_.size() || seen[idx]) {
            throw Error(ErrorKind::InvalidPermutation, "order is not a bijection of {1.." +
                                                           std::to_string(order_.size()) + "}");
        }
        seen[idx] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), std::size_t{0});
    return Permutation(std::move(o));
}

Permutation Permutation::from_one_based(std::span<const std::size_t> order) {
    std::vector<std::size_t> o;
    o.reserve(order.size());
    for (std::size_t idx : order) {
        if (idx == 0) throw Error(ErrorKind::InvalidPermutation, "one-based order contains 0");
        o.push_back(idx - 1);
    }
    return Permutation(std::move(o));
}

std::vector<std::size_t> Permutation::one_based() const {
    std::vector<std::size_t> o(order_);
    for (auto& i : o) ++i;
    return o;
}

bool Permutation::is_identity() const noexcept {
    for (std::size_t i = 0; i < order_.size(); ++i)
        if (order_[i] != i) return false;
    return true;
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(order_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) inv[order_[i]] = i;
    return Permutation(std::move(inv));
}

Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size()) throw Error(ErrorKind::InvalidPermutation, "size mismatch in compose");
    std::vector<std::size_t> o(p.size());
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = p[q[i]];
    return Permutation(std::move(o));
}

EffectiveGain::EffectiveGain(RVector gains) : gains_(std::move(gains)) {
    if (gains_.empty()) throw Error(ErrorKind::InvalidArgument, "effective gain is empty");
    for (double g : gains_) {
        if (!std::isfinite(g) || g < 0.0) {
            throw Error(ErrorKind::InvalidArgument, "effective gains must be finite and non-negative");
        }
    }
}

bool EffectiveGain::strictly_positive() const noexcept {
    return std::all_of(gains_.begin(), gains_.end(), [](double g) { return g > 0.0; });
}

LqFactors lq_decompose(const ChannelMatrix& h) {
    note_decomposition();
    const std::size_t n = h.n();
    const double hnorm = frobenius_norm(h.matrix());

    // Householder QR of H^H; then H = R^H Q^H.
    CMatrix a = h.matrix().adjoint();
    CMatrix q = CMatrix::identity(n);
    CVector v(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t m = n - k;
        double xnorm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            v[i] = a(k + i, k);
            xnorm2 += std::norm(v[i]);
        }
        const double xnorm = std::sqrt(xnorm2);
        if (xnorm == 0.0) continue;
        const cplx alpha = -unit_phase(v[0]) * xnorm;
        v[0] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) vnorm2 += std::norm(v[i]);
        if (vnorm2 == 0.0) continue;
        const double beta = 2.0 / vnorm2;
        for (std::size_t j = k; j < n; ++j) {
            cplx dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += std::conj(v[i]) * a(k + i, j);
            dot *= beta;
            for (std::size_t i = 0; i < m; ++i) a(k + i, j) -= v[i] * dot;
        }
        for (std::size_t r = 0; r < n; ++r) {
            cplx dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += q(r, k + i) * v[i];
            dot *= beta;
            for (std::size_t i = 0; i < m; ++i) q(r, k + i) -= dot * std::conj(v[i]);
        }
    }

    // Move the phase of R's diagonal into Q so diag(L) is real and >= 0.
    for (std::size_t k = 0; k < n; ++k) {
        const cplx d = unit_phase(a(k, k));
        for (std::size_t j = k; j < n; ++j) a(k, j) *= std::conj(d);
        a(k, k) = std::abs(a(k, k));
        for (std::size_t r = 0; r < n; ++r) q(r, k) *= d;
        for (std::size_t r = k + 1; r < n; ++r) a(r, k) = 0.0;
    }

    LqFactors f{a.adjoint(), q.adjoint()};
    for (std::size_t k = 0; k < n; ++k) {
        const double lkk = f.l(k, k).real();
        if (hnorm == 0.0 || lkk < tol::sing * hnorm) {
            throw Error(ErrorKind::NumericallySingular,
                        "|l_" + std::to_string(k + 1) + std::to_string(k + 1) + "| = " + std::to_string(lkk) +
                            " below singularity threshold");
        }
    }
    return f;
}

SvdFactors svd_decompose(const ChannelMatrix& h) {
    note_decomposition();
    const std::size_t n = h.n();

    // One-sided (Hestenes) Jacobi on the columns of H: H V = B with B's
    // columns mutually orthogonal, then sigma_j = |b_j| and u_j = b_j / sigma_j.
    std::vector<CVector> cols(n), vcols(n);
    for (std::size_t j = 0; j < n; ++j) {
        cols[j] = h.matrix().column(j);
        vcols[j].assign(n, 0.0);
        vcols[j][j] = 1.0;
    }

    constexpr double rot_tol = 1e-15;
    constexpr int max_sweeps = 100;
    // Columns at rounding level of ||H|| are numerically zero: rotating them
    // against a real column never drives the cosine below rot_tol.
    const double zero_col = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * frobenius_norm(h.matrix());
    const double zero_col2 = zero_col * zero_col;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = kernels::norm2_squared(cols[p]);
                const double beta = kernels::norm2_squared(cols[q]);
                if (alpha <= zero_col2 || beta <= zero_col2) continue;
                const cplx gamma = kernels::dotc(cols[p], cols[q]);
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= rot_tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const cplx w = std::conj(gamma) / g;
                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                kernels::jacobi_rotate(cols[p], cols[q], c, s, w);
                kernels::jacobi_rotate(vcols[p], vcols[q], c, s, w);
            }
        }
        if (!rotated) break;
    }

    RVector norms(n);
    for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(kernels::norm2_squared(cols[j]));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    SvdFactors f{CMatrix(n, n), RVector(n), CMatrix(n, n)};
    std::vector<CVector> ucols(n);
    std::vector<bool> missing(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = idx[k];
        f.sigma[k] = norms[j];
        if (norms[j] > zero_col && std::isnormal(norms[j])) {
            ucols[k] = cols[j];
            for (cplx& z : ucols[k]) z /= norms[j];
        } else {
            f.sigma[k] = 0.0;
            ucols[k].assign(n, 0.0);
            missing[k] = true;
        }
        for (std::size_t r = 0; r < n; ++r) f.v(r, k) = vcols[j][r];
    }
    if (std::find(missing.begin(), missing.end(), true) != missing.end()) complete_basis(ucols, missing);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t r = 0; r < n; ++r) f.u(r, k) = ucols[k][r];
    return f;
}

CMatrix permutation_matrix(const Permutation& p) {
    CMatrix g(p.size(), p.size());
    for (std::size_t i = 0; i < p.size(); ++i) g(i, p[i]) = 1.0;
    return g;
}

CMatrix permute_rows(const CMatrix& a, const Permutation& p) {
    if (a.rows() != p.size()) throw Error(ErrorKind::InvalidPermutation, "permutation size does not match rows");
    CMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto src = a.row(p[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

CVector permute(std::span<const cplx> v, const Permutation& p) {
    if (v.size() != p.size()) throw Error(ErrorKind::InvalidPermutation, "permutation size does not match vector");
    CVector out(v.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = v[p[i]];
    return out;
}

SvdFactors permuted_svd(const SvdFactors& f, const Permutation& p) {
    return SvdFactors{permute_rows(f.u, p), f.sigma, f.v};
}

EffectiveGain diagonal_permute(const EffectiveGain& k, const Permutation& p) {
    if (k.size() != p.size()) throw Error(ErrorKind::InvalidPermutation, "permutation size does not match gains");
    RVector out(k.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[p[i]] = k[i];
    return EffectiveGain(std::move(out));
}

bool lq_not_permutation_linear_witness(const ChannelMatrix& h, const Permutation& p) {
    const LqFactors f = lq_decompose(h);
    const CMatrix gl = permute_rows(f.l, p);
    return max_abs_strictly_upper(gl) > tol::sing * frobenius_norm(h.matrix());
}

ScopedTally::ScopedTally(DecompositionTally& tally) noexcept : tally_(tally), previous_(active_scope) {
    active_scope = this;
}

ScopedTally::~ScopedTally() { active_scope = previous_; }

void ScopedTally::note_decomposition() noexcept {
    for (ScopedTally* s = active_scope; s != nullptr; s = s->previous_) s->tally_.record();
}

}  // namespace dpcperm
