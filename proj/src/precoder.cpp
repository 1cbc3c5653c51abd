#include "dpcperm/precoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpcperm/error.hpp"
#include "dpcperm/kernels.hpp"

namespace dpcperm {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw Error(ErrorKind::LengthMismatch,
                    std::string(what) + " has length " + std::to_string(got) + ", expected " + std::to_string(want));
    }
}

CVector adjoint_times(const CMatrix& q, std::span<const cplx> v) {
    // q^H v without materializing q^H
    CVector out(q.cols(), 0.0);
    for (std::size_t r = 0; r < q.rows(); ++r)
        for (std::size_t c = 0; c < q.cols(); ++c) out[c] += std::conj(q(r, c)) * v[r];
    return out;
}

}  // namespace

double PrecodingMatrix::power() const { return kernels::norm2_squared(w.data()); }

PowerBudget::PowerBudget(double p_total) : p_(p_total) {
    if (!(p_total > 0.0) || !std::isfinite(p_total)) {
        throw Error(ErrorKind::InvalidArgument, "power budget must be positive and finite");
    }
}

CVector successive_cancellation(const CMatrix& l, std::span<const double> gains, std::span<const cplx> s) {
    const std::size_t n = l.rows();
    require_length(s.size(), n, "symbol vector");
    require_length(gains.size(), n, "gain vector");
    CVector xt(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx lii = l(i, i);
        cplx interference = 0.0;
        for (std::size_t m = 0; m < i; ++m) interference += l(i, m) * xt[m];
        xt[i] = (gains[i] * s[i] - interference) / lii;
    }
    return xt;
}

SymbolVector dpc_conventional(const LqFactors& f, std::span<const double> gains, std::span<const cplx> s) {
    return adjoint_times(f.q, successive_cancellation(f.l, gains, s));
}

SymbolVector dpc_conventional(const ChannelMatrix& h, std::span<const cplx> s) {
    require_length(s.size(), h.n(), "symbol vector");
    const LqFactors f = lq_decompose(h);
    // With K = D_L the division by l_nn leaves s_n - sum (l_nm / l_nn) x~_m.
    const CMatrix& l = f.l;
    const std::size_t n = h.n();
    CVector xt(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = s[i];
        for (std::size_t m = 0; m < i; ++m) acc -= (l(i, m) / l(i, i)) * xt[m];
        xt[i] = acc;
    }
    return adjoint_times(f.q, xt);
}

SymbolVector dpc_conventional(const ChannelMatrix& h, const EffectiveGain& k, std::span<const cplx> s) {
    require_length(k.size(), h.n(), "effective gain");
    return dpc_conventional(lq_decompose(h), k.values(), s);
}

CMatrix svd_inverse(const SvdFactors& f) {
    const std::size_t n = f.sigma.size();
    const double smax = f.sigma.empty() ? 0.0 : f.sigma.front();
    if (n == 0 || !(f.sigma.back() > tol::sing * smax)) {
        throw Error(ErrorKind::NumericallySingular, "smallest singular value below threshold");
    }
    // (V Sigma^-1) U^H
    CMatrix vs = f.v;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) vs(r, c) /= f.sigma[c];
    return vs * f.u.adjoint();
}

PrecodingMatrix dpc_linear(const SvdFactors& f, const EffectiveGain& k) {
    require_length(k.size(), f.sigma.size(), "effective gain");
    CMatrix w = svd_inverse(f);
    // Right-multiplying by K scales columns; inactive users (k = 0) are masked to
    // exact zeros rather than formed as 0 * (1/sigma).
    for (std::size_t r = 0; r < w.rows(); ++r)
        for (std::size_t c = 0; c < w.cols(); ++c) w(r, c) = k[c] == 0.0 ? cplx(0.0) : w(r, c) * k[c];
    return PrecodingMatrix{std::move(w)};
}

PrecodingMatrix dpc_linear(const ChannelMatrix& h, const EffectiveGain& k) {
    require_length(k.size(), h.n(), "effective gain");
    return dpc_linear(svd_decompose(h), k);
}

double linear_precoder_power(const SvdFactors& f, const EffectiveGain& k) {
    const std::size_t n = f.sigma.size();
    require_length(k.size(), n, "effective gain");
    double p = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double col = 0.0;
        for (std::size_t m = 0; m < n; ++m) col += std::norm(f.u(m, j)) * k[m] * k[m];
        p += col / (f.sigma[j] * f.sigma[j]);
    }
    return p;
}

WaterfillResult waterfill(std::span<const double> sigma, PowerBudget budget) {
    const std::size_t n = sigma.size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "waterfill needs at least one channel");
    for (double s : sigma) {
        if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorKind::InvalidArgument, "sigma must be positive");
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    // Largest active set {strongest m} whose weakest member still gets p > 0.
    double inv_sum = 0.0;
    std::vector<double> prefix(n);
    for (std::size_t m = 0; m < n; ++m) {
        inv_sum += 1.0 / (sigma[idx[m]] * sigma[idx[m]]);
        prefix[m] = inv_sum;
    }
    std::size_t active = 1;
    double mu = budget.value() + prefix[0];
    for (std::size_t m = n; m >= 1; --m) {
        const double cand = (budget.value() + prefix[m - 1]) / static_cast<double>(m);
        const double weakest = sigma[idx[m - 1]];
        if (cand - 1.0 / (weakest * weakest) > 0.0) {
            active = m;
            mu = cand;
            break;
        }
    }

    RVector p(n, 0.0), k(n, 0.0);
    for (std::size_t m = 0; m < active; ++m) {
        const std::size_t i = idx[m];
        const double lambda = sigma[i] * sigma[i];
        p[i] = mu - 1.0 / lambda;
        k[i] = std::sqrt(p[i] * lambda);
    }
    return WaterfillResult{mu, std::move(p), EffectiveGain(std::move(k)), active};
}

EffectiveGain normalize_gains(const EffectiveGain& k, double target) {
    if (!(target > 0.0)) throw Error(ErrorKind::InvalidArgument, "normalization target must be positive");
    double e = 0.0;
    for (double g : k.values()) e += g * g;
    if (e == 0.0) throw Error(ErrorKind::DegenerateGain, "all gains are zero");
    const double scale = std::sqrt(target / e);
    RVector out(k.values());
    for (double& g : out) g *= scale;
    return EffectiveGain(std::move(out));
}

EffectiveGain waterfill_design(const SvdFactors& f, PowerBudget budget) {
    return waterfill(f.sigma, budget).gains;
}

EffectiveGain identity_design(const SvdFactors& f, PowerBudget budget) {
    const EffectiveGain ones(RVector(f.sigma.size(), 1.0));
    const double p = linear_precoder_power(f, ones);
    return EffectiveGain(RVector(f.sigma.size(), std::sqrt(budget.value() / p)));
}

PrecodingMatrix normalize_power(const PrecodingMatrix& w, PowerBudget budget) {
    const double p = w.power();
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorKind::DegenerateGain, "precoder has zero or non-finite power");
    PrecodingMatrix out = w;
    out.w *= std::sqrt(budget.value() / p);
    return out;
}

CMatrix lq_inverse(const LqFactors& f) {
    const std::size_t n = f.l.rows();
    // L^-1 by forward substitution, column by column.
    CMatrix linv(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t r = c; r < n; ++r) {
            cplx acc = (r == c) ? cplx(1.0) : cplx(0.0);
            for (std::size_t m = c; m < r; ++m) acc -= f.l(r, m) * linv(m, c);
            linv(r, c) = acc / f.l(r, r);
        }
    }
    return f.q.adjoint() * linv;
}

PrecodingMatrix zf_precode(const ChannelMatrix& h) { return PrecodingMatrix{lq_inverse(lq_decompose(h))}; }

PrecodingMatrix mmse_precode(const ChannelMatrix& h, double noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
        throw Error(ErrorKind::InvalidArgument, "noise variance must be positive");
    }
    const std::size_t n = h.n();
    const CMatrix hh = h.matrix().adjoint();
    CMatrix gram = h.matrix() * hh;
    for (std::size_t i = 0; i < n; ++i) gram(i, i) += static_cast<double>(n) * noise_var;
    return PrecodingMatrix{hh * lq_inverse(lq_decompose(ChannelMatrix(std::move(gram))))};
}

double thp_modulo(double a, double base) noexcept {
    const double period = 2.0 * base;
    double r = a - period * std::floor((a + base) / period);
    // floor rounding can land exactly on +base
    if (r >= base) r -= period;
    if (r < -base) r += period;
    return r;
}

cplx thp_modulo(cplx a, double base) noexcept { return {thp_modulo(a.real(), base), thp_modulo(a.imag(), base)}; }

CVector thp_feedback(const CMatrix& l, std::span<const cplx> s, double modulo_base) {
    if (!(modulo_base > 0.0)) throw Error(ErrorKind::InvalidArgument, "modulo base must be positive");
    const std::size_t n = l.rows();
    require_length(s.size(), n, "symbol vector");
    CVector xt(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = s[i];
        for (std::size_t m = 0; m < i; ++m) acc -= (l(i, m) / l(i, i)) * xt[m];
        xt[i] = thp_modulo(acc, modulo_base);
    }
    return xt;
}

SymbolVector thp_precode(const ChannelMatrix& h, std::span<const cplx> s, double modulo_base) {
    const LqFactors f = lq_decompose(h);
    return adjoint_times(f.q, thp_feedback(f.l, s, modulo_base));
}

UserGroups contiguous_groups(std::size_t n_users, std::size_t group_size) {
    if (group_size == 0) throw Error(ErrorKind::InvalidArgument, "group size must be >= 1");
    UserGroups g;
    for (std::size_t start = 0; start < n_users; start += group_size) {
        std::vector<std::size_t> block;
        for (std::size_t u = start; u < std::min(n_users, start + group_size); ++u) block.push_back(u);
        g.push_back(std::move(block));
    }
    return g;
}

PrecodingMatrix bd_precode(const ChannelMatrix& h, const UserGroups& groups) {
    const std::size_t n = h.n();
    std::vector<int> owner(n, -1);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (groups[gi].empty()) throw Error(ErrorKind::InvalidArgument, "empty user group");
        for (std::size_t u : groups[gi]) {
            if (u >= n || owner[u] != -1) throw Error(ErrorKind::InvalidArgument, "groups must partition the users");
            owner[u] = static_cast<int>(gi);
        }
    }
    if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
        throw Error(ErrorKind::InvalidArgument, "groups must cover every user");
    }

    CMatrix w(n, n);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        const std::size_t m = g.size();

        // Null space of the other groups' rows: pad them to n x n and take the
        // right singular vectors belonging to the m zero singular values.
        CMatrix basis;
        if (m == n) {
            basis = CMatrix::identity(n);
        } else {
            CMatrix comp(n, n);
            std::size_t r = 0;
            for (std::size_t u = 0; u < n; ++u) {
                if (owner[u] == static_cast<int>(gi)) continue;
                const auto src = h.matrix().row(u);
                std::copy(src.begin(), src.end(), comp.row(r++).begin());
            }
            const SvdFactors f = svd_decompose(ChannelMatrix(std::move(comp)));
            const double smax = f.sigma.front();
            if (!(f.sigma[n - m - 1] > tol::sing * smax)) {
                throw Error(ErrorKind::InfeasibleBlocking,
                            "complementary channel of group " + std::to_string(gi) + " is rank deficient");
            }
            basis = CMatrix(n, m);
            for (std::size_t rr = 0; rr < n; ++rr)
                for (std::size_t c = 0; c < m; ++c) basis(rr, c) = f.v(rr, n - m + c);
        }

        CMatrix hg(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            const auto src = h.matrix().row(g[i]);
            std::copy(src.begin(), src.end(), hg.row(i).begin());
        }
        CMatrix block_inv;
        try {
            block_inv = lq_inverse(lq_decompose(ChannelMatrix(hg * basis)));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NumericallySingular) throw;
            throw Error(ErrorKind::InfeasibleBlocking,
                        "effective channel of group " + std::to_string(gi) + " is singular");
        }
        const CMatrix wg = basis * block_inv;
        for (std::size_t rr = 0; rr < n; ++rr)
            for (std::size_t i = 0; i < m; ++i) w(rr, g[i]) = wg(rr, i);
    }
    return PrecodingMatrix{std::move(w)};
}

}  // namespace dpcperm
