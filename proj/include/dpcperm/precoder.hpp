#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dpcperm/linalg.hpp"

namespace dpcperm {

using SymbolVector = CVector;

struct PrecodingMatrix {
    CMatrix w;

    SymbolVector apply(std::span<const cplx> s) const { return w * s; }
    /// tr(W W^H)
    double power() const;
};

class PowerBudget {
public:
    explicit PowerBudget(double p_total);
    double value() const noexcept { return p_; }

private:
    double p_;
};

/// Conventional DPC with the gains D_L implied by the LQ factorization:
/// x~_n = s_n - sum_{m<n} (l_nm / l_nn) x~_m, then x = Q^H x~.
SymbolVector dpc_conventional(const ChannelMatrix& h, std::span<const cplx> s);

/// Conventional DPC targeting an arbitrary effective gain: solves L x~ = K s by
/// successive cancellation, then x = Q^H x~. With K = diag(L) this is the
/// routine above.
SymbolVector dpc_conventional(const ChannelMatrix& h, const EffectiveGain& k, std::span<const cplx> s);
SymbolVector dpc_conventional(const LqFactors& f, std::span<const double> gains, std::span<const cplx> s);

/// Interference pre-subtraction on the triangular factor only (returns x~).
CVector successive_cancellation(const CMatrix& l, std::span<const double> gains, std::span<const cplx> s);

/// W = V Sigma^-1 U^H K. Columns with k_n = 0 are exactly zero.
PrecodingMatrix dpc_linear(const ChannelMatrix& h, const EffectiveGain& k);
PrecodingMatrix dpc_linear(const SvdFactors& f, const EffectiveGain& k);

/// V Sigma^-1 U^H, the shared part of every linear DPC precoder.
CMatrix svd_inverse(const SvdFactors& f);

/// E|x|^2 summed over users for x = V Sigma^-1 U^H K s with unit-energy i.i.d. s:
/// tr(Sigma^-2 U^H K^2 U). Reduces to sum k_n^2 / lambda_n when U = I.
double linear_precoder_power(const SvdFactors& f, const EffectiveGain& k);

struct WaterfillResult {
    double water_level = 0.0;  // mu
    RVector power;             // p_n = (mu - 1/lambda_n)^+
    EffectiveGain gains;       // k_n = sqrt(p_n lambda_n)
    std::size_t active = 0;
};

/// Exact active-set water-filling over lambda_n = sigma_n^2; sum p_n == budget.
WaterfillResult waterfill(std::span<const double> sigma, PowerBudget budget);

/// Rescale so that sum k_n^2 == target.
EffectiveGain normalize_gains(const EffectiveGain& k, double target);

/// Gain design objective f(K) for the beamformer stage. Only water-filling and
/// identity gains ship; anything with this signature can be plugged in.
using GainDesign = std::function<EffectiveGain(const SvdFactors&, PowerBudget)>;
EffectiveGain waterfill_design(const SvdFactors& f, PowerBudget budget);
EffectiveGain identity_design(const SvdFactors& f, PowerBudget budget);

/// Scale W so tr(W W^H) == budget.
PrecodingMatrix normalize_power(const PrecodingMatrix& w, PowerBudget budget);

/// Unnormalized H^-1.
PrecodingMatrix zf_precode(const ChannelMatrix& h);

/// H^H (H H^H + n * noise_var * I)^-1, unnormalized.
PrecodingMatrix mmse_precode(const ChannelMatrix& h, double noise_var);

/// Tomlinson-Harashima: successive cancellation with per-dimension modulo
/// into [-base, base). Returns x = Q^H x~.
SymbolVector thp_precode(const ChannelMatrix& h, std::span<const cplx> s, double modulo_base);
CVector thp_feedback(const CMatrix& l, std::span<const cplx> s, double modulo_base);
double thp_modulo(double a, double base) noexcept;
cplx thp_modulo(cplx a, double base) noexcept;

/// Block diagonalization: each group's columns lie in the null space of every
/// other group's rows, followed by a zero-forcing inverse inside the block.
using UserGroups = std::vector<std::vector<std::size_t>>;
PrecodingMatrix bd_precode(const ChannelMatrix& h, const UserGroups& groups);
UserGroups contiguous_groups(std::size_t n_users, std::size_t group_size);

/// A^-1 = Q^H L^-1 from an LQ factorization of A.
CMatrix lq_inverse(const LqFactors& f);

}  // namespace dpcperm
