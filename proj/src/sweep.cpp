#include "dpcperm/sweep.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dpcperm/channel.hpp"
#include "dpcperm/error.hpp"
#include "dpcperm/kernels.hpp"
#include "dpcperm/parallel.hpp"
#include "dpcperm/rng.hpp"

namespace dpcperm {

namespace {

constexpr std::uint64_t kTrialTag = 0x7A1A15;
constexpr std::uint64_t kThpPilotTag = 0x7A1A16;
// Per-trial channels average the pilot noise away across trials; a fixed
// channel has only one estimate, so it gets a longer pilot.
constexpr std::size_t kThpPilotDrawsPerTrial = 512;
constexpr std::size_t kThpPilotDrawsFixed = 16384;

// Everything about one channel realization that does not depend on SNR.
struct Link {
    ChannelMatrix h;
    PrecoderKind kind;
    std::optional<LqFactors> lq;
    RVector dpc_gains;  // normalized K for the DPC family
    CMatrix w;          // linear precoders (dpc-linear, zf, bd)
    CVector rx_gain;    // effective gain per user, what the receiver divides by
    std::vector<bool> active;
    double thp_scale = 1.0;
    double thp_base = 0.0;
};

RVector dpc_family_gains(const SweepConfig& cfg, const ChannelMatrix& h, const LqFactors& lq) {
    RVector k;
    if (cfg.gain_mode == GainMode::DiagL) {
        k = lq.diagonal_gains();
    } else {
        k = waterfill(svd_decompose(h).sigma, PowerBudget(cfg.power_budget)).gains.values();
    }
    return normalize_gains(EffectiveGain(std::move(k)), static_cast<double>(cfg.n_users)).values();
}

CVector diagonal_of_product(const ChannelMatrix& h, const CMatrix& w) {
    const std::size_t n = h.n();
    CVector g(n);
    for (std::size_t u = 0; u < n; ++u) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h(u, j) * w(j, u);
        g[u] = acc;
    }
    return g;
}

void set_linear(Link& link, const PrecodingMatrix& w) {
    link.w = w.w;
    link.rx_gain = diagonal_of_product(link.h, link.w);
}

// Mean |x~|^2 of the modulo feedback for this channel. The modulo output is
// only near-uniform when the interference term is large, so the closed-form
// uniform model under-estimates it; a seeded pilot average does not.
double thp_feedback_energy(const CMatrix& l, const Constellation& c, double base, std::size_t n, std::size_t draws,
                           Stream rng) {
    double acc = 0.0;
    CVector s(n);
    for (std::size_t t = 0; t < draws; ++t) {
        for (cplx& z : s) z = c.points()[rng.next_u64() % c.order()];
        acc += kernels::norm2_squared(thp_feedback(l, s, base));
    }
    return acc / static_cast<double>(draws);
}

Link prepare(const SweepConfig& cfg, ChannelMatrix h, const Constellation& c, std::uint64_t channel_id) {
    Link link{std::move(h), cfg.precoder, std::nullopt, {}, {}, {}, {}, 1.0, 0.0};
    const std::size_t n = cfg.n_users;
    const PowerBudget budget(cfg.power_budget);
    link.active.assign(n, true);
    switch (cfg.precoder) {
        case PrecoderKind::DpcConventional:
        case PrecoderKind::DpcLinear: {
            link.lq = lq_decompose(link.h);
            link.dpc_gains = dpc_family_gains(cfg, link.h, *link.lq);
            link.rx_gain.assign(link.dpc_gains.begin(), link.dpc_gains.end());
            for (std::size_t u = 0; u < n; ++u) link.active[u] = link.dpc_gains[u] > 0.0;
            if (cfg.precoder == PrecoderKind::DpcLinear) {
                link.w = dpc_linear(svd_decompose(link.h), EffectiveGain(link.dpc_gains)).w;
                link.lq.reset();
            }
            break;
        }
        case PrecoderKind::Zf: set_linear(link, normalize_power(zf_precode(link.h), budget)); break;
        case PrecoderKind::Bd:
            set_linear(link, normalize_power(bd_precode(link.h, contiguous_groups(n, cfg.bd_group_size)), budget));
            break;
        case PrecoderKind::Mmse: break;  // depends on the noise level
        case PrecoderKind::Thp: {
            link.lq = lq_decompose(link.h);
            link.thp_base = c.thp_modulo_base();
            const std::size_t draws = cfg.channel_mode == ChannelMode::FixedChannel ? kThpPilotDrawsFixed
                                                                                    : kThpPilotDrawsPerTrial;
            const double energy = thp_feedback_energy(link.lq->l, c, link.thp_base, n, draws,
                                                      Stream::derive(cfg.seed, {kThpPilotTag, channel_id}));
            link.thp_scale = std::sqrt(cfg.power_budget / energy);
            link.rx_gain.resize(n);
            for (std::size_t u = 0; u < n; ++u) link.rx_gain[u] = link.thp_scale * link.lq->l(u, u);
            break;
        }
    }
    return link;
}

struct TrialOutcome {
    std::uint64_t errors = 0;
    std::uint64_t bits = 0;
    double tx_power = 0.0;
};

TrialOutcome run_trial(const SweepConfig& cfg, const Link& link, const Constellation& c, double snr_db,
                       Stream& rng) {
    const std::size_t n = cfg.n_users;
    const unsigned bps = c.bits_per_symbol();

    Bits bits(n * bps);
    for (auto& b : bits) b = rng.bit();
    CVector s = qam_modulate(bits, c);
    for (std::size_t u = 0; u < n; ++u)
        if (!link.active[u]) s[u] = 0.0;

    const bool noiseless = std::isinf(snr_db) && snr_db > 0.0;
    const double noise_var = noiseless ? 0.0 : 1.0 / std::pow(10.0, snr_db / 10.0);

    CVector x;
    CVector rx_gain = link.rx_gain;
    switch (link.kind) {
        case PrecoderKind::DpcConventional: x = dpc_conventional(*link.lq, link.dpc_gains, s); break;
        case PrecoderKind::DpcLinear:
        case PrecoderKind::Zf:
        case PrecoderKind::Bd: x = link.w * s; break;
        case PrecoderKind::Mmse: {
            // At infinite SNR the regularizer vanishes and MMSE is ZF.
            const PrecodingMatrix w = noiseless ? zf_precode(link.h) : mmse_precode(link.h, noise_var);
            const PrecodingMatrix wn = normalize_power(w, PowerBudget(cfg.power_budget));
            rx_gain = diagonal_of_product(link.h, wn.w);
            x = wn.w * s;
            break;
        }
        case PrecoderKind::Thp: {
            CVector xt = thp_feedback(link.lq->l, s, link.thp_base);
            x.assign(n, 0.0);
            for (std::size_t r = 0; r < n; ++r)
                for (std::size_t cc = 0; cc < n; ++cc) x[cc] += std::conj(link.lq->q(r, cc)) * xt[r];
            for (cplx& z : x) z *= link.thp_scale;
            break;
        }
    }

    const CVector clean = link.h.matrix() * x;
    const CVector y = add_awgn(clean, snr_db, 1.0, rng);

    CVector z(n);
    for (std::size_t u = 0; u < n; ++u) {
        z[u] = y[u] / rx_gain[u];
        if (link.kind == PrecoderKind::Thp) z[u] = thp_modulo(z[u], link.thp_base);
    }
    const Bits rx = qam_demodulate(z, c);

    TrialOutcome out;
    out.tx_power = kernels::norm2_squared(x);
    for (std::size_t u = 0; u < n; ++u) {
        if (!link.active[u]) continue;
        const std::span<const std::uint8_t> tb(bits.data() + u * bps, bps);
        const std::span<const std::uint8_t> rb(rx.data() + u * bps, bps);
        const BitErrorCount cnt = count_ber(tb, rb);
        out.errors += cnt.errors;
        out.bits += cnt.total;
    }
    return out;
}

}  // namespace

std::string_view to_string(ChannelMode m) noexcept {
    return m == ChannelMode::FixedChannel ? "fixed-channel" : "per-trial-channel";
}

std::string_view to_string(PrecoderKind p) noexcept {
    switch (p) {
        case PrecoderKind::DpcConventional: return "dpc-conventional";
        case PrecoderKind::DpcLinear: return "dpc-linear";
        case PrecoderKind::Zf: return "zf";
        case PrecoderKind::Mmse: return "mmse";
        case PrecoderKind::Thp: return "thp";
        case PrecoderKind::Bd: return "bd";
    }
    return "?";
}

std::string_view to_string(GainMode g) noexcept { return g == GainMode::DiagL ? "diag-L" : "waterfill"; }

std::optional<ChannelMode> parse_channel_mode(std::string_view s) noexcept {
    if (s == "fixed-channel") return ChannelMode::FixedChannel;
    if (s == "per-trial-channel") return ChannelMode::PerTrialChannel;
    return std::nullopt;
}

std::optional<PrecoderKind> parse_precoder(std::string_view s) noexcept {
    for (auto p : {PrecoderKind::DpcConventional, PrecoderKind::DpcLinear, PrecoderKind::Zf, PrecoderKind::Mmse,
                   PrecoderKind::Thp, PrecoderKind::Bd}) {
        if (s == to_string(p)) return p;
    }
    return std::nullopt;
}

std::optional<GainMode> parse_gain_mode(std::string_view s) noexcept {
    if (s == "diag-L") return GainMode::DiagL;
    if (s == "waterfill") return GainMode::Waterfill;
    return std::nullopt;
}

bool is_dpc_family(PrecoderKind p) noexcept {
    return p == PrecoderKind::DpcConventional || p == PrecoderKind::DpcLinear;
}

void SweepConfig::validate() const {
    auto bad = [](const std::string& field, const std::string& why) {
        throw Error(ErrorKind::InvalidArgument, field + ": " + why);
    };
    if (n_users == 0) bad("n_users", "must be >= 1");
    if (modulation != 4 && modulation != 16 && modulation != 64 && modulation != 128) {
        bad("modulation", "must be one of 4, 16, 64, 128");
    }
    if (snr_grid_db.empty()) bad("snr_grid_db", "must not be empty");
    for (double v : snr_grid_db) {
        if (std::isnan(v) || (std::isinf(v) && v < 0.0)) bad("snr_grid_db", "entries must be finite or +inf");
    }
    if (trials_per_point == 0) bad("trials_per_point", "must be >= 1");
    if (!(power_budget > 0.0) || !std::isfinite(power_budget)) bad("power_budget", "must be positive");
    if (bd_group_size == 0 || bd_group_size > n_users) bad("bd_group_size", "must be in [1, n_users]");
    if (workers == 0) bad("workers", "must be >= 1");
}

SweepResult run_ber_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const Constellation c(cfg.modulation);
    const std::size_t points = cfg.snr_grid_db.size();
    const std::size_t trials = cfg.trials_per_point;

    std::optional<Link> fixed;
    if (cfg.channel_mode == ChannelMode::FixedChannel) {
        try {
            fixed = prepare(cfg, generate_channel(ChannelSpec{cfg.n_users, cfg.seed, ChannelDistribution::ComplexGaussianUnit}),
                            c, 0);
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(to_string(cfg.precoder)) + " sweep, fixed channel: " + e.what());
        }
    }

    // outcome[t * points + i]; every slot is written by exactly one trial.
    std::vector<TrialOutcome> outcome(trials * points);
    parallel_for(trials, cfg.workers, [&](std::size_t t) {
        try {
            std::optional<Link> own;
            if (!fixed) own = prepare(cfg, generate_trial_channel(cfg.n_users, cfg.seed, t), c, t);
            const Link& link = fixed ? *fixed : *own;
            for (std::size_t i = 0; i < points; ++i) {
                Stream rng = Stream::derive(cfg.seed, {kTrialTag, i, t});
                outcome[t * points + i] = run_trial(cfg, link, c, cfg.snr_grid_db[i], rng);
            }
        } catch (const Error& e) {
            throw Error(e.kind(), std::string(to_string(cfg.precoder)) + " sweep, trial " + std::to_string(t) +
                                      ": " + e.what());
        }
    });

    SweepResult res;
    res.config = cfg;
    double power = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
        BerRecord rec;
        rec.snr_db = cfg.snr_grid_db[i];
        for (std::size_t t = 0; t < trials; ++t) {
            const TrialOutcome& o = outcome[t * points + i];
            rec.bit_errors += o.errors;
            rec.bits_sent += o.bits;
        }
        rec.ber = rec.bits_sent == 0 ? 0.0 : static_cast<double>(rec.bit_errors) / static_cast<double>(rec.bits_sent);
        rec.wilson_ci_95 = wilson_interval_95(rec.bit_errors, rec.bits_sent);
        res.records.push_back(rec);
    }
    for (std::size_t t = 0; t < trials; ++t)
        for (std::size_t i = 0; i < points; ++i) power += outcome[t * points + i].tx_power;
    res.mean_transmit_power = power / static_cast<double>(trials * points);
    return res;
}

}  // namespace dpcperm
