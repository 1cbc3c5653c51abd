#include "dpcperm/order_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dpcperm/error.hpp"
#include "dpcperm/kernels.hpp"
#include "dpcperm/parallel.hpp"
#include "dpcperm/rng.hpp"

namespace dpcperm {

namespace {

constexpr std::uint64_t kDrawTag = 0x0DE5D5A1;

void check_inputs(const ChannelMatrix& h, std::span<const cplx> s, const EffectiveGain& k) {
    const std::size_t n = h.n();
    if (n > kMaxSearchUsers) {
        throw Error(ErrorKind::OrderSpaceTooLarge,
                    std::to_string(n) + " users means " + std::to_string(n) + "! orders; limit is " +
                        std::to_string(kMaxSearchUsers));
    }
    if (s.size() != n) throw Error(ErrorKind::LengthMismatch, "symbol vector length differs from n");
    if (k.size() != n) throw Error(ErrorKind::LengthMismatch, "gain length differs from n");
}

double evaluate(ObjectiveKind kind, std::span<const cplx> x) {
    switch (kind) {
        case ObjectiveKind::AveragePower: return objective_ap(x);
        case ObjectiveKind::Papr: return objective_papr(x);
        case ObjectiveKind::MinPower: break;
    }
    throw Error(ErrorKind::InvalidArgument, "min-power objective is evaluated from the precoder, not a signal");
}

std::vector<CVector> symbol_draws(std::size_t n, const SearchOptions& opts) {
    std::vector<CVector> draws(opts.symbol_draws, CVector(n));
    const double a = 1.0 / std::sqrt(2.0);
    for (std::size_t d = 0; d < draws.size(); ++d) {
        Stream rng = Stream::derive(opts.draw_seed, {kDrawTag, d});
        for (cplx& z : draws[d]) z = {rng.bit() ? -a : a, rng.bit() ? -a : a};
    }
    return draws;
}

OrderSearchResult finish(std::vector<Permutation>&& orders, std::vector<double>&& values,
                         std::vector<SymbolVector>&& signals, std::uint64_t decompositions,
                         const SearchOptions& opts) {
    OrderSearchResult res;
    const std::size_t best = lexicographic_argmin(values);
    res.best_order = orders[best];
    res.best_value = values[best];
    res.best_signal = signals[best];
    res.decompositions_performed = decompositions;
    res.permutations_evaluated = orders.size();
    if (opts.record_evaluations) {
        res.evaluations.reserve(orders.size());
        for (std::size_t i = 0; i < orders.size(); ++i) {
            res.evaluations.push_back(OrderEvaluation{std::move(orders[i]), values[i], std::move(signals[i])});
        }
    }
    return res;
}

}  // namespace

std::string_view to_string(ObjectiveKind k) noexcept {
    switch (k) {
        case ObjectiveKind::AveragePower: return "average-power";
        case ObjectiveKind::Papr: return "papr";
        case ObjectiveKind::MinPower: return "min-power";
    }
    return "?";
}

std::optional<ObjectiveKind> parse_objective(std::string_view s) noexcept {
    if (s == "average-power" || s == "ap") return ObjectiveKind::AveragePower;
    if (s == "papr") return ObjectiveKind::Papr;
    if (s == "min-power") return ObjectiveKind::MinPower;
    return std::nullopt;
}

double objective_ap(std::span<const cplx> x) {
    if (x.empty()) throw Error(ErrorKind::LengthMismatch, "empty signal");
    return kernels::power_stats(x).sum / static_cast<double>(x.size());
}

double objective_papr(std::span<const cplx> x) {
    if (x.empty()) throw Error(ErrorKind::LengthMismatch, "empty signal");
    const kernels::PowerStats st = kernels::power_stats(x);
    if (st.sum == 0.0) throw Error(ErrorKind::DegenerateGain, "PAPR of the zero signal");
    return st.peak / (st.sum / static_cast<double>(x.size()));
}

std::vector<Permutation> all_permutations(std::size_t n) {
    std::vector<std::size_t> o(n);
    std::iota(o.begin(), o.end(), std::size_t{0});
    std::vector<Permutation> out;
    do {
        out.emplace_back(o);
    } while (std::next_permutation(o.begin(), o.end()));
    return out;
}

std::size_t lexicographic_argmin(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best] - kTieTolerance * std::abs(values[best])) best = i;
    }
    return best;
}

OrderSearchResult naive_order_search(const ChannelMatrix& h, std::span<const cplx> s, const EffectiveGain& k,
                                     OrderObjective obj, const SearchOptions& opts) {
    check_inputs(h, s, k);
    const std::size_t n = h.n();
    std::vector<Permutation> orders = all_permutations(n);
    std::vector<double> values(orders.size());
    std::vector<SymbolVector> signals(orders.size());
    const std::vector<CVector> draws = symbol_draws(n, opts);

    DecompositionTally tally;
    parallel_for(orders.size(), opts.workers, [&](std::size_t i) {
        ScopedTally scope(tally);
        const Permutation& p = orders[i];
        // Users reordered: row i of H_p is user p(i), which carries gain k_i.
        const LqFactors f = lq_decompose(ChannelMatrix(permute_rows(h.matrix(), p)));
        signals[i] = dpc_conventional(f, k.values(), permute(s, p));
        if (obj.kind == ObjectiveKind::MinPower) {
            // ||L_p^-1 K||_F^2 / n, column by column through the same feedback.
            double total = 0.0;
            CVector e(n, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                e.assign(n, 0.0);
                e[j] = 1.0;
                total += kernels::norm2_squared(successive_cancellation(f.l, k.values(), e));
            }
            values[i] = total / static_cast<double>(n);
        } else if (draws.empty()) {
            values[i] = evaluate(obj.kind, signals[i]);
        } else {
            double acc = 0.0;
            for (const CVector& d : draws) acc += evaluate(obj.kind, dpc_conventional(f, k.values(), permute(d, p)));
            values[i] = acc / static_cast<double>(draws.size());
        }
    });
    return finish(std::move(orders), std::move(values), std::move(signals), tally.count(), opts);
}

OrderSearchResult diagonal_order_search(const ChannelMatrix& h, std::span<const cplx> s, const EffectiveGain& k,
                                        OrderObjective obj, const SearchOptions& opts) {
    check_inputs(h, s, k);
    const std::size_t n = h.n();

    DecompositionTally tally;
    CMatrix m;
    {
        ScopedTally scope(tally);
        m = svd_inverse(svd_decompose(h));  // V Sigma^-1 U^H, shared by every order
    }
    RVector col_energy(n, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) col_energy[c] += std::norm(m(r, c));

    std::vector<Permutation> orders = all_permutations(n);
    std::vector<double> values(orders.size());
    std::vector<SymbolVector> signals(orders.size());
    const std::vector<CVector> draws = symbol_draws(n, opts);

    parallel_for(orders.size(), opts.workers, [&](std::size_t i) {
        const EffectiveGain kp = diagonal_permute(k, orders[i]);
        CVector ks(n), x(n);
        for (std::size_t j = 0; j < n; ++j) ks[j] = kp[j] * s[j];
        kernels::matvec(m.data(), n, n, ks, x);
        if (obj.kind == ObjectiveKind::MinPower) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) total += kp[j] * kp[j] * col_energy[j];
            values[i] = total / static_cast<double>(n);
        } else if (draws.empty()) {
            values[i] = evaluate(obj.kind, x);
        } else {
            double acc = 0.0;
            CVector xd(n);
            for (const CVector& d : draws) {
                for (std::size_t j = 0; j < n; ++j) ks[j] = kp[j] * d[j];
                kernels::matvec(m.data(), n, n, ks, xd);
                acc += evaluate(obj.kind, xd);
            }
            values[i] = acc / static_cast<double>(draws.size());
        }
        signals[i] = std::move(x);
    });
    return finish(std::move(orders), std::move(values), std::move(signals), tally.count(), opts);
}

Permutation min_power_order_closed_form(const EffectiveGain& k, std::span<const double> sigma) {
    const std::size_t n = k.size();
    if (sigma.size() != n) throw Error(ErrorKind::LengthMismatch, "sigma length differs from gains");
    std::vector<std::size_t> by_gain(n), by_sigma(n);
    std::iota(by_gain.begin(), by_gain.end(), std::size_t{0});
    std::iota(by_sigma.begin(), by_sigma.end(), std::size_t{0});
    std::stable_sort(by_gain.begin(), by_gain.end(), [&](std::size_t a, std::size_t b) { return k[a] > k[b]; });
    std::stable_sort(by_sigma.begin(), by_sigma.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });
    std::vector<std::size_t> order(n);
    for (std::size_t r = 0; r < n; ++r) order[by_gain[r]] = by_sigma[r];
    return Permutation(std::move(order));
}

double min_power_closed_form_value(const EffectiveGain& k, std::span<const double> sigma, const Permutation& p) {
    const EffectiveGain kp = diagonal_permute(k, p);
    if (sigma.size() != kp.size()) throw Error(ErrorKind::LengthMismatch, "sigma length differs from gains");
    double v = 0.0;
    for (std::size_t i = 0; i < kp.size(); ++i) v += kp[i] * kp[i] / (sigma[i] * sigma[i]);
    return v;
}

ComplexityModel complexity_model(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    double fact = 1.0;
    for (std::size_t i = 2; i <= n; ++i) fact *= static_cast<double>(i);
    const double cube = static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(n);
    ComplexityModel m;
    m.naive = cube * fact;
    m.proposed = cube + fact;
    m.ratio_db = 10.0 * std::log10(m.naive / m.proposed);
    return m;
}

}  // namespace dpcperm
