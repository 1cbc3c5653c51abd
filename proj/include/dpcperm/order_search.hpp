#pragma once

// Precoding-order search. The naive route re-factorizes the permuted channel
// for every order; the diagonal route factorizes once and only permutes the
// diagonal gain matrix. Both enumerate orders lexicographically and reduce by
// (value, order) so their answers can be compared exactly.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dpcperm/precoder.hpp"

namespace dpcperm {

enum class ObjectiveKind { AveragePower, Papr, MinPower };

std::string_view to_string(ObjectiveKind k) noexcept;
std::optional<ObjectiveKind> parse_objective(std::string_view s) noexcept;

struct OrderObjective {
    ObjectiveKind kind = ObjectiveKind::AveragePower;
};

/// mean |x_n|^2
double objective_ap(std::span<const cplx> x);
/// max |x_n|^2 / mean |x_n|^2; DegenerateGain for x = 0.
double objective_papr(std::span<const cplx> x);

struct OrderEvaluation {
    Permutation order;
    double value = 0.0;
    SymbolVector signal;
};

struct OrderSearchResult {
    Permutation best_order = Permutation::identity(0);
    double best_value = 0.0;
    SymbolVector best_signal;
    std::uint64_t decompositions_performed = 0;
    std::uint64_t permutations_evaluated = 0;
    std::vector<OrderEvaluation> evaluations;  // lexicographic order; empty unless requested
};

struct SearchOptions {
    bool record_evaluations = false;
    std::size_t workers = 1;
    // 0: evaluate the objective on the given s. >0: average AP/PAPR over this
    // many symbol draws (unit-energy QPSK) from `draw_seed`; s still sets the
    // reported signal. MinPower is always the exact expectation.
    std::size_t symbol_draws = 0;
    std::uint64_t draw_seed = 0;
};

inline constexpr std::size_t kMaxSearchUsers = 8;
inline constexpr double kTieTolerance = 1e-12;

OrderSearchResult naive_order_search(const ChannelMatrix& h, std::span<const cplx> s, const EffectiveGain& k,
                                     OrderObjective obj, const SearchOptions& opts = {});

OrderSearchResult diagonal_order_search(const ChannelMatrix& h, std::span<const cplx> s, const EffectiveGain& k,
                                        OrderObjective obj, const SearchOptions& opts = {});

/// argmin over orders of sum_n k_{pi,n}^2 / lambda_n: pair the largest gain with
/// the largest lambda. Returned as the order p with diagonal_permute(k, p) sorted
/// like sigma.
Permutation min_power_order_closed_form(const EffectiveGain& k, std::span<const double> sigma);

/// sum_n k_{pi,n}^2 / sigma_n^2 for K_pi = diagonal_permute(k, p).
double min_power_closed_form_value(const EffectiveGain& k, std::span<const double> sigma, const Permutation& p);

struct ComplexityModel {
    double naive = 0.0;     // n^3 * n!
    double proposed = 0.0;  // n^3 + n!
    double ratio_db = 0.0;  // 10 log10(naive / proposed)
};

ComplexityModel complexity_model(std::size_t n);

/// All permutations of {0..n-1} in lexicographic order.
std::vector<Permutation> all_permutations(std::size_t n);

/// Index of the minimum with ties (relative kTieTolerance) going to the earliest entry.
std::size_t lexicographic_argmin(std::span<const double> values);

}  // namespace dpcperm
