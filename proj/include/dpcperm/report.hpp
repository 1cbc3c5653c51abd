#pragma once

// Experiment descriptions (JSON in) and result files (CSV/JSON out). All
// writers are deterministic: no timestamps, fixed float formatting, and a
// provenance header derived only from the tool version, config and seed.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dpcperm/order_search.hpp"
#include "dpcperm/sweep.hpp"

namespace dpcperm {

inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

struct Provenance {
    std::string config_hash;  // FNV-1a 64 of the canonical config JSON, hex
    std::uint64_t seed = 0;
};

std::string fnv1a_hex(std::string_view bytes);
Provenance make_provenance(const nlohmann::json& canonical_config, std::uint64_t seed);

/// %.17g, with "inf"/"-inf"/"nan" spelled out.
std::string format_double(double v);

// --- ber-sweep ---------------------------------------------------------------

struct SweepPlan {
    SweepConfig base;  // precoder and modulation are overwritten per run
    std::vector<PrecoderKind> precoders;
    std::vector<unsigned> modulations;
};

/// Parses a sweep config file. Throws Error(InvalidArgument) naming the field.
/// snr_grid_db entries may be numbers or the string "inf".
SweepPlan parse_sweep_plan(const nlohmann::json& j);
nlohmann::json to_json(const SweepConfig& cfg);
nlohmann::json to_json(const SweepPlan& plan);

std::string ber_csv(const SweepResult& r, const Provenance& prov);
nlohmann::json sweep_summary_json(const SweepResult& r, const Provenance& prov);
std::string ber_csv_filename(const SweepConfig& cfg);

// --- order-search ------------------------------------------------------------

enum class OrderGainMode { DiagL, Waterfill, Identity };

struct OrderSearchPlan {
    std::size_t n_users = 4;
    std::uint64_t seed = 1;
    unsigned modulation = 16;
    OrderGainMode gain_mode = OrderGainMode::DiagL;
    double power_budget = 4.0;
    std::vector<ObjectiveKind> objectives{ObjectiveKind::AveragePower, ObjectiveKind::Papr};
    std::string channel_file;  // optional; generated from seed when empty
    std::size_t workers = 1;
};

OrderSearchPlan parse_order_search_plan(const nlohmann::json& j);
nlohmann::json to_json(const OrderSearchPlan& plan);

/// Runs the diagonal search for every objective, emits the per-order
/// table and counters; with `verify`, also runs the naive oracle and reports
/// whether every per-order signal and best order agree.
nlohmann::json order_search_report(const OrderSearchPlan& plan, bool verify, const Provenance& prov);

/// Symbols used by order-search: seeded uniform draws from the constellation.
CVector order_search_symbols(std::size_t n, unsigned modulation, std::uint64_t seed);

// --- complexity --------------------------------------------------------------

inline constexpr std::size_t kComplexityMaxN = 12;
inline constexpr std::size_t kComplexityMeasuredMaxN = 7;

struct ComplexityRow {
    std::size_t n = 0;
    ComplexityModel model;
    std::int64_t measured_naive = -1;     // -1 when not measured
    std::int64_t measured_proposed = -1;
};

std::vector<ComplexityRow> complexity_table(std::size_t n_max, std::uint64_t seed);
std::string complexity_csv(const std::vector<ComplexityRow>& rows, const Provenance& prov);

}  // namespace dpcperm
