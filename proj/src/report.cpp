#include "dpcperm/report.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dpcperm/channel.hpp"
#include "dpcperm/error.hpp"
#include "dpcperm/modem.hpp"
#include "dpcperm/rng.hpp"

namespace dpcperm {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSymbolTag = 0x5E1B01;

[[noreturn]] void field_error(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidArgument, "config field '" + field + "': " + why);
}

const json& require(const json& j, const char* field) {
    if (!j.contains(field)) field_error(field, "missing");
    return j.at(field);
}

template <typename T>
T get_as(const json& v, const std::string& field) {
    try {
        return v.get<T>();
    } catch (const json::exception& e) {
        field_error(field, std::string("wrong type (") + e.what() + ")");
    }
}

std::size_t get_count(const json& v, const std::string& field) {
    if (!v.is_number_integer() && !v.is_number_unsigned()) field_error(field, "expected a non-negative integer");
    const auto x = v.get<std::int64_t>();
    if (x < 0) field_error(field, "expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

void check_schema(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config root must be a JSON object");
    const int v = get_as<int>(require(j, "schema_version"), "schema_version");
    if (v != kConfigSchemaVersion) field_error("schema_version", "unsupported version " + std::to_string(v));
}

double parse_snr(const json& v) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        field_error("snr_grid_db", "unknown string entry '" + s + "'");
    }
    if (!v.is_number()) field_error("snr_grid_db", "entries must be numbers or \"inf\"");
    return v.get<double>();
}

json snr_to_json(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

std::string modulation_name(unsigned order) {
    return order == 4 ? "QPSK" : std::to_string(order) + "QAM";
}

std::string join_order(const Permutation& p) {
    std::string s;
    for (std::size_t i : p.one_based()) {
        if (!s.empty()) s += '-';
        s += std::to_string(i);
    }
    return s;
}

std::string provenance_header(const Provenance& prov) {
    std::string h;
    h += "# tool: dpcperm " + std::string(kToolVersion) + "\n";
    h += "# config_hash: " + prov.config_hash + "\n";
    h += "# seed: " + std::to_string(prov.seed) + "\n";
    return h;
}

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

Provenance make_provenance(const json& canonical_config, std::uint64_t seed) {
    return Provenance{fnv1a_hex(canonical_config.dump()), seed};
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SweepPlan parse_sweep_plan(const json& j) {
    check_schema(j);
    SweepPlan plan;
    SweepConfig& c = plan.base;

    c.n_users = get_count(require(j, "n_users"), "n_users");
    c.trials_per_point = get_count(require(j, "trials_per_point"), "trials_per_point");

    const json& grid = require(j, "snr_grid_db");
    if (!grid.is_array()) field_error("snr_grid_db", "expected an array");
    for (const json& v : grid) c.snr_grid_db.push_back(parse_snr(v));

    auto list_field = [&](const char* plural, const char* singular) -> std::vector<json> {
        if (j.contains(plural)) {
            if (!j.at(plural).is_array()) field_error(plural, "expected an array");
            return j.at(plural).get<std::vector<json>>();
        }
        if (j.contains(singular)) return {j.at(singular)};
        field_error(plural, "missing (or give '" + std::string(singular) + "')");
    };
    for (const json& v : list_field("precoders", "precoder")) {
        const auto p = parse_precoder(get_as<std::string>(v, "precoders"));
        if (!p) field_error("precoders", "unknown precoder '" + v.dump() + "'");
        plan.precoders.push_back(*p);
    }
    for (const json& v : list_field("modulations", "modulation")) {
        plan.modulations.push_back(get_as<unsigned>(v, "modulations"));
    }

    if (j.contains("channel_mode")) {
        const auto m = parse_channel_mode(get_as<std::string>(j.at("channel_mode"), "channel_mode"));
        if (!m) field_error("channel_mode", "expected fixed-channel or per-trial-channel");
        c.channel_mode = *m;
    }
    if (j.contains("gain_mode")) {
        const auto g = parse_gain_mode(get_as<std::string>(j.at("gain_mode"), "gain_mode"));
        if (!g) field_error("gain_mode", "expected diag-L or waterfill");
        c.gain_mode = *g;
    }
    c.power_budget = j.contains("power_budget") ? get_as<double>(j.at("power_budget"), "power_budget")
                                                : static_cast<double>(c.n_users);
    if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
    if (j.contains("bd_group_size")) c.bd_group_size = get_count(j.at("bd_group_size"), "bd_group_size");
    if (j.contains("workers")) c.workers = get_count(j.at("workers"), "workers");

    for (unsigned m : plan.modulations) {
        SweepConfig probe = c;
        probe.modulation = m;
        probe.validate();
    }
    return plan;
}

json to_json(const SweepConfig& c) {
    json grid = json::array();
    for (double v : c.snr_grid_db) grid.push_back(snr_to_json(v));
    return json{{"schema_version", kConfigSchemaVersion},
                {"n_users", c.n_users},
                {"modulation", c.modulation},
                {"snr_grid_db", grid},
                {"trials_per_point", c.trials_per_point},
                {"channel_mode", to_string(c.channel_mode)},
                {"precoder", to_string(c.precoder)},
                {"gain_mode", to_string(c.gain_mode)},
                {"power_budget", c.power_budget},
                {"seed", c.seed},
                {"bd_group_size", c.bd_group_size}};
}

json to_json(const SweepPlan& plan) {
    json j = to_json(plan.base);
    j.erase("precoder");
    j.erase("modulation");
    json p = json::array();
    for (auto k : plan.precoders) p.push_back(to_string(k));
    j["precoders"] = p;
    j["modulations"] = plan.modulations;
    return j;
}

std::string ber_csv_filename(const SweepConfig& cfg) {
    return "ber_" + std::string(to_string(cfg.precoder)) + "_" + modulation_name(cfg.modulation) + ".csv";
}

std::string ber_csv(const SweepResult& r, const Provenance& prov) {
    std::ostringstream os;
    os << provenance_header(prov);
    os << "# rng: " << Stream::kName << "\n";
    os << "# gray_labeling: label bits MSB-first, first half in-phase, second half quadrature, "
          "Gray per axis with bit 0 on the positive side; QPSK 00 -> (1+j)/sqrt(2); "
          "128QAM is a 16x8 Gray rectangle with |I|>12 columns folded to the top/bottom bands\n";
    os << "# snr: noise variance = E|s|^2/snr; DPC family gains normalized to sum k^2 = n_users, "
          "baselines scaled to tr(WW^H) = power_budget\n";
    os << "snr_db,bits,errors,ber,ci_lo,ci_hi,precoder,modulation,n_users,seed\n";
    const SweepConfig& c = r.config;
    for (const BerRecord& rec : r.records) {
        os << format_double(rec.snr_db) << ',' << rec.bits_sent << ',' << rec.bit_errors << ','
           << format_double(rec.ber) << ',' << format_double(rec.wilson_ci_95.lo) << ','
           << format_double(rec.wilson_ci_95.hi) << ',' << to_string(c.precoder) << ','
           << modulation_name(c.modulation) << ',' << c.n_users << ',' << c.seed << '\n';
    }
    return os.str();
}

json sweep_summary_json(const SweepResult& r, const Provenance& prov) {
    json records = json::array();
    for (const BerRecord& rec : r.records) {
        records.push_back(json{{"snr_db", snr_to_json(rec.snr_db)},
                               {"bits", rec.bits_sent},
                               {"errors", rec.bit_errors},
                               {"ber", rec.ber},
                               {"ci_lo", rec.wilson_ci_95.lo},
                               {"ci_hi", rec.wilson_ci_95.hi}});
    }
    return json{{"tool", "dpcperm " + std::string(kToolVersion)},
                {"config_hash", prov.config_hash},
                {"seed", prov.seed},
                {"config", to_json(r.config)},
                {"mean_transmit_power", r.mean_transmit_power},
                {"records", records}};
}

OrderSearchPlan parse_order_search_plan(const json& j) {
    check_schema(j);
    OrderSearchPlan p;
    p.n_users = get_count(require(j, "n_users"), "n_users");
    if (p.n_users == 0) field_error("n_users", "must be >= 1");
    if (j.contains("seed")) p.seed = get_as<std::uint64_t>(j.at("seed"), "seed");
    if (j.contains("modulation")) p.modulation = get_as<unsigned>(j.at("modulation"), "modulation");
    if (p.modulation != 4 && p.modulation != 16 && p.modulation != 64 && p.modulation != 128) {
        field_error("modulation", "must be one of 4, 16, 64, 128");
    }
    if (j.contains("gain_mode")) {
        const auto g = get_as<std::string>(j.at("gain_mode"), "gain_mode");
        if (g == "diag-L") p.gain_mode = OrderGainMode::DiagL;
        else if (g == "waterfill") p.gain_mode = OrderGainMode::Waterfill;
        else if (g == "identity") p.gain_mode = OrderGainMode::Identity;
        else field_error("gain_mode", "expected diag-L, waterfill or identity");
    }
    p.power_budget = j.contains("power_budget") ? get_as<double>(j.at("power_budget"), "power_budget")
                                                : static_cast<double>(p.n_users);
    if (!(p.power_budget > 0.0)) field_error("power_budget", "must be positive");
    if (j.contains("objectives")) {
        p.objectives.clear();
        for (const json& v : j.at("objectives")) {
            const auto o = parse_objective(get_as<std::string>(v, "objectives"));
            if (!o) field_error("objectives", "unknown objective " + v.dump());
            p.objectives.push_back(*o);
        }
        if (p.objectives.empty()) field_error("objectives", "must not be empty");
    }
    if (j.contains("channel_file")) p.channel_file = get_as<std::string>(j.at("channel_file"), "channel_file");
    if (j.contains("workers")) p.workers = std::max<std::size_t>(1, get_count(j.at("workers"), "workers"));
    return p;
}

json to_json(const OrderSearchPlan& p) {
    json obj = json::array();
    for (auto o : p.objectives) obj.push_back(to_string(o));
    const char* gm = p.gain_mode == OrderGainMode::DiagL ? "diag-L"
                     : p.gain_mode == OrderGainMode::Waterfill ? "waterfill"
                                                               : "identity";
    json j{{"schema_version", kConfigSchemaVersion},
           {"n_users", p.n_users},
           {"seed", p.seed},
           {"modulation", p.modulation},
           {"gain_mode", gm},
           {"power_budget", p.power_budget},
           {"objectives", obj}};
    if (!p.channel_file.empty()) j["channel_file"] = p.channel_file;
    return j;
}

CVector order_search_symbols(std::size_t n, unsigned modulation, std::uint64_t seed) {
    const Constellation c(modulation);
    Stream rng = Stream::derive(seed, {kSymbolTag, n});
    CVector s(n);
    for (cplx& z : s) z = c.points()[rng.next_u64() % c.order()];
    return s;
}

json order_search_report(const OrderSearchPlan& plan, bool verify, const Provenance& prov) {
    if (plan.n_users > kMaxSearchUsers) {
        throw Error(ErrorKind::OrderSpaceTooLarge, std::to_string(plan.n_users) + " users exceeds the limit of " +
                                                       std::to_string(kMaxSearchUsers));
    }
    const ChannelMatrix h = plan.channel_file.empty()
                                ? generate_channel(ChannelSpec{plan.n_users, plan.seed,
                                                               ChannelDistribution::ComplexGaussianUnit})
                                : load_channel(plan.channel_file);
    if (h.n() != plan.n_users) {
        throw Error(ErrorKind::InvalidArgument, "channel file is " + std::to_string(h.n()) + "x" +
                                                    std::to_string(h.n()) + " but n_users is " +
                                                    std::to_string(plan.n_users));
    }
    const CVector s = order_search_symbols(plan.n_users, plan.modulation, plan.seed);

    EffectiveGain k(RVector(plan.n_users, 1.0));
    if (plan.gain_mode == OrderGainMode::DiagL) {
        k = EffectiveGain(lq_decompose(h).diagonal_gains());
    } else if (plan.gain_mode == OrderGainMode::Waterfill) {
        k = waterfill(svd_decompose(h).sigma, PowerBudget(plan.power_budget)).gains;
    }

    SearchOptions opts;
    opts.record_evaluations = true;
    opts.workers = plan.workers;

    json objectives = json::object();
    std::vector<OrderEvaluation> table;
    bool agreement = true;
    double worst = 0.0;
    for (ObjectiveKind kind : plan.objectives) {
        OrderSearchResult d = diagonal_order_search(h, s, k, OrderObjective{kind}, opts);
        json entry{{"best_order", d.best_order.one_based()},
                   {"best_value", d.best_value},
                   {"decompositions_performed", d.decompositions_performed},
                   {"permutations_evaluated", d.permutations_evaluated}};
        if (verify) {
            const OrderSearchResult nv = naive_order_search(h, s, k, OrderObjective{kind}, opts);
            bool same = nv.best_order == d.best_order;
            for (std::size_t i = 0; i < nv.evaluations.size(); ++i) {
                const SymbolVector& a = d.evaluations[i].signal;
                const SymbolVector& b = nv.evaluations[i].signal;
                double diff = 0.0;
                for (std::size_t u = 0; u < a.size(); ++u) diff += std::norm(a[u] - b[u]);
                const double rel = std::sqrt(diff) / std::max(norm2(b), std::numeric_limits<double>::min());
                worst = std::max(worst, rel);
                same = same && rel <= 1e-8;
            }
            agreement = agreement && same;
            entry["naive_best_order"] = nv.best_order.one_based();
            entry["naive_decompositions_performed"] = nv.decompositions_performed;
        }
        objectives[std::string(to_string(kind))] = entry;
        if (table.empty()) table = std::move(d.evaluations);
    }

    json rows = json::array();
    for (const OrderEvaluation& e : table) {
        rows.push_back(json{{"order", join_order(e.order)},
                            {"ap", objective_ap(e.signal)},
                            {"papr", objective_papr(e.signal)}});
    }
    json out{{"tool", "dpcperm " + std::string(kToolVersion)},
             {"config_hash", prov.config_hash},
             {"seed", prov.seed},
             {"config", to_json(plan)},
             {"gains", k.values()},
             {"objectives", objectives},
             {"orders", rows}};
    if (verify) {
        out["verify"] = json{{"agreement", agreement}, {"max_relative_discrepancy", worst}, {"tolerance", 1e-8}};
    }
    return out;
}

std::vector<ComplexityRow> complexity_table(std::size_t n_max, std::uint64_t seed) {
    if (n_max == 0 || n_max > kComplexityMaxN) {
        throw Error(ErrorKind::InvalidArgument, "n_max must be in [1, " + std::to_string(kComplexityMaxN) + "]");
    }
    std::vector<ComplexityRow> rows;
    for (std::size_t n = 1; n <= n_max; ++n) {
        ComplexityRow row{n, complexity_model(n)};
        if (n <= kComplexityMeasuredMaxN) {
            const ChannelMatrix h = generate_channel(ChannelSpec{n, seed, ChannelDistribution::ComplexGaussianUnit});
            const CVector s = order_search_symbols(n, 4, seed);
            const EffectiveGain k(RVector(n, 1.0));
            const OrderObjective obj{ObjectiveKind::AveragePower};
            row.measured_naive = static_cast<std::int64_t>(naive_order_search(h, s, k, obj).decompositions_performed);
            row.measured_proposed =
                static_cast<std::int64_t>(diagonal_order_search(h, s, k, obj).decompositions_performed);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows, const Provenance& prov) {
    std::ostringstream os;
    os << provenance_header(prov);
    os << "# model: naive = n^3 n!, proposed = n^3 + n!; measured columns count LQ/SVD calls\n";
    os << "n,naive_model,proposed_model,ratio_db,measured_naive_decomps,measured_proposed_decomps\n";
    for (const ComplexityRow& r : rows) {
        os << r.n << ',' << format_double(r.model.naive) << ',' << format_double(r.model.proposed) << ','
           << format_double(r.model.ratio_db) << ',';
        if (r.measured_naive >= 0) os << r.measured_naive;
        os << ',';
        if (r.measured_proposed >= 0) os << r.measured_proposed;
        os << '\n';
    }
    return os.str();
}

}  // namespace dpcperm
