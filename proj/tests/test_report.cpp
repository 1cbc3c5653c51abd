#include <doctest.h>

#include "dpcperm/error.hpp"
#include "dpcperm/report.hpp"
#include "dpcperm/verify.hpp"

using namespace dpcperm;
using nlohmann::json;

namespace {

json minimal_sweep() {
    return json{{"schema_version", 1},   {"n_users", 3},       {"modulation", 4},
                {"precoder", "dpc-linear"}, {"snr_grid_db", {0, 10, "inf"}}, {"trials_per_point", 20}};
}

std::string parse_error(const json& j) {
    try {
        (void)parse_sweep_plan(j);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidArgument);
        return e.what();
    }
    FAIL("expected parse_sweep_plan to throw");
    return "";
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < s.size()) {
        const std::size_t end = s.find('\n', start);
        out.push_back(s.substr(start, end - start));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return out;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("sweep config parsing: defaults, lists and infinity") {
    const SweepPlan p = parse_sweep_plan(minimal_sweep());
    CHECK(p.base.n_users == 3);
    CHECK(p.base.power_budget == 3.0);
    CHECK(p.base.seed == 1);
    CHECK(p.precoders == std::vector<PrecoderKind>{PrecoderKind::DpcLinear});
    CHECK(p.modulations == std::vector<unsigned>{4});
    REQUIRE(p.base.snr_grid_db.size() == 3);
    CHECK(std::isinf(p.base.snr_grid_db[2]));

    json j = minimal_sweep();
    j.erase("precoder");
    j["precoders"] = {"zf", "mmse"};
    j.erase("modulation");
    j["modulations"] = {4, 16};
    j["channel_mode"] = "fixed-channel";
    j["gain_mode"] = "waterfill";
    j["seed"] = 99;
    const SweepPlan q = parse_sweep_plan(j);
    CHECK(q.precoders.size() == 2);
    CHECK(q.modulations == std::vector<unsigned>{4, 16});
    CHECK(q.base.channel_mode == ChannelMode::FixedChannel);
    CHECK(q.base.gain_mode == GainMode::Waterfill);
    CHECK(q.base.seed == 99);
    // Canonical form round-trips.
    CHECK(to_json(parse_sweep_plan(to_json(q))) == to_json(q));
}

TEST_CASE("sweep config errors name the field") {
    for (const char* field : {"schema_version", "n_users", "snr_grid_db", "trials_per_point"}) {
        json j = minimal_sweep();
        j.erase(field);
        CHECK(parse_error(j).find(field) != std::string::npos);
    }
    json j = minimal_sweep();
    j.erase("precoder");
    CHECK(parse_error(j).find("precoder") != std::string::npos);
    j = minimal_sweep();
    j.erase("modulation");
    CHECK(parse_error(j).find("modulation") != std::string::npos);
    j = minimal_sweep();
    j["schema_version"] = 2;
    CHECK(parse_error(j).find("schema_version") != std::string::npos);
    j = minimal_sweep();
    j["precoder"] = "vector-perturbation";
    CHECK(parse_error(j).find("precoder") != std::string::npos);
    j = minimal_sweep();
    j["n_users"] = "ten";
    CHECK(parse_error(j).find("n_users") != std::string::npos);
    j = minimal_sweep();
    j["snr_grid_db"] = {1, "-inf"};
    CHECK(parse_error(j).find("snr_grid_db") != std::string::npos);
    j = minimal_sweep();
    j["modulation"] = 32;
    CHECK(parse_error(j).find("modulation") != std::string::npos);
}

TEST_CASE("BER CSV: provenance header, column header, one row per SNR point") {
    const SweepPlan p = parse_sweep_plan(minimal_sweep());
    SweepConfig cfg = p.base;
    cfg.precoder = p.precoders[0];
    cfg.modulation = p.modulations[0];
    const Provenance prov = make_provenance(to_json(p), cfg.seed);
    const std::string csv = ber_csv(run_ber_sweep(cfg), prov);
    const auto ls = lines(csv);
    std::size_t header = 0;
    while (header < ls.size() && ls[header].rfind("# ", 0) == 0) ++header;
    REQUIRE(header < ls.size());
    CHECK(ls[0].find("dpcperm 1.0.0") != std::string::npos);
    CHECK(csv.find("# config_hash: " + prov.config_hash) != std::string::npos);
    CHECK(csv.find("# seed: 1") != std::string::npos);
    CHECK(csv.find("gray_labeling") != std::string::npos);
    CHECK(ls[header] == "snr_db,bits,errors,ber,ci_lo,ci_hi,precoder,modulation,n_users,seed");
    CHECK(ls.size() - header - 1 == 3);
    CHECK(ls.back().rfind("inf,120,0,0,", 0) == 0);
    CHECK(ls.back().find(",dpc-linear,QPSK,3,1") != std::string::npos);
    CHECK(ber_csv_filename(cfg) == "ber_dpc-linear_QPSK.csv");
    CHECK(csv == ber_csv(run_ber_sweep(cfg), prov));
}

TEST_CASE("config hash tracks the canonical config") {
    const json a = to_json(parse_sweep_plan(minimal_sweep()));
    json other = minimal_sweep();
    other["seed"] = 2;
    CHECK(make_provenance(a, 1).config_hash == make_provenance(a, 1).config_hash);
    CHECK(make_provenance(a, 1).config_hash != make_provenance(to_json(parse_sweep_plan(other)), 2).config_hash);
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("order-search report: 24-row table, both objectives, oracle agreement") {
    OrderSearchPlan plan;  // n = 4, 16-QAM, AP and PAPR
    const json r = order_search_report(plan, true, make_provenance(to_json(plan), plan.seed));
    CHECK(r.at("orders").size() == 24);
    CHECK(r.at("orders")[0].at("order") == "1-2-3-4");
    CHECK(r.at("objectives").contains("average-power"));
    CHECK(r.at("objectives").contains("papr"));
    CHECK(r.at("objectives").at("papr").at("decompositions_performed") == 1);
    CHECK(r.at("objectives").at("papr").at("naive_decompositions_performed") == 24);
    CHECK(r.at("objectives").at("papr").at("permutations_evaluated") == 24);
    CHECK(r.at("verify").at("agreement") == true);
    const json again = order_search_report(plan, true, make_provenance(to_json(plan), plan.seed));
    CHECK(r.dump() == again.dump());

    for (std::size_t n = 1; n <= 5; ++n) {
        for (OrderGainMode g : {OrderGainMode::DiagL, OrderGainMode::Waterfill, OrderGainMode::Identity}) {
            OrderSearchPlan p;
            p.n_users = n;
            p.gain_mode = g;
            p.power_budget = static_cast<double>(n);
            p.objectives = {ObjectiveKind::AveragePower, ObjectiveKind::MinPower};
            const json rep = order_search_report(p, true, {});
            CHECK(rep.at("verify").at("agreement") == true);
        }
    }
}

TEST_CASE("order-search plan parsing") {
    const OrderSearchPlan p = parse_order_search_plan(json{{"schema_version", 1},
                                                          {"n_users", 5},
                                                          {"gain_mode", "waterfill"},
                                                          {"objectives", {"papr", "min-power"}}});
    CHECK(p.n_users == 5);
    CHECK(p.power_budget == 5.0);
    CHECK(p.gain_mode == OrderGainMode::Waterfill);
    CHECK(p.objectives == std::vector<ObjectiveKind>{ObjectiveKind::Papr, ObjectiveKind::MinPower});
    CHECK_THROWS_AS(parse_order_search_plan(json{{"schema_version", 1}}), Error);
    CHECK_THROWS_AS(parse_order_search_plan(json{{"schema_version", 1}, {"n_users", 3}, {"objectives", {"x"}}}), Error);

    OrderSearchPlan big;
    big.n_users = 9;
    try {
        (void)order_search_report(big, false, {});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::OrderSpaceTooLarge);
    }
}

TEST_CASE("complexity table") {
    const auto rows = complexity_table(8, 1);
    REQUIRE(rows.size() == 8);
    for (const ComplexityRow& r : rows) {
        if (r.n <= 7) {
            std::int64_t f = 1;
            for (std::size_t i = 2; i <= r.n; ++i) f *= static_cast<std::int64_t>(i);
            CHECK(r.measured_naive == f);
            CHECK(r.measured_proposed == 1);
        } else {
            CHECK(r.measured_naive == -1);
        }
    }
    const std::string csv = complexity_csv(rows, {"abc", 1});
    CHECK(csv.find("n,naive_model,proposed_model,ratio_db,measured_naive_decomps,measured_proposed_decomps\n") !=
          std::string::npos);
    CHECK(csv.find("\n5,15000,245,17.869251746911488,120,1\n") != std::string::npos);
    CHECK(csv.find("\n8,20643840,40832,") != std::string::npos);
    CHECK_THROWS_AS(complexity_table(13, 1), Error);
    CHECK_THROWS_AS(complexity_table(0, 1), Error);
}

TEST_CASE("verify suites pass and fail on a zero tolerance scale") {
    for (std::string_view s : verify_suite_names()) {
        CAPTURE(s);
        const SuiteResult r = run_verify_suite(s);
        CHECK(r.passed);
        CHECK(r.checks > 0);
    }
    for (std::string_view s : {"decompositions", "lemma1", "theorem1", "theorem2"}) {
        CHECK_FALSE(run_verify_suite(s, 0.0).passed);
    }
    CHECK_THROWS_AS(run_verify_suite("nope"), Error);
}

}  // TEST_SUITE
