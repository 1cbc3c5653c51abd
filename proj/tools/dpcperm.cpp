// dpcperm: BER sweeps, precoding-order search, complexity tables and self-checks.
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 numeric error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpcperm/error.hpp"
#include "dpcperm/report.hpp"
#include "dpcperm/sweep.hpp"
#include "dpcperm/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dpcperm;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kNumericError = 3 };

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    bool verify = false;
    std::string suite;
    std::size_t n_max = 8;
    int verbosity = 0;
};

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::FormatError, "config '" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path.string() + "'");
    out << body;
    if (!out) throw Error(ErrorKind::IoError, "short write to '" + path.string() + "'");
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

// --workers, then DPC_PERM_WORKERS, then the config value.
std::size_t resolve_workers(const Options& o, std::size_t from_config) {
    if (o.workers) return std::max<std::size_t>(1, *o.workers);
    if (const char* env = std::getenv("DPC_PERM_WORKERS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) {
            throw Error(ErrorKind::InvalidArgument, "DPC_PERM_WORKERS must be a positive integer");
        }
        return static_cast<std::size_t>(v);
    }
    return std::max<std::size_t>(1, from_config);
}

int cmd_ber_sweep(const Options& o) {
    if (o.config.empty()) throw Error(ErrorKind::InvalidArgument, "ber-sweep requires --config");
    if (o.out.empty()) throw Error(ErrorKind::InvalidArgument, "ber-sweep requires --out");
    SweepPlan plan = parse_sweep_plan(read_json(o.config));
    if (o.seed) plan.base.seed = *o.seed;
    plan.base.workers = resolve_workers(o, plan.base.workers);

    const json canonical = to_json(plan);
    const Provenance prov = make_provenance(canonical, plan.base.seed);
    const fs::path dir = prepare_out(o.out);

    json files = json::array();
    json runs = json::array();
    for (PrecoderKind p : plan.precoders) {
        for (unsigned m : plan.modulations) {
            SweepConfig cfg = plan.base;
            cfg.precoder = p;
            cfg.modulation = m;
            if (o.verbosity > 0) std::cerr << "sweep " << to_string(p) << " M=" << m << '\n';
            const SweepResult r = run_ber_sweep(cfg);
            const std::string name = ber_csv_filename(cfg);
            write_file(dir / name, ber_csv(r, prov));
            files.push_back(name);
            runs.push_back(sweep_summary_json(r, prov));
        }
    }
    const json summary{{"tool", "dpcperm " + std::string(kToolVersion)},
                       {"config_hash", prov.config_hash},
                       {"seed", prov.seed},
                       {"runs", runs}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    files.push_back("summary.json");
    const json manifest{{"tool", "dpcperm " + std::string(kToolVersion)},
                        {"command", "ber-sweep"},
                        {"config_hash", prov.config_hash},
                        {"seed", prov.seed},
                        {"config", canonical},
                        {"files", files}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return kOk;
}

int cmd_order_search(const Options& o) {
    OrderSearchPlan plan = o.config.empty() ? OrderSearchPlan{} : parse_order_search_plan(read_json(o.config));
    if (o.seed) plan.seed = *o.seed;
    plan.workers = resolve_workers(o, plan.workers);
    const Provenance prov = make_provenance(to_json(plan), plan.seed);
    const json report = order_search_report(plan, o.verify, prov);
    const std::string body = report.dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << body;
    } else {
        write_file(prepare_out(o.out) / "order_search.json", body);
    }
    if (o.verify && !report.at("verify").at("agreement").get<bool>()) {
        std::cerr << "order-search: diagonal search disagrees with the naive oracle\n";
        return kVerifyFailed;
    }
    return kOk;
}

int cmd_complexity(const Options& o) {
    const std::uint64_t seed = o.seed.value_or(1);
    const json canonical{{"command", "complexity"}, {"n_max", o.n_max}, {"seed", seed}};
    const std::string csv = complexity_csv(complexity_table(o.n_max, seed), make_provenance(canonical, seed));
    if (o.out.empty()) {
        std::cout << csv;
    } else {
        write_file(prepare_out(o.out) / "complexity.csv", csv);
    }
    return kOk;
}

int cmd_verify(const Options& o) {
    const double scale = tolerance_scale_from_env().value_or(1.0);
    std::vector<std::string_view> names;
    if (o.suite.empty()) {
        names = verify_suite_names();
    } else {
        names.push_back(o.suite);
    }
    bool all = true;
    for (std::string_view n : names) {
        const SuiteResult r = run_verify_suite(n, scale);
        std::cout << r.name << ": " << (r.passed ? "PASS" : "FAIL") << " (" << r.checks << " checks, "
                  << r.failures << " failed, worst err/tol " << format_double(r.worst_ratio) << ")\n";
        if (!r.passed) std::cout << "  first failure: " << r.first_failure << '\n';
        all = all && r.passed;
    }
    return all ? kOk : kVerifyFailed;
}

int exit_for(ErrorKind k) {
    switch (k) {
        case ErrorKind::NumericallySingular:
        case ErrorKind::DegenerateGain:
        case ErrorKind::InfeasibleBlocking:
            return kNumericError;
        default:
            return kConfigError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirty-paper precoding order search and BER simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON experiment description");
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", o.seed, "Override the config seed");
        sub->add_option("--workers", o.workers, "Worker threads (fallback: DPC_PERM_WORKERS)");
        sub->add_flag("-v,--verbose", o.verbosity, "Progress on stderr");
    };

    CLI::App* sweep = app.add_subcommand("ber-sweep", "BER versus SNR for each precoder and modulation");
    common(sweep);
    CLI::App* search = app.add_subcommand("order-search", "Best precoding order under each objective");
    common(search);
    search->add_flag("--verify", o.verify, "Cross-check every order against the naive oracle");
    CLI::App* cx = app.add_subcommand("complexity", "Complexity model with measured decomposition counts");
    common(cx);
    cx->add_option("--n-max", o.n_max, "Largest n in the table")->check(CLI::Range(1, int(kComplexityMaxN)));
    CLI::App* ver = app.add_subcommand("verify", "Run the property self-check suites");
    common(ver);
    ver->add_option("--suite", o.suite, "Run a single suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (*sweep) return cmd_ber_sweep(o);
        if (*search) return cmd_order_search(o);
        if (*cx) return cmd_complexity(o);
        return cmd_verify(o);
    } catch (const Error& e) {
        std::cerr << "dpcperm: " << e.what() << '\n';
        return exit_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "dpcperm: " << e.what() << '\n';
        return kConfigError;
    }
}
