// End-to-end checks of the dpcperm binary: exit codes, files, determinism.
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dpcperm/channel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("dpcperm_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

Run run(const std::string& args, const std::string& env = "") {
    const fs::path err = fs::temp_directory_path() / ("dpcperm_cli_stderr_" + std::to_string(::getpid()));
    const std::string cmd = env + " \"" DPCPERM_CLI_PATH "\" " + args + " 2>\"" + err.string() + "\"";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    fs::remove(err);
    return r;
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

json minimal_sweep() {
    return json{{"schema_version", 1},    {"n_users", 4},
                {"modulation", 4},       {"precoders", {"dpc-conventional", "zf"}},
                {"snr_grid_db", {0, 5, 10}}, {"trials_per_point", 50}};
}

std::size_t data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::size_t rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) continue;
        if (!header) {
            header = true;
            continue;
        }
        if (!line.empty()) ++rows;
    }
    return rows;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("ber-sweep: one CSV per precoder, one row per SNR point, manifest") {
    const fs::path dir = scratch("sweep");
    const fs::path cfg = write_config(dir, minimal_sweep());
    const Run r = run("ber-sweep --config \"" + cfg.string() + "\" --out \"" + (dir / "a").string() + "\"");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(data_rows(slurp(dir / "a" / "ber_dpc-conventional_QPSK.csv")) == 3);
    CHECK(data_rows(slurp(dir / "a" / "ber_zf_QPSK.csv")) == 3);
    const json manifest = json::parse(slurp(dir / "a" / "manifest.json"));
    CHECK(manifest.contains("config_hash"));
    CHECK(fs::exists(dir / "a" / "summary.json"));
}

TEST_CASE("ber-sweep: same config and seed give byte-identical files, any worker count") {
    const fs::path dir = scratch("determinism");
    const fs::path cfg = write_config(dir, minimal_sweep());
    const std::string base = "ber-sweep --config \"" + cfg.string() + "\" --seed 7 --out ";
    REQUIRE(run(base + "\"" + (dir / "a").string() + "\" --workers 1").code == 0);
    REQUIRE(run(base + "\"" + (dir / "b").string() + "\" --workers 4").code == 0);
    REQUIRE(run(base + "\"" + (dir / "c").string() + "\"", "DPC_PERM_WORKERS=3").code == 0);
    for (const char* f : {"ber_dpc-conventional_QPSK.csv", "ber_zf_QPSK.csv", "summary.json", "manifest.json"}) {
        CAPTURE(f);
        const std::string a = slurp(dir / "a" / f);
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / f));
        CHECK(a == slurp(dir / "c" / f));
    }
    CHECK(slurp(dir / "a" / "ber_zf_QPSK.csv").find("# seed: 7") != std::string::npos);
}

TEST_CASE("config errors exit 2 and name the field") {
    const fs::path dir = scratch("config_error");
    json j = minimal_sweep();
    j.erase("snr_grid_db");
    const fs::path cfg = write_config(dir, j);
    const Run r = run("ber-sweep --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"");
    CHECK(r.code == 2);
    CHECK(r.err.find("snr_grid_db") != std::string::npos);

    CHECK(run("ber-sweep --config \"" + (dir / "missing.json").string() + "\"").code == 2);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK(run("ber-sweep --config \"" + (dir / "bad.json").string() + "\"").code == 2);
    CHECK(run("no-such-command").code == 2);
    CHECK(run("complexity --n-max 13").code == 2);
    CHECK(run("verify --suite nope").code == 2);
}

TEST_CASE("order-search: 24-row table, verify agreement, n = 9 rejected") {
    const fs::path dir = scratch("order");
    const fs::path cfg = write_config(dir, json{{"schema_version", 1},
                                                {"n_users", 4},
                                                {"modulation", 16},
                                                {"objectives", {"average-power", "papr"}}});
    const Run r = run("order-search --verify --config \"" + cfg.string() + "\"");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json rep = json::parse(r.out);
    CHECK(rep.at("orders").size() == 24);
    CHECK(rep.at("verify").at("agreement") == true);

    REQUIRE(run("order-search --config \"" + cfg.string() + "\" --out \"" + (dir / "o").string() + "\"").code == 0);
    CHECK(json::parse(slurp(dir / "o" / "order_search.json")).at("orders").size() == 24);

    const fs::path big = write_config(dir, json{{"schema_version", 1}, {"n_users", 9}});
    const Run rb = run("order-search --config \"" + big.string() + "\"");
    CHECK(rb.code == 2);
    CHECK(rb.err.find("OrderSpaceTooLarge") != std::string::npos);
}

TEST_CASE("numeric failure exits 3") {
    const fs::path dir = scratch("singular");
    dpcperm::CMatrix m(3, 3);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;  // third user has no channel at all
    dpcperm::save_channel(dpcperm::ChannelMatrix(m), dir / "h.dpcm");
    const fs::path cfg = write_config(
        dir, json{{"schema_version", 1}, {"n_users", 3}, {"channel_file", (dir / "h.dpcm").string()}});
    const Run r = run("order-search --config \"" + cfg.string() + "\"");
    CHECK(r.code == 3);
    CHECK(!r.err.empty());
}

TEST_CASE("complexity CSV") {
    const Run r = run("complexity --n-max 6");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("\n5,15000,245,17.869251746911488,120,1\n") != std::string::npos);
    CHECK(r.out.find("\n6,") != std::string::npos);
    CHECK(r.out.find("\n7,") == std::string::npos);
}

TEST_CASE("verify: exit 0 on a clean build, 1 under a corrupted tolerance, single suite") {
    const Run all = run("verify");
    CHECK(all.code == 0);
    CHECK(all.out.find("theorem1: PASS") != std::string::npos);
    CHECK(all.out.find("lemma1: PASS") != std::string::npos);

    const Run broken = run("verify", "DPC_PERM_VERIFY_TOLERANCE_SCALE=0");
    CHECK(broken.code == 1);
    CHECK(broken.out.find("FAIL") != std::string::npos);

    const Run one = run("verify --suite theorem2");
    CHECK(one.code == 0);
    CHECK(one.out.find("theorem2: PASS") != std::string::npos);
    CHECK(one.out.find("theorem1") == std::string::npos);
    CHECK(one.out.find("lemma1") == std::string::npos);
}

}  // TEST_SUITE
