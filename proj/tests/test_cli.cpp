#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bsim/cli.hpp"
#include "bsim/generator.hpp"

using namespace bsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("bsim-cli-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const char* sub) const { return (path / sub).string(); }
};

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// a tiny ready-to-query catalog used by several cases
void make_catalog(const TempDir& dir) {
    REQUIRE(run_cli({"generate", "--out", dir.str("data"), "--units", "2000", "--metrics", "1",
                     "--days", "3", "--strategies", "2", "--seed", "5"})
                .code == 0);
    REQUIRE(run_cli({"init", "--root", dir.str("cat"), "--segments", "4", "--buckets", "32",
                     "--dimension", "client-type=categorical", "--dimension",
                     "client-version=numeric"})
                .code == 0);
    REQUIRE(run_cli({"ingest", "--root", dir.str("cat"), "--kind", "expose", "--input",
                     dir.str("data/expose.tsv")})
                .code == 0);
    REQUIRE(run_cli({"ingest", "--root", dir.str("cat"), "--kind", "metric", "--input",
                     dir.str("data/metric.tsv")})
                .code == 0);
    REQUIRE(run_cli({"ingest", "--root", dir.str("cat"), "--kind", "dimension", "--input",
                     dir.str("data/dimension.tsv")})
                .code == 0);
}

} // namespace

TEST_CASE("help exists for every command; unknown flags fail") {
    Result top = run_cli({"--help"});
    CHECK(top.code == 0);
    for (const char* cmd : {"init", "ingest", "scorecard", "precompute", "deepdive", "generate",
                            "bench", "inspect"}) {
        CHECK(top.out.find(cmd) != std::string::npos);
        Result sub = run_cli({cmd, "--help"});
        CHECK(sub.code == 0);
        CHECK(sub.out.find("--") != std::string::npos);
    }
    CHECK(run_cli({"generate", "--seed", "1", "--out", "x", "--bogus-flag"}).code == 2);
    CHECK(run_cli({"not-a-command"}).code == 2);
}

TEST_CASE("generate is deterministic and honors cap") {
    TempDir dir;
    auto args = [&](const char* out) {
        return std::vector<std::string>{"generate", "--out",  dir.str(out), "--units", "500",
                                        "--metrics", "1",    "--days",     "2",       "--seed",
                                        "99",       "--cap", "1"};
    };
    REQUIRE(run_cli(args("a")).code == 0);
    REQUIRE(run_cli(args("b")).code == 0);
    CHECK(slurp(dir.path / "a" / "expose.tsv") == slurp(dir.path / "b" / "expose.tsv"));
    CHECK(slurp(dir.path / "a" / "metric.tsv") == slurp(dir.path / "b" / "metric.tsv"));

    // cap=1 makes a binary metric
    std::istringstream metric(slurp(dir.path / "a" / "metric.tsv"));
    std::string line;
    while (std::getline(metric, line)) {
        REQUIRE(line.substr(line.rfind('\t') + 1) == "1");
    }

    CHECK(run_cli({"generate", "--out", dir.str("c"), "--seed", "1", "--alpha", "-1"}).code == 1);
}

TEST_CASE("generated Pareto values match the analytic CDF") {
    std::mt19937_64 rng(321);
    int le20 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        if (gen::pareto_value(rng, 1.16, 100) <= 20) ++le20;
    // P(v <= 20) = 1 - 20^-1.16 ~= 0.969
    CHECK(double(le20) / n > 0.6);
    CHECK(double(le20) / n == doctest::Approx(1.0 - std::pow(20.0, -1.16)).epsilon(0.01));
}

TEST_CASE("ingest then scorecard round trip") {
    TempDir dir;
    make_catalog(dir);

    SUBCASE("A/A on the same strategy gives p = 1") {
        Result r = run_cli({"scorecard", "--root", dir.str("cat"), "--strategy", "s0", "--control",
                            "s0", "--metrics", "m0", "--date", "20240102"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("\t1\t-\n") != std::string::npos); // p column
    }
    SUBCASE("ingested values can be read back through a scorecard") {
        Result r = run_cli({"scorecard", "--root", dir.str("cat"), "--strategy", "s1", "--control",
                            "s0", "--metrics", "m0", "--date", "20240101", "--to", "20240103"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("m0\tsum\t20240101-20240103") != std::string::npos);
    }
    SUBCASE("deep dive with a predicate") {
        Result r = run_cli({"deepdive", "--root", dir.str("cat"), "--strategy", "s1", "--control",
                            "s0", "--metrics", "m0", "--date", "20240103", "--where",
                            "client-type = 'ios' AND client-version > 134", "--daily"});
        REQUIRE(r.code == 0);
    }
    SUBCASE("missing partitions are listed with nonzero exit") {
        Result r = run_cli({"scorecard", "--root", dir.str("cat"), "--strategy", "s1", "--control",
                            "s0", "--metrics", "m0,mx", "--date", "20240103", "--to", "20240104"});
        CHECK(r.code == 1);
        CHECK(r.err.find("metric/m0@20240104") != std::string::npos);
        CHECK(r.err.find("metric/mx@20240103") != std::string::npos);
    }
    SUBCASE("inspect prints slice statistics") {
        Result r = run_cli({"inspect", "--root", dir.str("cat"), "--kind", "metric", "--key",
                            "m0@20240102"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("slices") != std::string::npos);
        Result file = run_cli(
            {"inspect", "--path", dir.str("cat/metric/m0@20240102/seg0001.bsi")});
        CHECK(file.code == 0);
    }
    SUBCASE("config file supplies defaults") {
        std::ofstream cfg(dir.path / "cfg.tsv");
        cfg << "root\t" << dir.str("cat") << "\n";
        cfg.close();
        Result r = run_cli({"scorecard", "--config", dir.str("cfg.tsv"), "--strategy", "s1",
                            "--control", "s0", "--metrics", "m0", "--date", "20240102"});
        CHECK(r.code == 0);
    }
}

TEST_CASE("ingest rejects bad input with line numbers") {
    TempDir dir;
    REQUIRE(run_cli({"init", "--root", dir.str("cat"), "--segments", "2", "--buckets", "2"})
                .code == 0);

    std::ofstream bad(dir.path / "bad.tsv");
    bad << "20240101\tm0\tu1\t3\n20240101\tm0\tu1\t4\n";
    bad.close();
    Result dup = run_cli({"ingest", "--root", dir.str("cat"), "--kind", "metric", "--input",
                          dir.str("bad.tsv")});
    CHECK(dup.code == 1);
    CHECK(dup.err.find("bad.tsv:2") != std::string::npos);

    std::ofstream cols(dir.path / "cols.tsv");
    cols << "20240101\tm0\tu1\n";
    cols.close();
    Result schema = run_cli({"ingest", "--root", dir.str("cat"), "--kind", "metric", "--input",
                             dir.str("cols.tsv")});
    CHECK(schema.code == 1);
    CHECK(schema.err.find("cols.tsv:1") != std::string::npos);

    std::ofstream empty(dir.path / "empty.tsv");
    empty.close();
    Result e = run_cli({"ingest", "--root", dir.str("cat"), "--kind", "metric", "--input",
                        dir.str("empty.tsv")});
    CHECK(e.code == 0);
    CHECK(e.out.find("warning") != std::string::npos);
}

TEST_CASE("bench scenarios run at a small scale and agree across formats") {
    TempDir dir;
    for (const char* scenario : {"storage", "compute", "encode", "decode"}) {
        Result r = run_cli({"bench", "--scenario", scenario, "--units", "20000", "--runs", "3",
                            "--out", dir.str("bench.tsv")});
        REQUIRE(r.code == 0);
        INFO(scenario, ": ", r.out);
        CHECK(r.out.find("ANSWERS DIFFER") == std::string::npos);
        CHECK(slurp(dir.path / "bench.tsv").find("scenario") == 0);
    }
    Result r = run_cli({"bench", "--scenario", "scorecard", "--units", "2000", "--runs", "3"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("ANSWERS DIFFER") == std::string::npos);
}
