#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hytile/cli.hpp"
#include "hytile/error.hpp"
#include "hytile/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace hytile;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("hytile_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST_CASE("hypergraph files round trip") {
    TempDir dir;
    auto h = build_hypergraph(3, {2, 1, 2}, {{1, 2, 4}, {0, 2, 3}});
    write_json_file(dir / "h.json", to_json(h));
    auto back = hypergraph_from_json(read_json_file(dir / "h.json"));
    CHECK(back == h);
    auto j = to_json(h);
    CHECK(j["edges"][0] == Json{0, 2, 3});

    auto bad = Json::parse(R"({"k": 3, "part_sizes": [1, 1, 1], "edges": [[0, 0, 2]]})");
    CHECK_THROWS_AS(hypergraph_from_json(bad), Error);
    auto extra = Json::parse(R"({"k": 3, "part_sizes": [1, 1, 1], "edges": [], "colour": 1})");
    CHECK_THROWS_AS(hypergraph_from_json(extra), Error);
    CHECK_THROWS_AS(read_json_file(dir / "missing.json"), Error);
}

TEST_CASE("construction meta round trips and still verifies") {
    auto c = gen_construction_a(3, 8, 2, 4);
    auto meta = meta_from_json(Json::parse(dump(to_json(c.meta))));
    CHECK(verify_construction_invariant(c.host, meta).pass);
    auto b = gen_construction_b(3, 8, 2, 1, 0.7, 4);
    auto meta_b = meta_from_json(Json::parse(dump(to_json(b.meta))));
    CHECK(verify_construction_invariant(b.host, meta_b).pass);
}

TEST_CASE("params file keeps defaults and rejects unknown keys") {
    auto p = params_from_json(Json::parse(R"({"a": 6, "gamma_prime": 0.3})"));
    CHECK(p.a == 6u);
    CHECK(p.gamma_prime == 0.3);
    CHECK(p.beta == AbsorptionParams{}.beta);
    CHECK_THROWS_AS(params_from_json(Json::parse(R"({"gama": 1})")), Error);
}

TEST_CASE("factor exit codes") {
    TempDir dir;
    REQUIRE(run({"gen", "--kind", "complete", "--n", "3", "--out", dir / "c.json"}).code == 0);
    auto found = run({"factor", "--host", dir / "c.json", "--m", "1", "--witness", dir / "w.json"});
    CHECK(found.code == 0);
    auto witness = read_json_file(dir / "w.json");
    CHECK(witness["embeddings"].size() == 3);

    REQUIRE(run({"gen", "--kind", "consA", "--n", "6", "--m", "2", "--seed", "1", "--out", dir / "a.json"}).code == 0);
    CHECK(fs::exists(dir / "a.json.meta.json"));
    auto none = run({"factor", "--host", dir / "a.json", "--m", "2"});
    CHECK(none.code == 1);
    CHECK(Json::parse(none.out)["factor"]["verdict"] == "none");

    auto unknown = run({"factor", "--host", dir / "a.json", "--m", "2", "--budget", "1"});
    CHECK(unknown.code == 2);
}

TEST_CASE("usage errors exit 64") {
    CHECK(run({}).code == 64);
    CHECK(run({"factor"}).code == 64);
    CHECK(run({"gen", "--kind", "petersen", "--n", "3", "--out", "x"}).code == 64);
    CHECK(run({"factor", "--host", "/nonexistent/h.json", "--m", "1"}).code == 64);
    CHECK(run({"sweep", "--kind", "iid", "--n", "6", "--p", "0.9:0.3:0.1", "--seed", "1"}).code == 64);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("missing seed is generated and reported") {
    TempDir dir;
    auto r = run({"gen", "--kind", "iid", "--n", "3", "--out", dir / "h.json"});
    CHECK(r.code == 0);
    CHECK(r.err.rfind("seed: ", 0) == 0);
    auto seed = std::stoull(r.err.substr(6));
    CHECK(Json::parse(r.out)["seed"] == seed);
    auto again = run({"gen", "--kind", "iid", "--n", "3", "--seed", std::to_string(seed), "--out", dir / "g.json"});
    CHECK(read_json_file(dir / "g.json") == read_json_file(dir / "h.json"));
}

TEST_CASE("sweep emits one row per grid cell in grid order") {
    auto r = run({"sweep", "--kind", "iid", "--p", "0.3:0.9:0.1", "--n", "24", "--seeds", "10",
                  "--analysis", "greedy-leftover", "--seed", "1", "--workers", "4"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 71);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "kind,k,n,m,p,q,seed,analysis,verdict,leftover,delta_prime,min_slack,runtime_ms\r");
    std::vector<std::string> ps;
    while (std::getline(lines, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 12);
        ps.push_back(line.substr(0, line.find(",,", 0) + 6));
    }
    CHECK(std::is_sorted(ps.begin(), ps.end()));

    auto serial = run({"sweep", "--kind", "iid", "--p", "0.3:0.9:0.1", "--n", "24", "--seeds", "10",
                       "--analysis", "greedy-leftover", "--seed", "1"});
    auto strip = [](const std::string& csv) {
        std::string out;
        std::istringstream in(csv);
        std::string l;
        while (std::getline(in, l))
            out += l.substr(0, l.rfind(',')) + "\n";
        return out;
    };
    CHECK(strip(serial.out) == strip(r.out));

    auto cons = run({"sweep", "--kind", "consA", "--n", "6,8", "--seeds", "3", "--analysis", "exact-factor",
                     "--seed", "2"});
    CHECK(count_lines(cons.out) == 7);
    CHECK(cons.out.find("found") == std::string::npos);
}

TEST_CASE("reports are byte-identical across runs and worker counts") {
    TempDir dir;
    REQUIRE(run({"gen", "--kind", "iid", "--n", "30", "--p", "0.5", "--seed", "11", "--out", dir / "h.json"}).code == 0);
    auto one = run({"analyze", "--host", dir / "h.json", "--p", "0.5", "--mu", "0.05", "--trials", "300",
                    "--seed", "7", "--workers", "1"});
    auto four = run({"analyze", "--host", dir / "h.json", "--p", "0.5", "--mu", "0.05", "--trials", "300",
                     "--seed", "7", "--workers", "4"});
    CHECK(one.code == 0);
    CHECK(one.out == four.out);

    auto p1 = run({"regpart", "--host", dir / "h.json", "--eps", "0.25", "--t0", "3", "--seed", "3", "--out",
                   dir / "p1.json", "--workers", "1"});
    auto p4 = run({"regpart", "--host", dir / "h.json", "--eps", "0.25", "--t0", "3", "--seed", "3", "--out",
                   dir / "p4.json", "--workers", "4"});
    CHECK(read_json_file(dir / "p1.json") == read_json_file(dir / "p4.json"));

    auto c1 = run({"cluster", "--host", dir / "h.json", "--partition", dir / "p1.json", "--d", "0.25", "--seed",
                   "5", "--out", dir / "r1.json"});
    auto c2 = run({"cluster", "--host", dir / "h.json", "--partition", dir / "p1.json", "--d", "0.25", "--seed",
                   "5", "--out", dir / "r1.json", "--workers", "4"});
    CHECK(c1.code == 0);
    CHECK(c1.out == c2.out);
    CHECK(fs::exists(dir / "r1.json.provenance.json"));
}

TEST_CASE("absorb runs the pipeline") {
    TempDir dir;
    REQUIRE(run({"gen", "--kind", "complete", "--n", "6", "--out", dir / "c.json"}).code == 0);
    std::ofstream(dir / "params.json") << R"({"a": 6})";
    auto r = run({"absorb", "--host", dir / "c.json", "--m", "2", "--params", dir / "params.json", "--seed", "1"});
    CHECK(r.code == 0);
    auto report = Json::parse(r.out);
    CHECK(report["pipeline"]["verdict"] == "found");
    CHECK(report["params"]["absorption"]["a"] == 6);
}
