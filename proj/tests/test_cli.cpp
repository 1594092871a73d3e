#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "json.hpp"
#include "patrol/cli.hpp"
#include "patrol/strategy.hpp"

using namespace patrol;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "patrolsynth");
    std::ostringstream out, err;
    const int code = run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("patrol_cli_" + std::to_string(testing_counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
    static inline int testing_counter = 0;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace


TEST_SUITE("cli") {

TEST_CASE("generate then eval") {
    TempDir dir;
    const std::string g = dir / "g.json";
    REQUIRE(run({"generate", "--family", "office", "--floors", "1", "-o", g}).code == 0);
    const PatrollingGraph graph = parse_graph(slurp(g));
    CHECK(graph.n_targets() == 10);
    const StrategyIndex idx = build_index(graph, 1);
    write(dir / "s.json", strategy_to_json(graph, idx, uniform_strategy(idx)).dump());
    const Result r = run({"eval", g, dir / "s.json"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.contains("rval"));
    CHECK(doc["stats"].contains("heap_peak"));
}

TEST_CASE("solve is byte-deterministic") {
    TempDir dir;
    const std::string g = dir / "g.json";
    REQUIRE(run({"generate", "--family", "grid", "--n", "4", "--k", "5", "--seed", "3", "-o", g}).code == 0);
    const Result a = run({"solve", g, "--mem", "1", "--restarts", "10", "--seed", "7", "--manifest",
                          dir / "m.json"});
    const Result b = run({"solve", g, "--mem", "1", "--restarts", "10", "--seed", "7", "--manifest",
                          dir / "m2.json", "--threads", "2"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto doc = nlohmann::json::parse(a.out);
    CHECK(doc["all_values"].size() == 10);
    CHECK_FALSE(doc.contains("wall_time_s"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "m.json"));
    CHECK(manifest["seed"] == 7);
    CHECK(manifest.contains("graph_hash"));
}

TEST_CASE("check passes on a small instance") {
    TempDir dir;
    const auto inst = testing::random_small_instance(17);
    write(dir / "g.json", serialize_graph(inst.graph));
    write(dir / "s.json", strategy_to_json(inst.graph, inst.index, inst.strategy).dump());
    const Result r = run({"check", dir / "g.json", dir / "s.json"});
    CHECK(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["max_value_error"].get<double>() <= 1e-9);
}

TEST_CASE("bench writes a table") {
    const Result r = run({"bench", "--family", "grid", "--n", "4", "--k", "4", "--m", "1,2", "--restarts", "2",
                          "--max-iters", "20"});
    REQUIRE(r.code == 0);
    std::istringstream lines(r.out);
    std::string header, row;
    std::getline(lines, header);
    CHECK(header == "family,params,m,restarts,best,close_pct,iters_avg,time_s_avg");
    int rows = 0;
    while (std::getline(lines, row))
        if (!row.empty()) ++rows;
    CHECK(rows == 2);
}

TEST_CASE("exit codes") {
    CHECK(run({}).code == exit_code::usage);
    CHECK(run({"solve"}).code == exit_code::usage);
    TempDir dir;
    write(dir / "bad.json", R"({"vertices":[{"id":"a"}],"edges":[]})");
    const Result r = run({"solve", dir / "bad.json"});
    CHECK(r.code == exit_code::validation);
    CHECK(r.err.find("no targets") != std::string::npos);
    CHECK(run({"solve", dir / "missing.json"}).code == exit_code::usage);
}

}
