#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualmac/cli.hpp"

using namespace dualmac;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dualmac_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    if (stdout_text) *stdout_text = out.str();
    return code;
}

} // namespace

TEST_CASE("gen round-trips every generator") {
    TempDir dir;
    for (const char* gen : {"line", "star_bridge", "double_line", "grey_zone"}) {
        std::string cfg = dir.file(std::string(gen) + ".json");
        std::string extra;
        if (std::string(gen) == "grey_zone")
            extra = ",\"c\":1.5,\"side\":4.0,\"p_link\":0.5,\"seed\":7";
        write(cfg, "{\"graph\":{\"generator\":\"" + std::string(gen) +
                       "\",\"n\":12" + extra + "}}");
        std::string out_path = dir.file(std::string(gen) + "_graph.json");
        CHECK(cli({"gen", "--config", cfg, "--out", out_path}) == exit_ok);
        auto g = DualGraph::from_json(slurp(out_path));
        auto again = DualGraph::from_json(g.to_json());
        CHECK(g == again);
    }
}

TEST_CASE("gen is deterministic for seeded generators") {
    TempDir dir;
    std::string cfg = dir.file("cfg.json");
    write(cfg,
          R"({"graph":{"generator":"grey_zone","n":30,"c":1.5,"side":4.0,"p_link":0.5,"seed":9}})");
    std::string a = dir.file("a.json"), b = dir.file("b.json");
    CHECK(cli({"gen", "--config", cfg, "--out", a}) == exit_ok);
    CHECK(cli({"gen", "--config", cfg, "--out", b}) == exit_ok);
    CHECK(slurp(a) == slurp(b));
}

TEST_CASE("run: bmmb writes a trace and a metrics row") {
    TempDir dir;
    std::string cfg = dir.file("run.json");
    std::string trace = dir.file("trace.jsonl");
    std::string csv = dir.file("metrics.csv");
    write(cfg, R"({
      "model": "standard", "algorithm": "bmmb",
      "graph": {"generator": "line", "n": 8},
      "scheduler": "eager", "f_ack": "8", "f_prog": "1",
      "arrivals": {"mode": "prefix_singletons", "k": 2},
      "checks": {"checker": true, "arbitrary_bound": true},
      "trace_out": ")" + trace + R"(", "metrics_out": ")" + csv + R"("
    })");
    std::string out;
    CHECK(cli({"run", "--config", cfg}, &out) == exit_ok);
    CHECK(out.find("checker_violations=0") != std::string::npos);

    Trace t = Trace::from_jsonl(slurp(trace));
    CHECK_FALSE(t.events.empty());

    std::string rows = slurp(csv);
    CHECK(rows.find("n,D,components,k") != std::string::npos);
    CHECK(rows.find("bmmb,eager") != std::string::npos);

    // Determinism: rerunning reproduces the identical trace file.
    std::string before = slurp(trace);
    CHECK(cli({"run", "--config", cfg}) == exit_ok);
    CHECK(slurp(trace) == before);
}

TEST_CASE("run rejects fmmb on the standard model before executing") {
    TempDir dir;
    std::string cfg = dir.file("bad.json");
    write(cfg, R"({
      "model": "standard", "algorithm": "fmmb",
      "graph": {"generator": "line", "n": 4}
    })");
    CHECK(cli({"run", "--config", cfg}) == exit_usage);
}

TEST_CASE("run: fmmb fills the rounds column") {
    TempDir dir;
    std::string cfg = dir.file("fmmb.json");
    std::string csv = dir.file("metrics.csv");
    write(cfg, R"({
      "model": "enhanced", "algorithm": "fmmb",
      "graph": {"generator": "grey_zone", "n": 30, "c": 1.5, "side": 4.0,
                 "p_link": 0.5, "seed": 3, "connected": true},
      "adversary": "spiteful", "f_ack": "8", "f_prog": "1",
      "arrivals": {"mode": "random_singletons", "k": 3},
      "fmmb": {"c": 1.5},
      "metrics_out": ")" + csv + R"("
    })");
    std::string out;
    int code = cli({"run", "--config", cfg}, &out);
    CHECK(code == exit_ok);
    CHECK(out.find("rounds=") != std::string::npos);
    std::string rows = slurp(csv);
    CHECK(rows.find("fmmb,spiteful") != std::string::npos);
}

TEST_CASE("check: clean and mutated traces") {
    TempDir dir;
    std::string cfg = dir.file("run.json");
    std::string trace = dir.file("trace.jsonl");
    std::string graph = dir.file("graph.json");
    write(cfg, R"({
      "model": "standard", "algorithm": "bmmb",
      "graph": {"generator": "line", "n": 4},
      "scheduler": "slow_synchronous", "f_ack": "8", "f_prog": "1",
      "arrivals": {"mode": "prefix_singletons", "k": 1},
      "trace_out": ")" + trace + R"("
    })");
    REQUIRE(cli({"run", "--config", cfg}) == exit_ok);
    write(graph, make_line(4).to_json());

    std::string report;
    CHECK(cli({"check", "--trace", trace, "--graph", graph}, &report) == exit_ok);
    CHECK(report.find("\"clean\": true") != std::string::npos);

    // Mutate: move an ack beyond the bound.
    Trace t = Trace::from_jsonl(slurp(trace));
    for (Event& e : t.events)
        if (e.kind == EventKind::ack) {
            e.time = e.time + Rational(100);
            break;
        }
    std::sort(t.events.begin(), t.events.end(), [](const Event& a, const Event& b) {
        return a.time < b.time || (a.time == b.time && a.seq < b.seq);
    });
    std::int64_t seq = 0;
    for (Event& e : t.events) e.seq = seq++;
    std::string mutated = dir.file("mutated.jsonl");
    write(mutated, t.to_jsonl());
    std::string report2;
    CHECK(cli({"check", "--trace", mutated, "--graph", graph}, &report2) ==
          exit_violation);
    CHECK(report2.find("ack-bound") != std::string::npos);

    // Missing file is a usage error.
    CHECK(cli({"check", "--trace", dir.file("nope.jsonl"), "--graph", graph}) ==
          exit_usage);
}

TEST_CASE("lower: both demos emit floor certificates") {
    TempDir dir;
    std::string cert = dir.file("cert.json");
    std::string out;
    CHECK(cli({"lower", "--kind", "star", "--k", "8", "--cert", cert}, &out) ==
          exit_ok);
    CHECK(out.find("floor=56") != std::string::npos);
    CHECK(slurp(cert).find("\"floor\": \"56\"") != std::string::npos);

    CHECK(cli({"lower", "--kind", "crossing", "--d", "10", "--cert", cert}, &out) ==
          exit_ok);
    CHECK(out.find("floor=64") != std::string::npos);
    CHECK(out.find("checker_violations=0") != std::string::npos);
}

TEST_CASE("bench: sweep produces per-cell summary and slope") {
    TempDir dir;
    std::string spec = dir.file("sweep.json");
    std::string summary = dir.file("summary.json");
    std::string csv = dir.file("bench.csv");
    write(spec, R"({
      "base": {
        "model": "standard", "algorithm": "bmmb",
        "graph": {"generator": "star_bridge", "n": 4},
        "scheduler": "slow_synchronous", "f_ack": "8", "f_prog": "1",
        "arrivals": {"mode": "prefix_singletons", "k": 4},
        "checks": {"checker": true}
      },
      "sweep": {"param": "graph.n", "values": [4, 8]},
      "seeds": [1, 2],
      "out_csv": ")" + csv + R"(",
      "out_summary": ")" + summary + R"("
    })");
    std::string out;
    CHECK(cli({"bench", "--config", spec}, &out) == exit_ok);
    CHECK(out.find("\"slope\"") != std::string::npos);
    CHECK(slurp(summary).find("mean_completion") != std::string::npos);
    CHECK(slurp(csv).find("star_bridge") == std::string::npos); // csv has no generator col
    CHECK(slurp(csv).find("bmmb,slow_synchronous") != std::string::npos);
}

TEST_CASE("usage errors") {
    CHECK(cli({}) == exit_usage);
    CHECK(cli({"frobnicate"}) == exit_usage);
    CHECK(cli({"run"}) == exit_usage); // missing --config
}
