#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualmac/bmmb.hpp"
#include "dualmac/checker.hpp"
#include "dualmac/fmmb.hpp"
#include "dualmac/graph.hpp"

namespace dualmac {

// Exit codes: 0 success, 1 violations or assertion failures, 2 usage errors,
// 3 internal errors.
enum ExitCode { exit_ok = 0, exit_violation = 1, exit_usage = 2, exit_internal = 3 };

// Flat run description; parsed from a JSON config file. Rationals are carried
// as "num/den" strings so exactness survives the round trip.
struct RunConfig {
    Model model = Model::standard;
    // bmmb | fmmb | lower_star | lower_crossing (the lower_* algorithms run
    // BMMB under the scripted lower-bound schedule on the matching topology;
    // graph.n carries k resp. d)
    std::string algorithm = "bmmb";
    // graph sources: either generator+params or a file path. Generators:
    // line | star_bridge | double_line | grey_zone | random_dual | unit_disk_r2
    std::string graph_generator;
    int graph_n = 8;
    double grey_c = 1.5;
    double grey_side = 1.0;
    double grey_p_link = 0.5;
    bool grey_connected = false;
    std::uint64_t graph_seed = 1;
    std::string graph_file;

    std::string scheduler = "eager";      // bmmb runs
    std::string adversary = "uniform_one"; // fmmb runs
    Rational f_ack{8};
    Rational f_prog{1};
    Rational eps_abort{0};
    int zero_delay_budget = 200000;
    Rational horizon{1'000'000};
    std::uint64_t seed = 1;

    std::string arrival_mode = "prefix_singletons"; // explicit | prefix_singletons | random_singletons
    int k = 1;
    std::map<int, std::vector<int>> arrival_map; // explicit mode

    bool check_trace = true;
    bool strict_progress = false;
    bool check_arbitrary_bound = false;
    int check_r_restricted = 0; // 0 = off, else r

    FmmbParams fmmb;

    std::string trace_out;
    std::string metrics_out;

    static RunConfig from_json(const std::string& text);
    std::string to_json() const;
};

DualGraph build_graph(const RunConfig& config);
std::map<int, std::vector<int>> build_arrivals(const RunConfig& config,
                                               const DualGraph& graph);

struct RunOutcome {
    DualGraph graph;              // the graph the run executed on
    Trace trace;                  // engine-backed runs
    CompletionReport completion;  // engine-backed runs
    FmmbResult fmmb;              // fmmb runs
    int checker_violations = 0;
    int assertion_failures = 0;
    int rounds = 0;
    double completion_time = 0.0;
    bool fmmb_delivered = false;
};

// Executes one configured run and evaluates the requested checks.
RunOutcome execute_run(const RunConfig& config);

// One metrics row in the documented CSV schema.
std::string metrics_csv_header();
std::string metrics_csv_row(const RunConfig& config, const DualGraph& graph,
                            const RunOutcome& outcome);

// Entry point used by the binary and by tests; argv[0] is skipped.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace dualmac
