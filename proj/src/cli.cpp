#include "dualmac/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dualmac/adversary.hpp"
#include "dualmac/errors.hpp"
#include "dualmac/rounds.hpp"
#include "dualmac/schedulers.hpp"

namespace dualmac {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << content;
}

Rational parse_rational(const nlohmann::json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    return Rational::parse(j.get<std::string>());
}

} // namespace

RunConfig RunConfig::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    RunConfig c;
    try {
        if (j.contains("model")) c.model = model_from_name(j["model"].get<std::string>());
        if (j.contains("algorithm")) c.algorithm = j["algorithm"].get<std::string>();
        if (j.contains("graph")) {
            const auto& g = j["graph"];
            if (g.contains("file")) {
                c.graph_file = g["file"].get<std::string>();
            } else {
                // lower_* algorithms imply their topology; generator optional.
                c.graph_generator = g.value("generator", "");
                if (g.contains("n")) c.graph_n = g["n"].get<int>();
                if (g.contains("k")) c.graph_n = g["k"].get<int>();
                if (g.contains("d")) c.graph_n = g["d"].get<int>();
                if (g.contains("c")) c.grey_c = g["c"].get<double>();
                if (g.contains("side")) c.grey_side = g["side"].get<double>();
                if (g.contains("p_link")) c.grey_p_link = g["p_link"].get<double>();
                if (g.contains("connected")) c.grey_connected = g["connected"].get<bool>();
                if (g.contains("seed")) c.graph_seed = g["seed"].get<std::uint64_t>();
            }
        }
        if (j.contains("scheduler")) c.scheduler = j["scheduler"].get<std::string>();
        if (j.contains("adversary")) c.adversary = j["adversary"].get<std::string>();
        if (j.contains("f_ack")) c.f_ack = parse_rational(j["f_ack"]);
        if (j.contains("f_prog")) c.f_prog = parse_rational(j["f_prog"]);
        if (j.contains("eps_abort")) c.eps_abort = parse_rational(j["eps_abort"]);
        if (j.contains("zero_delay_budget"))
            c.zero_delay_budget = j["zero_delay_budget"].get<int>();
        if (j.contains("horizon")) c.horizon = parse_rational(j["horizon"]);
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("arrivals")) {
            const auto& a = j["arrivals"];
            c.arrival_mode = a.at("mode").get<std::string>();
            if (a.contains("k")) c.k = a["k"].get<int>();
            if (c.arrival_mode == "explicit") {
                for (auto it = a.at("map").begin(); it != a.at("map").end(); ++it)
                    c.arrival_map[std::stoi(it.key())] =
                        it.value().get<std::vector<int>>();
                int count = 0;
                for (const auto& [node, payloads] : c.arrival_map)
                    count += int(payloads.size());
                c.k = count;
            }
        }
        if (j.contains("checks")) {
            const auto& ch = j["checks"];
            if (ch.contains("checker")) c.check_trace = ch["checker"].get<bool>();
            if (ch.contains("strict_progress"))
                c.strict_progress = ch["strict_progress"].get<bool>();
            if (ch.contains("arbitrary_bound"))
                c.check_arbitrary_bound = ch["arbitrary_bound"].get<bool>();
            if (ch.contains("r_restricted"))
                c.check_r_restricted = ch["r_restricted"].get<int>();
        }
        if (j.contains("fmmb")) {
            const auto& f = j["fmmb"];
            if (f.contains("c")) c.fmmb.c = f["c"].get<double>();
            if (f.contains("p_act")) c.fmmb.p_act = f["p_act"].get<double>();
            if (f.contains("election_factor"))
                c.fmmb.election_factor = f["election_factor"].get<int>();
            if (f.contains("announce_factor"))
                c.fmmb.announce_factor = f["announce_factor"].get<int>();
            if (f.contains("phase_factor"))
                c.fmmb.phase_factor = f["phase_factor"].get<int>();
            if (f.contains("gather_factor"))
                c.fmmb.gather_factor = f["gather_factor"].get<int>();
            if (f.contains("localbcast_factor"))
                c.fmmb.localbcast_factor = f["localbcast_factor"].get<int>();
            if (f.contains("spread_phase_factor"))
                c.fmmb.spread_phase_factor = f["spread_phase_factor"].get<int>();
            if (f.contains("spread_phase_slack"))
                c.fmmb.spread_phase_slack = f["spread_phase_slack"].get<int>();
        }
        if (j.contains("trace_out")) c.trace_out = j["trace_out"].get<std::string>();
        if (j.contains("metrics_out"))
            c.metrics_out = j["metrics_out"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return c;
}

std::string RunConfig::to_json() const {
    nlohmann::json j;
    j["model"] = model_name(model);
    j["algorithm"] = algorithm;
    if (!graph_file.empty()) {
        j["graph"] = {{"file", graph_file}};
    } else {
        j["graph"] = {{"generator", graph_generator}, {"n", graph_n},
                      {"c", grey_c},                  {"side", grey_side},
                      {"p_link", grey_p_link},        {"connected", grey_connected},
                      {"seed", graph_seed}};
    }
    j["scheduler"] = scheduler;
    j["adversary"] = adversary;
    j["f_ack"] = f_ack.str();
    j["f_prog"] = f_prog.str();
    j["eps_abort"] = eps_abort.str();
    j["zero_delay_budget"] = zero_delay_budget;
    j["horizon"] = horizon.str();
    j["seed"] = seed;
    nlohmann::json arr;
    arr["mode"] = arrival_mode;
    arr["k"] = k;
    if (!arrival_map.empty()) {
        nlohmann::json m = nlohmann::json::object();
        for (const auto& [node, payloads] : arrival_map)
            m[std::to_string(node)] = payloads;
        arr["map"] = m;
    }
    j["arrivals"] = arr;
    j["checks"] = {{"checker", check_trace},
                   {"strict_progress", strict_progress},
                   {"arbitrary_bound", check_arbitrary_bound},
                   {"r_restricted", check_r_restricted}};
    j["fmmb"] = {{"c", fmmb.c},
                 {"p_act", fmmb.p_act},
                 {"election_factor", fmmb.election_factor},
                 {"announce_factor", fmmb.announce_factor},
                 {"phase_factor", fmmb.phase_factor},
                 {"gather_factor", fmmb.gather_factor},
                 {"localbcast_factor", fmmb.localbcast_factor},
                 {"spread_phase_factor", fmmb.spread_phase_factor},
                 {"spread_phase_slack", fmmb.spread_phase_slack}};
    if (!trace_out.empty()) j["trace_out"] = trace_out;
    if (!metrics_out.empty()) j["metrics_out"] = metrics_out;
    return j.dump(2) + "\n";
}

DualGraph build_graph(const RunConfig& config) {
    if (!config.graph_file.empty())
        return DualGraph::from_json(read_file(config.graph_file));
    if (config.algorithm == "lower_star") return make_star_bridge(config.graph_n);
    if (config.algorithm == "lower_crossing") return make_double_line(config.graph_n);
    const std::string& gen = config.graph_generator;
    if (gen == "line") return make_line(config.graph_n);
    if (gen == "star_bridge") return make_star_bridge(config.graph_n);
    if (gen == "double_line") return make_double_line(config.graph_n);
    if (gen == "grey_zone") {
        GreyZoneParams p;
        p.n = config.graph_n;
        p.c = config.grey_c;
        p.side = config.grey_side;
        p.p_link = config.grey_p_link;
        p.connected = config.grey_connected;
        return make_grey_zone(p, config.graph_seed);
    }
    if (gen == "random_dual") {
        // Path backbone plus random extra reliable and unreliable edges.
        Rng rng(config.graph_seed);
        DualGraph g(config.graph_n);
        for (int i = 0; i + 1 < config.graph_n; ++i) g.add_edge_g(i, i + 1);
        int extras = config.graph_n / 2 + int(rng.below(std::uint64_t(config.graph_n + 1)));
        for (int e = 0; e < extras; ++e) {
            int u = int(rng.below(std::uint64_t(config.graph_n)));
            int v = int(rng.below(std::uint64_t(config.graph_n)));
            if (u == v) continue;
            if (rng.below(3) == 0)
                g.add_edge_g(u, v);
            else
                g.add_edge_gp(u, v);
        }
        return g;
    }
    if (gen == "unit_disk_r2") {
        // Unit-disk reliable graph; unreliable edges sampled inside G^2, so
        // the result is 2-restricted by construction.
        GreyZoneParams p;
        p.n = config.graph_n;
        p.c = 1.0;
        p.side = config.grey_side;
        p.p_link = 0.0;
        p.connected = config.grey_connected;
        Rng rng = Rng(config.graph_seed).fork(0x72320000ull);
        DualGraph g = make_grey_zone(p, config.graph_seed);
        for (const auto& [u, v] : power_graph(g, 2)) {
            if (!g.has_edge_g(u, v) && rng.bernoulli(config.grey_p_link))
                g.add_edge_gp(u, v);
        }
        return g;
    }
    throw InvalidParameter("unknown graph generator '" + gen + "'");
}

std::map<int, std::vector<int>> build_arrivals(const RunConfig& config,
                                               const DualGraph& graph) {
    if (config.arrival_mode == "explicit") return config.arrival_map;
    std::map<int, std::vector<int>> out;
    if (config.arrival_mode == "prefix_singletons") {
        if (config.k > graph.n())
            throw InvalidParameter("arrivals: k exceeds vertex count");
        for (int i = 0; i < config.k; ++i) out[i] = {i};
        return out;
    }
    if (config.arrival_mode == "random_singletons") {
        if (config.k > graph.n())
            throw InvalidParameter("arrivals: k exceeds vertex count");
        Rng rng = Rng(config.seed).fork(0x61727276ull);
        std::vector<int> nodes(graph.n());
        for (int i = 0; i < graph.n(); ++i) nodes[i] = i;
        for (int i = 0; i < config.k; ++i) {
            int j = i + int(rng.below(std::uint64_t(graph.n() - i)));
            std::swap(nodes[i], nodes[j]);
            out[nodes[i]] = {i};
        }
        return out;
    }
    throw InvalidParameter("unknown arrival mode '" + config.arrival_mode + "'");
}

RunOutcome execute_run(const RunConfig& config) {
    RunOutcome outcome;
    outcome.graph = build_graph(config);
    const DualGraph& graph = outcome.graph;

    EngineConfig engine_config;
    engine_config.f_ack = config.f_ack;
    engine_config.f_prog = config.f_prog;
    engine_config.eps_abort = config.eps_abort;
    engine_config.model = config.model;
    engine_config.zero_delay_budget = config.zero_delay_budget;

    CheckOptions check_options;
    check_options.strict_progress = config.strict_progress;

    if (config.algorithm == "bmmb" || config.algorithm == "lower_star" ||
        config.algorithm == "lower_crossing") {
        if (config.model != Model::standard)
            throw InvalidParameter("broadcast runs use the standard model");

        // Assertion preconditions fail before anything executes.
        if (config.check_r_restricted > 0 &&
            !is_r_restricted(graph, config.check_r_restricted))
            throw PreconditionViolation(
                "run: graph is not " + std::to_string(config.check_r_restricted) +
                "-restricted, cannot assert the restricted bound");

        std::map<int, std::vector<int>> arrivals;
        std::unique_ptr<Scheduler> scheduler;
        Rational floor(0);
        bool has_floor = false;
        if (config.algorithm == "lower_star") {
            auto setup = star_lower_bound(config.graph_n, engine_config);
            arrivals = setup.arrivals;
            scheduler = std::move(setup.scheduler);
            floor = setup.floor;
            has_floor = true;
        } else if (config.algorithm == "lower_crossing") {
            auto setup = crossing_lower_bound(config.graph_n, engine_config);
            arrivals = setup.arrivals;
            scheduler = std::move(setup.scheduler);
            floor = setup.floor;
            has_floor = true;
        } else {
            arrivals = build_arrivals(config, graph);
            scheduler = make_scheduler(config.scheduler, config.seed);
        }

        auto automata = make_bmmb_automata(graph.n());
        RunOptions options;
        options.arrivals = arrivals;
        options.horizon = config.horizon;
        options.seed = config.seed;
        outcome.trace = run(graph, automata, *scheduler, engine_config, options);
        outcome.completion = measure_completion(outcome.trace, graph);
        outcome.completion_time = outcome.completion.overall.to_double();
        if (has_floor &&
            (!outcome.completion.all_delivered || outcome.completion.overall < floor))
            outcome.assertion_failures += 1;

        if (config.check_trace) {
            auto report = check(outcome.trace, graph, engine_config, check_options);
            outcome.checker_violations = int(report.violations.size());
        }
        int k = int(arrivals.size());
        if (config.check_arbitrary_bound) {
            auto report = assert_arbitrary_bound(outcome.trace, graph, engine_config, k);
            outcome.assertion_failures += int(report.counterexamples.size());
        }
        if (config.check_r_restricted > 0) {
            auto report = assert_r_restricted_bound(outcome.trace, graph, engine_config,
                                                    config.check_r_restricted, k);
            outcome.assertion_failures += int(report.counterexamples.size());
        }
        return outcome;
    }

    if (config.algorithm == "fmmb") {
        if (config.model != Model::enhanced)
            throw InvalidParameter("fmmb requires the enhanced model");
        auto arrivals = build_arrivals(config, graph);
        std::unique_ptr<RoundAdversary> adversary;
        if (config.adversary == "uniform_one")
            adversary = make_uniform_one_adversary();
        else if (config.adversary == "spiteful")
            adversary = make_spiteful_adversary();
        else
            throw InvalidParameter("unknown adversary '" + config.adversary + "'");

        outcome.fmmb = fmmb_run(graph, arrivals, config.fmmb, *adversary, config.seed);
        outcome.rounds = outcome.fmmb.total_rounds();
        outcome.completion_time =
            (config.f_prog * Rational(outcome.rounds)).to_double();
        outcome.fmmb_delivered = outcome.fmmb.delivered_all;
        // Stage-level failures surface as assertion failures in the metrics.
        if (!outcome.fmmb.mis_valid) outcome.assertion_failures += 1;
        if (!outcome.fmmb.gather_covered) outcome.assertion_failures += 1;
        if (!outcome.fmmb.delivered_all) outcome.assertion_failures += 1;

        if (config.check_trace) {
            for (const RoundTrace* rt :
                 {&outcome.fmmb.trace_mis, &outcome.fmmb.trace_gather,
                  &outcome.fmmb.trace_spread}) {
                Trace lowered = lower_to_trace(*rt, engine_config);
                auto report = check(lowered, graph, engine_config, check_options);
                outcome.checker_violations += int(report.violations.size());
            }
        }
        return outcome;
    }
    throw InvalidParameter("unknown algorithm '" + config.algorithm + "'");
}

std::string metrics_csv_header() {
    return "n,D,components,k,r_or_c,algorithm,scheduler,seed,completion_time,rounds,"
           "checker_violations,assertion_failures\n";
}

std::string metrics_csv_row(const RunConfig& config, const DualGraph& graph,
                            const RunOutcome& outcome) {
    auto m = metrics(graph);
    std::ostringstream row;
    std::string r_or_c;
    if (config.algorithm == "fmmb") {
        r_or_c = std::to_string(config.fmmb.c);
    } else if (config.check_r_restricted > 0) {
        r_or_c = std::to_string(config.check_r_restricted);
    }
    std::string scheduler_name = config.scheduler;
    if (config.algorithm == "fmmb") scheduler_name = config.adversary;
    if (config.algorithm == "lower_star" || config.algorithm == "lower_crossing")
        scheduler_name = "scripted";
    row << graph.n() << ',' << m.diameter_g << ',' << m.components.size() << ','
        << config.k << ',' << r_or_c << ',' << config.algorithm << ','
        << scheduler_name << ',' << config.seed << ',' << outcome.completion_time
        << ',' << outcome.rounds << ',' << outcome.checker_violations << ','
        << outcome.assertion_failures << '\n';
    return row.str();
}

namespace {

void append_metrics(const std::string& path, const std::string& row) {
    bool fresh = !std::ifstream(path).good();
    std::ofstream out(path, std::ios::app);
    if (!out) throw ParseError("cannot write '" + path + "'");
    if (fresh) out << metrics_csv_header();
    out << row;
}

struct ArgView {
    std::vector<std::string> positional;
    std::map<std::string, std::string> flags;

    static ArgView parse(const std::vector<std::string>& args, std::size_t start) {
        ArgView view;
        for (std::size_t i = start; i < args.size(); ++i) {
            const std::string& a = args[i];
            if (a.rfind("--", 0) == 0) {
                std::string key = a.substr(2);
                if (i + 1 < args.size() && args[i + 1].rfind("--", 0) != 0)
                    view.flags[key] = args[++i];
                else
                    view.flags[key] = "true";
            } else {
                view.positional.push_back(a);
            }
        }
        return view;
    }

    std::string need(const std::string& key) const {
        auto it = flags.find(key);
        if (it == flags.end()) throw InvalidParameter("missing --" + key);
        return it->second;
    }
    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = flags.find(key);
        return it == flags.end() ? fallback : it->second;
    }
    bool has(const std::string& key) const { return flags.count(key) > 0; }
};

RunConfig load_config(const ArgView& args) {
    RunConfig config = RunConfig::from_json(read_file(args.need("config")));
    if (args.has("seed")) config.seed = std::stoull(args.get("seed", "1"));
    if (args.has("strict-progress")) config.strict_progress = true;
    return config;
}

int cmd_gen(const ArgView& args, std::ostream& out) {
    RunConfig config = load_config(args);
    DualGraph graph = build_graph(config);
    graph.validate();
    std::string path = args.get("out", "graph.json");
    write_file(path, graph.to_json());
    out << "wrote " << path << " (n=" << graph.n() << ", |E|=" << graph.edges_g().size()
        << ", |E'|=" << graph.edges_gp().size() << ")\n";
    return exit_ok;
}

int cmd_run(const ArgView& args, std::ostream& out) {
    RunConfig config = load_config(args);
    if (args.has("out")) config.trace_out = args.get("out", "");
    RunOutcome outcome = execute_run(config);
    if (!config.trace_out.empty() && config.algorithm != "fmmb")
        write_file(config.trace_out, outcome.trace.to_jsonl());
    if (!config.metrics_out.empty())
        append_metrics(config.metrics_out,
                       metrics_csv_row(config, outcome.graph, outcome));
    out << "completion_time=" << outcome.completion_time
        << " rounds=" << outcome.rounds
        << " checker_violations=" << outcome.checker_violations
        << " assertion_failures=" << outcome.assertion_failures << "\n";
    return outcome.checker_violations + outcome.assertion_failures > 0 ? exit_violation
                                                                       : exit_ok;
}

int cmd_check(const ArgView& args, std::ostream& out) {
    Trace trace = Trace::from_jsonl(read_file(args.need("trace")));
    DualGraph graph = DualGraph::from_json(read_file(args.need("graph")));
    EngineConfig config = trace.config;
    CheckOptions options;
    options.strict_progress = args.has("strict-progress");
    auto report = check(trace, graph, config, options);
    std::string json = report.to_json();
    if (args.has("out"))
        write_file(args.get("out", "report.json"), json);
    else
        out << json;
    return report.clean() ? exit_ok : exit_violation;
}

int cmd_lower(const ArgView& args, std::ostream& out) {
    std::string kind = args.get("kind", "star");
    EngineConfig config;
    config.f_ack = Rational::parse(args.get("f-ack", "8"));
    config.f_prog = Rational::parse(args.get("f-prog", "1"));

    LowerBoundSetup setup;
    if (kind == "star") {
        setup = star_lower_bound(std::stoi(args.get("k", "32")), config);
    } else if (kind == "crossing") {
        setup = crossing_lower_bound(std::stoi(args.get("d", "40")), config);
    } else {
        throw InvalidParameter("lower: kind must be star or crossing");
    }

    auto automata = make_bmmb_automata(setup.graph.n());
    RunOptions options;
    options.arrivals = setup.arrivals;
    options.seed = std::stoull(args.get("seed", "1"));
    Trace trace = run(setup.graph, automata, *setup.scheduler, config, options);
    auto report = check(trace, setup.graph, config);
    auto completion = measure_completion(trace, setup.graph);

    FloorCertificate cert;
    cert.floor = setup.floor;
    cert.measured = completion.overall;
    cert.ratio = setup.floor.is_zero()
                     ? 0.0
                     : completion.overall.to_double() / setup.floor.to_double();
    if (args.has("out")) write_file(args.get("out", ""), trace.to_jsonl());
    if (args.has("cert")) write_file(args.get("cert", ""), cert.to_json());
    out << "floor=" << cert.floor.str() << " measured=" << cert.measured.str()
        << " ratio=" << cert.ratio << " checker_violations=" << report.violations.size()
        << "\n";
    bool ok = report.clean() && !(completion.overall < setup.floor) &&
              completion.all_delivered;
    return ok ? exit_ok : exit_violation;
}

nlohmann::json* json_path(nlohmann::json& root, const std::string& dotted) {
    nlohmann::json* cur = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted.find('.', start);
        std::string key = dotted.substr(start, dot - start);
        cur = &(*cur)[key];
        if (dot == std::string::npos) return cur;
        start = dot + 1;
    }
}

int cmd_bench(const ArgView& args, std::ostream& out) {
    nlohmann::json spec;
    try {
        spec = nlohmann::json::parse(read_file(args.need("config")));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bench spec: ") + e.what());
    }
    nlohmann::json base = spec.at("base");
    std::string param = spec.at("sweep").at("param").get<std::string>();
    std::vector<nlohmann::json> values =
        spec.at("sweep").at("values").get<std::vector<nlohmann::json>>();
    std::vector<std::uint64_t> seeds;
    if (spec.contains("seeds") && spec["seeds"].is_array())
        seeds = spec["seeds"].get<std::vector<std::uint64_t>>();
    else {
        int count = spec.value("seeds", 3);
        for (int i = 1; i <= count; ++i) seeds.push_back(std::uint64_t(i));
    }
    int workers = int(args.has("workers") ? std::stoul(args.get("workers", "1"))
                                          : spec.value("workers", 1));
    std::string budget_kind =
        spec.contains("budget") ? spec["budget"].value("kind", "") : "";
    int budget_r = spec.contains("budget") ? spec["budget"].value("r", 1) : 1;

    struct Cell {
        double value = 0.0;
        std::vector<double> completions;
        std::vector<int> rounds;
        int violations = 0;
        int assertion_failures = 0;
        int failures = 0;
        bool budget_pass = true;
        double budget = 0.0;
        std::string error;
    };
    std::vector<Cell> cells(values.size());
    std::ostringstream csv;
    csv << metrics_csv_header();
    std::mutex mutex;

    auto run_cell = [&](std::size_t idx) {
        Cell& cell = cells[idx];
        for (std::uint64_t seed : seeds) {
            nlohmann::json cfg_json = base;
            *json_path(cfg_json, param) = values[idx];
            RunConfig config;
            try {
                config = RunConfig::from_json(cfg_json.dump());
                config.seed = seed;
                if (param == "graph.seed") config.graph_seed = seed;
                // Distinct random instances per seed unless pinned.
                bool seeded_gen = config.graph_generator == "grey_zone" ||
                                  config.graph_generator == "random_dual" ||
                                  config.graph_generator == "unit_disk_r2";
                if (seeded_gen &&
                    !(base.contains("graph") && base["graph"].contains("seed")))
                    config.graph_seed = seed;
                RunOutcome outcome = execute_run(config);
                const DualGraph& graph = outcome.graph;
                auto m = metrics(graph);

                double budget = 0.0;
                bool pass = true;
                if (budget_kind == "t_bound") {
                    EngineConfig ec;
                    ec.f_ack = config.f_ack;
                    ec.f_prog = config.f_prog;
                    Rational bound =
                        t_bound(m.diameter_g, config.k, budget_r, ec) + config.f_ack;
                    budget = bound.to_double();
                    pass = outcome.completion_time <= budget;
                } else if (budget_kind == "star_floor") {
                    budget = config.f_ack.to_double() * (config.graph_n - 1);
                    pass = outcome.completion_time >= budget;
                } else if (budget_kind == "crossing_floor") {
                    budget = config.f_ack.to_double() * (config.graph_n - 2);
                    pass = outcome.completion_time >= budget;
                } else if (budget_kind == "fmmb_budget") {
                    double l = std::log2(double(graph.n()));
                    budget = 64.0 * (m.diameter_g * l + config.k * l + l * l * l);
                    pass = double(outcome.rounds) <= budget;
                }

                std::lock_guard<std::mutex> lock(mutex);
                cell.value = values[idx].is_number() ? values[idx].get<double>() : 0.0;
                cell.completions.push_back(outcome.completion_time);
                cell.rounds.push_back(outcome.rounds);
                cell.violations += outcome.checker_violations;
                cell.assertion_failures += outcome.assertion_failures;
                cell.budget = budget;
                if (!pass) cell.budget_pass = false;
                csv << metrics_csv_row(config, graph, outcome);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mutex);
                ++cell.failures;
                cell.error = e.what();
            }
        }
    };

    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::vector<std::thread> pool;
        std::size_t next = 0;
        std::mutex next_mutex;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    std::size_t idx;
                    {
                        std::lock_guard<std::mutex> lock(next_mutex);
                        if (next >= cells.size()) return;
                        idx = next++;
                    }
                    run_cell(idx);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    // Least-squares slope of mean completion against the swept value.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    nlohmann::json summary;
    summary["param"] = param;
    summary["cells"] = nlohmann::json::array();
    for (const Cell& cell : cells) {
        double mean = 0.0;
        for (double c : cell.completions) mean += c;
        if (!cell.completions.empty()) mean /= double(cell.completions.size());
        double mean_rounds = 0.0;
        for (int r : cell.rounds) mean_rounds += r;
        if (!cell.rounds.empty()) mean_rounds /= double(cell.rounds.size());
        nlohmann::json jc;
        jc["value"] = cell.value;
        jc["mean_completion"] = mean;
        jc["mean_rounds"] = mean_rounds;
        jc["checker_violations"] = cell.violations;
        jc["assertion_failures"] = cell.assertion_failures;
        jc["failures"] = cell.failures;
        if (!cell.error.empty()) jc["error"] = cell.error;
        if (!budget_kind.empty()) {
            jc["budget"] = cell.budget;
            jc["budget_pass"] = cell.budget_pass;
        }
        summary["cells"].push_back(jc);
        if (!cell.completions.empty()) {
            sx += cell.value;
            sy += mean;
            sxx += cell.value * cell.value;
            sxy += cell.value * mean;
            ++pts;
        }
    }
    double slope = 0.0;
    if (pts >= 2 && pts * sxx - sx * sx != 0.0)
        slope = (pts * sxy - sx * sy) / (pts * sxx - sx * sx);
    summary["slope"] = slope;

    if (spec.contains("out_csv")) write_file(spec["out_csv"].get<std::string>(), csv.str());
    if (spec.contains("out_summary"))
        write_file(spec["out_summary"].get<std::string>(), summary.dump(2) + "\n");
    out << summary.dump(2) << "\n";
    bool any_failures = std::any_of(cells.begin(), cells.end(), [](const Cell& c) {
        return c.failures > 0 || c.violations > 0 || c.assertion_failures > 0;
    });
    return any_failures ? exit_violation : exit_ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    if (args.empty()) {
        err << "usage: dualmac <gen|run|check|bench|lower> [--flags]\n";
        return exit_usage;
    }
    const std::string& cmd = args[0];
    ArgView view = ArgView::parse(args, 1);
    try {
        if (cmd == "gen") return cmd_gen(view, out);
        if (cmd == "run") return cmd_run(view, out);
        if (cmd == "check") return cmd_check(view, out);
        if (cmd == "bench") return cmd_bench(view, out);
        if (cmd == "lower") return cmd_lower(view, out);
        err << "unknown command '" << cmd << "'\n";
        return exit_usage;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return exit_internal;
    }
}

} // namespace dualmac
