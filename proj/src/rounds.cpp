#include "dualmac/rounds.hpp"

#include <algorithm>

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

namespace {

class PickOneAdversary : public RoundAdversary {
public:
    explicit PickOneAdversary(bool spiteful) : spiteful_(spiteful) {}

    std::vector<std::vector<int>> choose(int, const DualGraph& graph,
                                         const std::vector<bool>& broadcasters,
                                         Rng& rng) override {
        std::vector<std::vector<int>> out(graph.n());
        for (int v = 0; v < graph.n(); ++v) {
            if (broadcasters[v]) continue; // (R2)
            std::vector<int> candidates;
            for (int u : graph.neighbors_gp(v))
                if (broadcasters[u]) candidates.push_back(u);
            if (candidates.empty()) continue;
            std::sort(candidates.begin(), candidates.end());
            if (spiteful_) {
                std::vector<int> unreliable;
                for (int u : candidates)
                    if (!graph.has_edge_g(u, v)) unreliable.push_back(u);
                if (!unreliable.empty()) candidates = std::move(unreliable);
            }
            out[v].push_back(candidates[rng.below(candidates.size())]);
        }
        return out;
    }

private:
    bool spiteful_;
};

} // namespace

std::unique_ptr<RoundAdversary> make_uniform_one_adversary() {
    return std::make_unique<PickOneAdversary>(false);
}

std::unique_ptr<RoundAdversary> make_spiteful_adversary() {
    return std::make_unique<PickOneAdversary>(true);
}

std::string RoundTrace::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["rounds"] = nlohmann::json::array();
    for (const RoundRecord& r : rounds) {
        nlohmann::json round;
        round["broadcasters"] = nlohmann::json::array();
        for (const auto& [node, msg] : r.broadcasters) {
            round["broadcasters"].push_back({{"node", node},
                                             {"kind", msg.kind},
                                             {"payload", msg.payload},
                                             {"sender_id", msg.sender_id},
                                             {"bits", msg.bits}});
        }
        round["deliveries"] = nlohmann::json::array();
        for (int v = 0; v < n; ++v) {
            for (const RoundDelivery& d : r.deliveries[v]) {
                round["deliveries"].push_back({{"node", v},
                                               {"from", d.from},
                                               {"kind", d.msg.kind},
                                               {"payload", d.msg.payload},
                                               {"reliable", d.reliable}});
            }
        }
        j["rounds"].push_back(round);
    }
    return j.dump() + "\n";
}

RoundTrace run_rounds(const DualGraph& graph,
                      std::vector<std::unique_ptr<RoundAutomaton>>& automata,
                      RoundAdversary& adversary, const RoundRunOptions& options) {
    if (int(automata.size()) != graph.n())
        throw InvalidParameter("run_rounds: need one automaton per vertex");
    RoundTrace trace;
    trace.n = graph.n();

    Rng root(options.seed);
    std::vector<Rng> node_rng;
    for (int v = 0; v < graph.n(); ++v)
        node_rng.push_back(root.fork(0x726f756eull, std::uint64_t(v)));
    Rng adv_rng = root.fork(0x63686f6full);

    std::vector<std::optional<RoundMessage>> intents(graph.n());
    std::vector<bool> broadcasters(graph.n());
    for (int round = 0; round < options.max_rounds; ++round) {
        RoundRecord record;
        record.deliveries.resize(graph.n());
        for (int v = 0; v < graph.n(); ++v) {
            intents[v] = automata[v]->on_round(round, node_rng[v]);
            broadcasters[v] = intents[v].has_value();
            if (intents[v]) record.broadcasters.emplace_back(v, *intents[v]);
        }

        auto choice = adversary.choose(round, graph, broadcasters, adv_rng);
        if (int(choice.size()) != graph.n())
            throw AdversaryError("round " + std::to_string(round) +
                                 ": adversary returned wrong-sized delivery map");
        for (int v = 0; v < graph.n(); ++v) {
            if (broadcasters[v] && !choice[v].empty())
                throw AdversaryError("round " + std::to_string(round) + ": node " +
                                     std::to_string(v) +
                                     " broadcast but was given deliveries (R2)");
            bool has_g_sender = false;
            for (int u : graph.neighbors_g(v))
                if (broadcasters[u]) has_g_sender = true;
            if (!broadcasters[v] && has_g_sender && choice[v].empty())
                throw AdversaryError("round " + std::to_string(round) + ": node " +
                                     std::to_string(v) +
                                     " must receive something (R1)");
            std::set<int> dedup;
            for (int u : choice[v]) {
                if (!graph.has_edge_gp(u, v) || !broadcasters[u])
                    throw AdversaryError("round " + std::to_string(round) +
                                         ": illegal delivery " + std::to_string(u) +
                                         " -> " + std::to_string(v));
                if (!dedup.insert(u).second)
                    throw AdversaryError("round " + std::to_string(round) +
                                         ": duplicate delivery " + std::to_string(u) +
                                         " -> " + std::to_string(v));
                record.deliveries[v].push_back(
                    {u, *intents[u], graph.has_edge_g(u, v)});
            }
        }

        for (int v = 0; v < graph.n(); ++v)
            automata[v]->on_deliveries(round, broadcasters[v], record.deliveries[v]);
        trace.rounds.push_back(std::move(record));

        if (options.stop && options.stop(round)) break;
    }
    for (int v = 0; v < graph.n(); ++v) trace.digests[v] = automata[v]->digest();
    return trace;
}

Trace lower_to_trace(const RoundTrace& rt, const EngineConfig& config) {
    Trace trace;
    trace.config = config;
    trace.config.model = Model::enhanced;
    trace.n = rt.n;
    trace.horizon = config.f_prog * Rational(std::int64_t(rt.rounds.size()));

    std::int64_t seq = 0;
    int next_instance = 0;
    Rational half = config.f_prog / 2;
    for (std::size_t r = 0; r < rt.rounds.size(); ++r) {
        const RoundRecord& record = rt.rounds[r];
        Rational start = config.f_prog * Rational(std::int64_t(r));
        std::map<int, int> instance_of; // broadcaster node -> instance id
        for (const auto& [node, msg] : record.broadcasters) {
            Event e;
            e.seq = seq++;
            e.time = start;
            e.kind = EventKind::bcast;
            e.node = node;
            e.instance = next_instance;
            e.payload = msg.payload >= 0 ? msg.payload : 0;
            instance_of[node] = next_instance++;
            trace.events.push_back(e);
        }
        for (int v = 0; v < rt.n; ++v) {
            for (const RoundDelivery& d : record.deliveries[v]) {
                Event e;
                e.seq = seq++;
                e.time = start + half;
                e.kind = EventKind::rcv;
                e.node = v;
                e.instance = instance_of.at(d.from);
                e.payload = d.msg.payload >= 0 ? d.msg.payload : 0;
                e.from = d.from;
                e.reliable = d.reliable ? 1 : 0;
                trace.events.push_back(e);
            }
        }
        for (const auto& [node, msg] : record.broadcasters) {
            Event e;
            e.seq = seq++;
            e.time = start + config.f_prog;
            e.kind = EventKind::abort;
            e.node = node;
            e.instance = instance_of.at(node);
            e.payload = msg.payload >= 0 ? msg.payload : 0;
            trace.events.push_back(e);
        }
    }
    trace.digests = rt.digests;
    trace.rebuild_instances();
    return trace;
}

} // namespace dualmac
