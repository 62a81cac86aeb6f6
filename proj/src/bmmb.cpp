#include "dualmac/bmmb.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

void BmmbAutomaton::on_wake(EngineContext& ctx, const std::vector<int>& arrivals) {
    for (int p : arrivals) {
        if (rcvd_.insert(p).second) queue_.push_back(p);
    }
    maybe_send(ctx);
}

void BmmbAutomaton::on_receive(EngineContext& ctx, int payload, int, bool) {
    if (rcvd_.insert(payload).second) queue_.push_back(payload);
    maybe_send(ctx);
}

void BmmbAutomaton::on_ack(EngineContext& ctx, int payload) {
    sent_.insert(payload);
    in_flight_ = false;
    if (!queue_.empty() && queue_.front() == payload) queue_.erase(queue_.begin());
    maybe_send(ctx);
}

void BmmbAutomaton::maybe_send(EngineContext& ctx) {
    if (!in_flight_ && !queue_.empty()) {
        in_flight_ = true;
        ctx.broadcast(queue_.front());
    }
}

std::string BmmbAutomaton::digest() const {
    std::ostringstream out;
    out << "q=[";
    for (std::size_t i = 0; i < queue_.size(); ++i)
        out << (i ? "," : "") << queue_[i];
    out << "];rcvd=" << rcvd_.size() << ";sent=" << sent_.size();
    return out.str();
}

std::vector<std::unique_ptr<NodeAutomaton>> make_bmmb_automata(int n) {
    std::vector<std::unique_ptr<NodeAutomaton>> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) out.push_back(std::make_unique<BmmbAutomaton>());
    return out;
}

void NodeTimeline::record_get(int payload, const Rational& t) {
    auto it = get_times_.find(payload);
    if (it == get_times_.end() || t < it->second) get_times_[payload] = t;
}

void NodeTimeline::record_ack(int payload, const Rational& t) {
    auto it = ack_times_.find(payload);
    if (it == ack_times_.end() || t < it->second) ack_times_[payload] = t;
}

bool NodeTimeline::got(int payload, const Rational& t) const {
    auto it = get_times_.find(payload);
    return it != get_times_.end() && it->second <= t;
}

bool NodeTimeline::acked(int payload, const Rational& t) const {
    auto it = ack_times_.find(payload);
    return it != ack_times_.end() && it->second <= t;
}

int NodeTimeline::received_count(const Rational& t) const {
    return int(std::count_if(get_times_.begin(), get_times_.end(),
                             [&](const auto& kv) { return kv.second <= t; }));
}

int NodeTimeline::completed_count(const Rational& t) const {
    return int(std::count_if(ack_times_.begin(), ack_times_.end(),
                             [&](const auto& kv) { return kv.second <= t; }));
}

std::vector<NodeTimeline> build_timeline(const Trace& trace) {
    std::vector<NodeTimeline> out(trace.n);
    for (const Event& e : trace.events) {
        switch (e.kind) {
        case EventKind::arrive:
            out.at(e.node).record_get(e.payload, e.time);
            break;
        case EventKind::rcv:
            out.at(e.node).record_get(e.payload, e.time);
            break;
        case EventKind::ack:
            out.at(e.node).record_ack(e.payload, e.time);
            break;
        case EventKind::bcast:
            break;
        default:
            throw AnalysisError("build_timeline: unexpected event kind '" +
                                event_kind_name(e.kind) + "' in a broadcast trace");
        }
    }
    return out;
}

std::string AssertionReport::to_json() const {
    nlohmann::json j;
    j["passed"] = passed();
    j["counterexamples"] = nlohmann::json::array();
    for (const BoundCounterexample& c : counterexamples) {
        nlohmann::json item;
        item["payload"] = c.payload;
        item["node"] = c.node;
        item["ell"] = c.ell;
        item["at"] = c.at.str();
        item["detail"] = c.detail;
        j["counterexamples"].push_back(item);
    }
    return j.dump(2) + "\n";
}

Rational t_bound(int d, int ell, int r, const EngineConfig& config) {
    if (ell < 1) throw InvalidParameter("t_bound: ell must be >= 1");
    if (d < 0) throw InvalidParameter("t_bound: d must be >= 0");
    if (r < 1) throw InvalidParameter("t_bound: r must be >= 1");
    Rational value = config.f_prog * Rational(d + (r + 1) * ell - 2) +
                     config.f_ack * Rational(r * (ell - 1));
    return value < Rational(0) ? Rational(0) : value;
}

namespace {

// Origins of the arrived payloads: payload -> node.
std::map<int, int> arrival_origins(const Trace& trace) {
    std::map<int, int> origins;
    for (const Event& e : trace.events) {
        if (e.kind != EventKind::arrive) continue;
        if (origins.count(e.payload))
            throw AnalysisError("trace: payload " + std::to_string(e.payload) +
                                " arrived more than once");
        origins[e.payload] = e.node;
        if (!e.time.is_zero())
            throw AnalysisError("trace: arrivals must all occur at time 0");
    }
    return origins;
}

} // namespace

AssertionReport assert_arbitrary_bound(const Trace& trace, const DualGraph& graph,
                                       const EngineConfig& config, int k) {
    AssertionReport report;
    auto timelines = build_timeline(trace);
    auto origins = arrival_origins(trace);
    if (int(origins.size()) > k)
        throw AnalysisError("assert_arbitrary_bound: trace has more than k payloads");

    for (const auto& [payload, origin] : origins) {
        auto dist = bfs_distances(graph, origin);
        for (int v = 0; v < graph.n(); ++v) {
            if (dist[v] < 0) continue; // other component
            for (int ell = 1; ell <= k; ++ell) {
                Rational at = config.f_ack * Rational(dist[v] + ell);
                const NodeTimeline& tl = timelines[v];
                if (!tl.acked(payload, at) && tl.completed_count(at) < ell) {
                    report.counterexamples.push_back(
                        {payload, v, ell, at,
                         "node " + std::to_string(v) + " has neither completed payload " +
                             std::to_string(payload) + " nor " + std::to_string(ell) +
                             " messages by t=" + at.str()});
                }
            }
            Rational recv_by = config.f_ack * Rational(dist[v] + k);
            if (!timelines[v].got(payload, recv_by)) {
                report.counterexamples.push_back(
                    {payload, v, k, recv_by,
                     "node " + std::to_string(v) + " had not received payload " +
                         std::to_string(payload) + " by t=" + recv_by.str()});
            }
        }
    }
    return report;
}

AssertionReport assert_r_restricted_bound(const Trace& trace, const DualGraph& graph,
                                          const EngineConfig& config, int r, int k) {
    if (!is_r_restricted(graph, r))
        throw PreconditionViolation("assert_r_restricted_bound: graph is not " +
                                    std::to_string(r) + "-restricted");
    AssertionReport report;
    auto timelines = build_timeline(trace);
    auto origins = arrival_origins(trace);

    for (const auto& [payload, origin] : origins) {
        auto dist = bfs_distances(graph, origin);
        for (int j = 0; j < graph.n(); ++j) {
            if (dist[j] < 0) continue;
            const NodeTimeline& tl = timelines[j];
            for (int ell = 1; ell <= k; ++ell) {
                Rational t1 = t_bound(dist[j], ell, r, config);
                if (!tl.got(payload, t1) && tl.received_count(t1) < ell) {
                    report.counterexamples.push_back(
                        {payload, j, ell, t1,
                         "part 1: node " + std::to_string(j) + " received only " +
                             std::to_string(tl.received_count(t1)) + " by t=" +
                             t1.str()});
                }
                Rational t2 = t1 + config.f_ack;
                if (!tl.acked(payload, t2) && tl.completed_count(t2) < ell) {
                    report.counterexamples.push_back(
                        {payload, j, ell, t2,
                         "part 2: node " + std::to_string(j) + " completed only " +
                             std::to_string(tl.completed_count(t2)) + " by t=" +
                             t2.str()});
                }
            }
        }
    }
    return report;
}

CompletionReport measure_completion(const Trace& trace, const DualGraph& graph) {
    CompletionReport report;
    auto timelines = build_timeline(trace);
    auto origins = arrival_origins(trace);
    report.overall = Rational(0);
    for (const auto& [payload, origin] : origins) {
        auto dist = bfs_distances(graph, origin);
        Rational last(0);
        int component = 0, have = 0;
        bool complete = true;
        for (int v = 0; v < graph.n(); ++v) {
            if (dist[v] < 0) continue;
            ++component;
            auto it = timelines[v].get_times().find(payload);
            if (it == timelines[v].get_times().end()) {
                complete = false;
            } else {
                ++have;
                last = dualmac::max(last, it->second);
            }
        }
        report.coverage[payload] = component ? double(have) / component : 1.0;
        if (complete) {
            report.completion[payload] = last;
            report.overall = dualmac::max(report.overall, last);
        } else {
            report.all_delivered = false;
        }
    }
    return report;
}

} // namespace dualmac
