#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "dualmac/engine.hpp"

namespace dualmac {

// Flood-once broadcast: FIFO queue plus a received set; every payload is
// broadcast exactly once, the first time it is seen. Initial payloads are
// enqueued in ascending id order.
class BmmbAutomaton : public NodeAutomaton {
public:
    void on_wake(EngineContext& ctx, const std::vector<int>& arrivals) override;
    void on_receive(EngineContext& ctx, int payload, int from, bool reliable) override;
    void on_ack(EngineContext& ctx, int payload) override;
    std::string digest() const override;

    const std::set<int>& rcvd() const { return rcvd_; }
    const std::set<int>& sent() const { return sent_; }
    const std::vector<int>& queue() const { return queue_; }
    bool in_flight() const { return in_flight_; }

private:
    void maybe_send(EngineContext& ctx);

    std::vector<int> queue_; // head stays in place while in flight
    std::set<int> rcvd_;
    std::set<int> sent_;
    bool in_flight_ = false;
};

std::vector<std::unique_ptr<NodeAutomaton>> make_bmmb_automata(int n);

// Per-node message history reconstructed from a trace: first arrive-or-rcv
// time ("get") and own-ack time per payload. R/C set queries evaluate the
// state after all events with time <= t.
class NodeTimeline {
public:
    void record_get(int payload, const Rational& t);
    void record_ack(int payload, const Rational& t);

    bool got(int payload, const Rational& t) const;
    bool acked(int payload, const Rational& t) const;
    int received_count(const Rational& t) const;  // |R(t)|
    int completed_count(const Rational& t) const; // |C(t)|

    const std::map<int, Rational>& get_times() const { return get_times_; }
    const std::map<int, Rational>& ack_times() const { return ack_times_; }

private:
    std::map<int, Rational> get_times_;
    std::map<int, Rational> ack_times_;
};

// Timelines for every node. Throws AnalysisError on traces containing event
// kinds a standard-model broadcast run cannot produce.
std::vector<NodeTimeline> build_timeline(const Trace& trace);

struct BoundCounterexample {
    int payload = -1;
    int node = -1;
    int ell = 0;
    Rational at;
    std::string detail;
};

struct AssertionReport {
    std::vector<BoundCounterexample> counterexamples;
    bool passed() const { return counterexamples.empty(); }
    std::string to_json() const;
};

// t_{d,l} = (d + (r+1)l - 2) * F_prog + r * (l-1) * F_ack, clamped at zero.
Rational t_bound(int d, int ell, int r, const EngineConfig& config);

// For every message m, node v in the origin's G-component and l in [1, k]:
// by time (d_G(v, origin) + l) * F_ack the node has either completed m or
// completed at least l messages; and it has received m by (d + k) * F_ack.
AssertionReport assert_arbitrary_bound(const Trace& trace, const DualGraph& graph,
                                       const EngineConfig& config, int k);

// r-restricted refinement: part 1 bounds receives at t_{d,l}, part 2 bounds
// completions at t_{d,l} + F_ack. Requires is_r_restricted(graph, r).
AssertionReport assert_r_restricted_bound(const Trace& trace, const DualGraph& graph,
                                          const EngineConfig& config, int r, int k);

// Last get time per payload among nodes of the origin's G-component.
// undelivered lists payloads that never reached part of their component,
// with the fraction of the component covered.
struct CompletionReport {
    std::map<int, Rational> completion; // payload -> time
    std::map<int, double> coverage;     // payload -> delivered fraction (all payloads)
    Rational overall;                   // max over complete payloads
    bool all_delivered = true;
};

CompletionReport measure_completion(const Trace& trace, const DualGraph& graph);

} // namespace dualmac
