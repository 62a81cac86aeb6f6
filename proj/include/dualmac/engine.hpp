#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "dualmac/graph.hpp"
#include "dualmac/rng.hpp"
#include "dualmac/trace.hpp"

namespace dualmac {

class Engine;

// Handed to automaton callbacks; actions take effect immediately at the
// current time, as a zero-delay chain after the triggering event.
class EngineContext {
public:
    int node() const { return node_; }
    Rational now() const;
    Rng& rng() { return *rng_; }

    // Start a local broadcast. Errors if a previous broadcast by this node
    // is still unterminated (user well-formedness).
    void broadcast(int payload);

    // Enhanced model only: abort this node's open broadcast.
    void abort_current();

    // Enhanced model only: request a timer_fire after `delay`.
    void set_timer(const Rational& delay, int tag);

private:
    friend class Engine;
    EngineContext(Engine& engine, int node, Rng& rng)
        : engine_(&engine), node_(node), rng_(&rng) {}
    Engine* engine_;
    int node_;
    Rng* rng_;
};

// Event-driven protocol interface. The engine wakes every automaton at time
// zero with its initial payloads, then feeds it receive/ack/timer events.
class NodeAutomaton {
public:
    virtual ~NodeAutomaton() = default;
    virtual void on_wake(EngineContext& ctx, const std::vector<int>& arrivals) = 0;
    virtual void on_receive(EngineContext& ctx, int payload, int from, bool reliable) = 0;
    virtual void on_ack(EngineContext& ctx, int payload) = 0;
    virtual void on_timer(EngineContext& ctx, int tag) { (void)ctx, (void)tag; }
    virtual std::string digest() const { return {}; }
};

// Live view of one open (or recently aborted) instance, for schedulers.
struct InstanceState {
    int id = -1;
    int sender = -1;
    int payload = -1;
    Rational bcast_at;
    std::set<int> delivered;       // receivers that already got a rcv
    std::vector<int> pending_g;    // G-neighbors still owed a delivery
    bool terminated = false;
    bool aborted = false;
    Rational term_time;
};

struct SchedulerDecision {
    enum class Kind { deliver, ack, idle_until };
    Kind kind = Kind::idle_until;
    int instance = -1;
    int receiver = -1;
    Rational at;

    static SchedulerDecision deliver(int instance, int receiver, Rational at) {
        return {Kind::deliver, instance, receiver, at};
    }
    static SchedulerDecision ack(int instance, Rational at) {
        return {Kind::ack, instance, -1, at};
    }
    static SchedulerDecision idle_until(Rational at) {
        return {Kind::idle_until, -1, -1, at};
    }
};

// Read-only engine state offered to the scheduler.
struct EngineView {
    const DualGraph& graph;
    const EngineConfig& config;
    Rational now;
    // Unterminated instances plus aborted ones still inside the eps_abort
    // grace window, ordered by id.
    std::vector<const InstanceState*> open;
};

// Resolves the model's nondeterminism. next() may be called repeatedly with
// an evolving view; it must return the earliest decision still pending per
// the view (the engine applies exactly what it returns, in time order).
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual std::optional<SchedulerDecision> next(const EngineView& view) = 0;
};

struct RunOptions {
    std::map<int, std::vector<int>> arrivals; // node -> payloads at t = 0
    Rational horizon{1'000'000};
    std::uint64_t seed = 1;
};

// Executes the automata against the scheduler and records the trace.
// Deterministic in (graph, automata, scheduler, config, seed).
Trace run(const DualGraph& graph,
          std::vector<std::unique_ptr<NodeAutomaton>>& automata,
          Scheduler& scheduler, const EngineConfig& config,
          const RunOptions& options);

} // namespace dualmac
