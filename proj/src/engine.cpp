#include "dualmac/engine.hpp"

#include <algorithm>

#include "dualmac/errors.hpp"

namespace dualmac {

namespace {

struct PendingTimer {
    Rational at;
    int node;
    int tag;
    std::int64_t order; // set order breaks ties
};

} // namespace

class Engine {
public:
    Engine(const DualGraph& graph, std::vector<std::unique_ptr<NodeAutomaton>>& automata,
           Scheduler& scheduler, const EngineConfig& config, const RunOptions& options)
        : graph_(graph), automata_(automata), scheduler_(scheduler), config_(config),
          options_(options) {
        config_.validate();
        if (int(automata_.size()) != graph_.n())
            throw InvalidParameter("run: need one automaton per vertex");
        for (int v = 0; v < graph_.n(); ++v)
            rngs_.push_back(Rng(options_.seed).fork(0x6e6f6465ull, std::uint64_t(v)));
    }

    Trace execute() {
        wake_all();
        loop();
        finish();
        return std::move(trace_);
    }

    // --- called from EngineContext ---------------------------------------

    Rational now() const { return now_; }

    void broadcast(int node, int payload) {
        if (in_flight_[node] >= 0)
            throw ExecutionError("node " + std::to_string(node) +
                                 " broadcast while instance " +
                                 std::to_string(in_flight_[node]) +
                                 " is open (seq " + std::to_string(next_seq_) + ")");
        int id = int(instances_.size());
        InstanceState inst;
        inst.id = id;
        inst.sender = node;
        inst.payload = payload;
        inst.bcast_at = now_;
        inst.pending_g = graph_.neighbors_g(node);
        std::sort(inst.pending_g.begin(), inst.pending_g.end());
        instances_.push_back(std::move(inst));
        in_flight_[node] = id;
        emit(EventKind::bcast, node, id, payload);
    }

    void abort_current(int node) {
        if (config_.model != Model::enhanced)
            throw ModelViolation("abort in standard model (node " +
                                 std::to_string(node) + ")");
        int id = in_flight_[node];
        if (id < 0)
            throw ExecutionError("node " + std::to_string(node) +
                                 " abort with no open broadcast");
        InstanceState& inst = instances_[id];
        inst.terminated = true;
        inst.aborted = true;
        inst.term_time = now_;
        in_flight_[node] = -1;
        emit(EventKind::abort, node, id, inst.payload);
    }

    void set_timer(int node, const Rational& delay, int tag) {
        if (config_.model != Model::enhanced)
            throw ModelViolation("set_timer in standard model (node " +
                                 std::to_string(node) + ")");
        if (delay.is_negative())
            throw InvalidParameter("set_timer: negative delay");
        timers_.push_back({now_ + delay, node, tag, timer_order_++});
        emit(EventKind::timer_set, node, -1, tag);
    }

private:
    void wake_all() {
        for (int v = 0; v < graph_.n(); ++v) {
            auto it = options_.arrivals.find(v);
            if (it == options_.arrivals.end()) continue;
            std::vector<int> payloads = it->second;
            std::sort(payloads.begin(), payloads.end());
            for (int p : payloads) emit(EventKind::arrive, v, -1, p);
        }
        for (int v = 0; v < graph_.n(); ++v) {
            std::vector<int> payloads;
            auto it = options_.arrivals.find(v);
            if (it != options_.arrivals.end()) {
                payloads = it->second;
                std::sort(payloads.begin(), payloads.end());
            }
            EngineContext ctx(*this, v, rngs_[v]);
            automata_[v]->on_wake(ctx, payloads);
        }
    }

    void loop() {
        while (true) {
            auto decision = scheduler_.next(view());
            auto timer = earliest_timer();

            if (!decision && !timer) {
                if (open_count() > 0)
                    throw SchedulerError("scheduler idle while " +
                                         std::to_string(open_count()) +
                                         " instances are open");
                return; // quiescence
            }

            Rational decision_at = decision ? decision->at : options_.horizon;
            if (timer && (!decision || timers_[*timer].at <= decision_at)) {
                if (timers_[*timer].at > options_.horizon) return;
                fire_timer(*timer);
                continue;
            }
            if (!decision) return;
            if (decision->at > options_.horizon) return;
            apply(*decision);
        }
    }

    EngineView view() {
        view_open_.clear();
        for (const InstanceState& inst : instances_) {
            if (!inst.terminated)
                view_open_.push_back(&inst);
            else if (inst.aborted && now_ <= inst.term_time + config_.eps_abort)
                view_open_.push_back(&inst);
        }
        return EngineView{graph_, config_, now_, view_open_};
    }

    std::optional<std::size_t> earliest_timer() const {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < timers_.size(); ++i) {
            if (timers_[i].node < 0) continue; // consumed
            if (!best || timers_[i].at < timers_[*best].at ||
                (timers_[i].at == timers_[*best].at &&
                 timers_[i].order < timers_[*best].order))
                best = i;
        }
        return best;
    }

    void fire_timer(std::size_t idx) {
        PendingTimer t = timers_[idx];
        timers_[idx].node = -1;
        advance_to(t.at);
        emit(EventKind::timer_fire, t.node, -1, t.tag);
        EngineContext ctx(*this, t.node, rngs_[t.node]);
        automata_[t.node]->on_timer(ctx, t.tag);
    }

    void apply(const SchedulerDecision& d) {
        if (d.at < now_)
            throw SchedulerError("decision at " + d.at.str() + " is in the past (now " +
                                 now_.str() + ")");
        switch (d.kind) {
        case SchedulerDecision::Kind::idle_until:
            if (!(d.at > now_))
                throw SchedulerError("idle_until must advance time");
            advance_to(d.at);
            return;
        case SchedulerDecision::Kind::deliver: {
            InstanceState& inst = instance_for(d.instance);
            if (inst.terminated) {
                if (!inst.aborted)
                    throw SchedulerError("deliver on acked instance " +
                                         std::to_string(inst.id));
                if (d.at > inst.term_time + config_.eps_abort)
                    throw SchedulerError("deliver past abort grace of instance " +
                                         std::to_string(inst.id));
            }
            if (d.receiver < 0 || d.receiver >= graph_.n())
                throw SchedulerError("deliver to unknown vertex");
            if (!graph_.has_edge_gp(inst.sender, d.receiver))
                throw SchedulerError("deliver to non-E' neighbor " +
                                     std::to_string(d.receiver) + " of node " +
                                     std::to_string(inst.sender));
            if (inst.delivered.count(d.receiver))
                throw SchedulerError("duplicate delivery of instance " +
                                     std::to_string(inst.id) + " to " +
                                     std::to_string(d.receiver));
            advance_to(d.at);
            inst.delivered.insert(d.receiver);
            std::erase(inst.pending_g, d.receiver);
            bool reliable = graph_.has_edge_g(inst.sender, d.receiver);
            emit_rcv(d.receiver, inst.id, inst.payload, inst.sender, reliable);
            EngineContext ctx(*this, d.receiver, rngs_[d.receiver]);
            automata_[d.receiver]->on_receive(ctx, inst.payload, inst.sender, reliable);
            return;
        }
        case SchedulerDecision::Kind::ack: {
            InstanceState& inst = instance_for(d.instance);
            if (inst.terminated)
                throw SchedulerError("ack on terminated instance " +
                                     std::to_string(inst.id));
            if (!inst.pending_g.empty())
                throw SchedulerError("ack before all G-neighbors received instance " +
                                     std::to_string(inst.id));
            advance_to(d.at);
            inst.terminated = true;
            inst.term_time = now_;
            in_flight_[inst.sender] = -1;
            emit(EventKind::ack, inst.sender, inst.id, inst.payload);
            EngineContext ctx(*this, inst.sender, rngs_[inst.sender]);
            automata_[inst.sender]->on_ack(ctx, inst.payload);
            return;
        }
        }
    }

    InstanceState& instance_for(int id) {
        if (id < 0 || id >= int(instances_.size()))
            throw SchedulerError("decision names unknown instance " + std::to_string(id));
        return instances_[id];
    }

    int open_count() const {
        int k = 0;
        for (const auto& inst : instances_)
            if (!inst.terminated) ++k;
        return k;
    }

    void advance_to(const Rational& t) {
        if (t > now_) {
            now_ = t;
            same_time_events_ = 0;
        }
    }

    void emit(EventKind kind, int node, int instance, int payload) {
        Event e;
        e.seq = next_seq_++;
        e.time = now_;
        e.kind = kind;
        e.node = node;
        e.instance = instance;
        e.payload = payload;
        push_event(e);
    }

    void emit_rcv(int node, int instance, int payload, int from, bool reliable) {
        Event e;
        e.seq = next_seq_++;
        e.time = now_;
        e.kind = EventKind::rcv;
        e.node = node;
        e.instance = instance;
        e.payload = payload;
        e.from = from;
        e.reliable = reliable ? 1 : 0;
        push_event(e);
    }

    void push_event(const Event& e) {
        if (++same_time_events_ > config_.zero_delay_budget)
            throw LivelockError("zero-delay budget exceeded at t = " + now_.str());
        trace_.events.push_back(e);
    }

    void finish() {
        trace_.config = config_;
        trace_.n = graph_.n();
        // Quiescent runs end at the last event; horizon-cut runs at the horizon.
        bool any_open = open_count() > 0 || earliest_timer().has_value();
        trace_.horizon = any_open ? options_.horizon : now_;
        for (int v = 0; v < graph_.n(); ++v)
            trace_.digests[v] = automata_[v]->digest();
        trace_.rebuild_instances();
    }

    const DualGraph& graph_;
    std::vector<std::unique_ptr<NodeAutomaton>>& automata_;
    Scheduler& scheduler_;
    EngineConfig config_;
    RunOptions options_;

    Rational now_{0};
    std::int64_t next_seq_ = 0;
    int same_time_events_ = 0;
    std::int64_t timer_order_ = 0;
    std::vector<InstanceState> instances_;
    std::vector<int> in_flight_ = std::vector<int>(graph_.n(), -1);
    std::vector<PendingTimer> timers_;
    std::vector<Rng> rngs_;
    std::vector<const InstanceState*> view_open_;
    Trace trace_;
};

Rational EngineContext::now() const { return engine_->now(); }
void EngineContext::broadcast(int payload) { engine_->broadcast(node_, payload); }
void EngineContext::abort_current() { engine_->abort_current(node_); }
void EngineContext::set_timer(const Rational& delay, int tag) {
    engine_->set_timer(node_, delay, tag);
}

Trace run(const DualGraph& graph, std::vector<std::unique_ptr<NodeAutomaton>>& automata,
          Scheduler& scheduler, const EngineConfig& config, const RunOptions& options) {
    Engine engine(graph, automata, scheduler, config, options);
    return engine.execute();
}

} // namespace dualmac
