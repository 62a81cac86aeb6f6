#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualmac/rational.hpp"

namespace dualmac {

enum class Model { standard, enhanced };

std::string model_name(Model m);
Model model_from_name(const std::string& name);

struct EngineConfig {
    Rational f_ack{8};
    Rational f_prog{1};
    Rational eps_abort{0};
    Model model = Model::standard;
    // Max events sharing a single timestamp before the run is declared a
    // livelock. Legitimate zero-delay cascades stay far below this.
    int zero_delay_budget = 200000;

    void validate() const;
};

enum class EventKind { arrive, bcast, rcv, ack, abort, timer_set, timer_fire };

std::string event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& name);

struct Event {
    std::int64_t seq = 0;
    Rational time;
    EventKind kind = EventKind::arrive;
    int node = -1;
    int instance = -1;  // -1 = not applicable
    int payload = -1;   // also carries the timer tag for timer events
    int from = -1;
    int reliable = -1;  // 0/1, -1 = not applicable
};

// One local-broadcast lifecycle, reconstructed from the event list.
struct MessageInstance {
    int id = -1;
    int sender = -1;
    int payload = -1;
    Rational bcast_at;
    std::int64_t bcast_seq = 0;
    std::vector<std::pair<int, Rational>> rcv_events; // (receiver, time)
    enum class Term { open, acked, aborted };
    Term term = Term::open;
    Rational term_time;
    std::int64_t term_seq = 0;

    bool terminated() const { return term != Term::open; }
    bool delivered_to(int node) const;
};

struct Trace {
    EngineConfig config;
    int n = 0;          // vertex count of the graph this ran on
    Rational horizon;   // time at which the run ended
    std::vector<Event> events;
    std::map<int, std::string> digests; // node -> final automaton digest

    // Derived caches; rebuild_instances() refreshes them from events.
    std::vector<MessageInstance> instances;
    std::vector<int> open_at_horizon;

    void rebuild_instances(); // throws ParseError on dangling/duplicate ids

    std::string to_jsonl() const;
    static Trace from_jsonl(const std::string& text);
};

} // namespace dualmac
