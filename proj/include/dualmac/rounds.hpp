#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "dualmac/graph.hpp"
#include "dualmac/rng.hpp"
#include "dualmac/trace.hpp"

namespace dualmac {

// One local-broadcast payload in the round-synchronous layer: a protocol tag
// plus at most one MMB payload, one sender id and one small bit-string, which
// keeps every packet constant-size.
struct RoundMessage {
    int kind = 0;
    int payload = -1;
    int sender_id = -1;
    std::uint64_t bits = 0;

    friend bool operator==(const RoundMessage&, const RoundMessage&) = default;
};

struct RoundDelivery {
    int from = -1;
    RoundMessage msg;
    bool reliable = false;
};

// Lock-step protocol interface: announce an intent at the top of each round,
// then observe what the adversary chose to deliver.
class RoundAutomaton {
public:
    virtual ~RoundAutomaton() = default;
    virtual std::optional<RoundMessage> on_round(int round, Rng& rng) = 0;
    virtual void on_deliveries(int round, bool broadcast_sent,
                               const std::vector<RoundDelivery>& deliveries) = 0;
    virtual std::string digest() const { return {}; }
};

// Resolves per-round delivery nondeterminism. For each silent node v the
// returned sender set must satisfy:
//   (R1) nonempty whenever a G-neighbor of v broadcast this round,
//        and always a subset of the broadcasters among N_G'(v);
//   (R2) empty for broadcasters themselves.
class RoundAdversary {
public:
    virtual ~RoundAdversary() = default;
    // broadcasters[v] true iff v broadcast this round. Returns, per node, the
    // list of sender vertices to deliver from.
    virtual std::vector<std::vector<int>> choose(int round, const DualGraph& graph,
                                                 const std::vector<bool>& broadcasters,
                                                 Rng& rng) = 0;
};

// Delivers exactly one uniformly random candidate to every silent node with
// at least one broadcasting G'-neighbor.
std::unique_ptr<RoundAdversary> make_uniform_one_adversary();

// Same, but prefers senders reachable only over unreliable edges whenever
// one is available: the most interfering choice the model allows.
std::unique_ptr<RoundAdversary> make_spiteful_adversary();

struct RoundRecord {
    std::vector<std::pair<int, RoundMessage>> broadcasters; // sorted by node
    std::vector<std::vector<RoundDelivery>> deliveries;     // per node
};

struct RoundTrace {
    int n = 0;
    std::vector<RoundRecord> rounds;
    std::map<int, std::string> digests;
    std::string to_json() const;
};

struct RoundRunOptions {
    int max_rounds = 0;
    std::uint64_t seed = 1;
    // Optional early stop, evaluated after each round (a harness-level global
    // inspection; the automata themselves keep no termination logic).
    std::function<bool(int round)> stop;
};

RoundTrace run_rounds(const DualGraph& graph,
                      std::vector<std::unique_ptr<RoundAutomaton>>& automata,
                      RoundAdversary& adversary, const RoundRunOptions& options);

// Reinterprets a round trace as a standard engine trace: round r's broadcasts
// become instances opened at r * F_prog, delivered mid-round, and aborted at
// the round boundary. The result is suitable for check().
Trace lower_to_trace(const RoundTrace& rt, const EngineConfig& config);

} // namespace dualmac
