#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "dualmac/graph.hpp"
#include "dualmac/rounds.hpp"

namespace dualmac {

int log2ceil(int n); // smallest L with 2^L >= n, at least 1

// Tunable protocol constants. The structural shape (phases of election +
// announcement, three-round gather periods, three-round relay periods inside
// spread phases) is fixed; these factors size the repetition counts.
struct FmmbParams {
    double c = 1.5;        // grey-zone constant the graph is assumed to obey
    double p_act = 0.0;    // activation probability; 0 derives min(1/(4c^2), 1/4)
    int election_factor = 4;
    int announce_factor = 8;
    int phase_factor = 8;
    int gather_factor = 24;
    int localbcast_factor = 12;
    int spread_phase_factor = 4;  // phase cap = factor * (D_H + k) + slack
    int spread_phase_slack = 16;

    void validate() const;

    double activation() const {
        if (p_act > 0.0) return p_act;
        return std::min(0.25, 1.0 / (4.0 * c * c));
    }
    int election_rounds(int n) const { return election_factor * log2ceil(n); }
    int announce_rounds(int n) const {
        return announce_factor * int(std::ceil(c * c * log2ceil(n)));
    }
    int mis_phase_cap(int n) const {
        int l = log2ceil(n);
        return phase_factor * int(std::ceil(c * c * double(l) * l));
    }
    int gather_period_cap(int n, int k) const {
        return gather_factor * int(std::ceil(c * c * (k + log2ceil(n))));
    }
    int localbcast_periods(int n) const {
        return localbcast_factor * int(std::ceil(c * c * log2ceil(n)));
    }
    int spread_phase_cap(int d_h, int k) const {
        return spread_phase_factor * (d_h + k) + spread_phase_slack;
    }
};

struct MisResult {
    std::set<int> mis;
    RoundTrace trace;
    int rounds = 0;
    int phases = 0;
};

// Randomized MIS election: phases of bit-string election rounds followed by
// announcement rounds; survivors join, reliably announced nodes retire.
// Stops early once every node is decided (cap: mis_phase_cap phases).
MisResult mis(const DualGraph& graph, const FmmbParams& params,
              RoundAdversary& adversary, std::uint64_t seed);

struct MisWitness {
    bool ok = true;
    std::string detail; // names the offending edge or undominated vertex
};

MisWitness verify_mis(const DualGraph& graph, const std::set<int>& s);

struct GatherResult {
    std::map<int, std::set<int>> owned; // final M_v for every node
    RoundTrace trace;
    int rounds = 0;
    int periods = 0;
    bool covered = false; // every payload owned by at least one MIS node
    std::map<int, std::set<int>> seen; // reliable payload sightings per node
};

// Three-round gather periods: announce, offer, acknowledge. Message sets of
// non-MIS nodes shrink only after a reliable acknowledgment naming the
// payload, so no payload is ever lost. Requires a valid MIS.
GatherResult gather(const DualGraph& graph, const std::set<int>& s,
                    const std::map<int, std::vector<int>>& initial,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed);

struct Overlay {
    std::vector<int> nodes;  // MIS members, ascending
    EdgeSet edges;           // pairs within 3 G-hops
    int diameter = 0;        // max over overlay components
};

Overlay overlay(const DualGraph& graph, const std::set<int>& s);

struct SpreadResult {
    std::map<int, std::set<int>> have; // payloads known per node at the end
    std::map<int, std::set<int>> sent; // M'_v per MIS node
    RoundTrace trace;
    int rounds = 0;
    int phases = 0;
    bool complete = false; // every MIS node sent every component payload
};

// Pipelined spreading: per phase each MIS node picks one unsent payload and
// runs the three-round relay procedure for localbcast_periods periods; all
// nodes absorb reliable receptions. Stops once every MIS node has sent every
// payload of its component (cap: spread_phase_cap phases).
SpreadResult spread(const DualGraph& graph, const std::set<int>& s,
                    const std::map<int, std::set<int>>& initial_have,
                    const std::map<int, std::vector<int>>& arrivals,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed);

struct FmmbResult {
    std::set<int> mis;
    bool mis_valid = false;
    bool gather_covered = false;
    bool spread_complete = false;
    bool delivered_all = false; // every node knows every component payload
    int rounds_mis = 0;
    int rounds_gather = 0;
    int rounds_spread = 0;
    int d_h = 0;
    int diameter_g = 0;
    std::map<int, std::set<int>> delivered;
    RoundTrace trace_mis;
    RoundTrace trace_gather;
    RoundTrace trace_spread;

    int total_rounds() const { return rounds_mis + rounds_gather + rounds_spread; }
    std::string to_json() const;
};

// Composes mis -> gather -> overlay -> spread. Stage failures (invalid MIS,
// incomplete gather) do not throw; they surface as flags and an incomplete
// delivered map.
FmmbResult fmmb_run(const DualGraph& graph,
                    const std::map<int, std::vector<int>>& arrivals,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed);

} // namespace dualmac
