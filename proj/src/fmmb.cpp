#include "dualmac/fmmb.hpp"

#include <algorithm>

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

int log2ceil(int n) {
    int l = 1;
    while ((1 << l) < n) ++l;
    return l;
}

void FmmbParams::validate() const {
    if (c < 1.0) throw InvalidParameter("FmmbParams: c must be >= 1");
    if (activation() <= 0.0 || activation() > 0.25)
        throw InvalidParameter("FmmbParams: activation must be in (0, 1/4]");
    if (election_factor < 1 || announce_factor < 1 || phase_factor < 1 ||
        gather_factor < 1 || localbcast_factor < 1 || spread_phase_factor < 1)
        throw InvalidParameter("FmmbParams: all repetition factors must be >= 1");
}

namespace {

enum MsgKind : int {
    kElect = 1,
    kAnnounce = 2,
    kGatherAnnounce = 3,
    kGatherOffer = 4,
    kGatherAck = 5,
    kSpread = 6,
};

// Component-local payload targets: component index per node plus the payload
// set originating in each component.
struct Targets {
    std::vector<int> comp_of;
    std::map<int, std::set<int>> payloads; // component -> payloads
};

Targets component_targets(const DualGraph& graph,
                          const std::map<int, std::vector<int>>& arrivals) {
    Targets t;
    t.comp_of.assign(graph.n(), -1);
    auto m = metrics(graph);
    for (std::size_t c = 0; c < m.components.size(); ++c)
        for (int v : m.components[c]) t.comp_of[v] = int(c);
    for (const auto& [node, payloads] : arrivals)
        for (int p : payloads) t.payloads[t.comp_of.at(node)].insert(p);
    return t;
}

// --- MIS ------------------------------------------------------------------

class MisAutomaton : public RoundAutomaton {
public:
    MisAutomaton(int node, int bits_len, int election_rounds, int announce_rounds,
                 double p_act)
        : node_(node), bits_len_(bits_len), election_(election_rounds),
          announce_(announce_rounds), p_act_(p_act) {}

    enum class Status { active, temp_inactive, perm_inactive, in_mis };

    Status status() const { return status_; }
    bool decided() const {
        return status_ == Status::in_mis || status_ == Status::perm_inactive;
    }

    std::optional<RoundMessage> on_round(int round, Rng& rng) override {
        int p = election_ + announce_;
        int idx = round % p;
        if (idx == 0) {
            // Phase start: temporary deactivation expires, actives draw a
            // fresh bit-string.
            if (status_ == Status::temp_inactive) status_ = Status::active;
            joined_this_phase_ = false;
            if (status_ == Status::active) {
                bits_ = 0;
                for (int i = 0; i < bits_len_; ++i)
                    bits_ = (bits_ << 1) | (rng.next() & 1u);
            }
        }
        if (idx == election_ && status_ == Status::active) {
            // Survived every election round of this phase.
            status_ = Status::in_mis;
            joined_this_phase_ = true;
        }
        if (idx < election_) {
            if (status_ == Status::active && bit_set(idx)) {
                RoundMessage m;
                m.kind = kElect;
                m.sender_id = node_;
                m.bits = bits_;
                return m;
            }
            return std::nullopt;
        }
        if (joined_this_phase_ && rng.bernoulli(p_act_)) {
            RoundMessage m;
            m.kind = kAnnounce;
            m.sender_id = node_;
            return m;
        }
        return std::nullopt;
    }

    void on_deliveries(int round, bool broadcast_sent,
                       const std::vector<RoundDelivery>& deliveries) override {
        int p = election_ + announce_;
        int idx = round % p;
        if (idx < election_) {
            if (!broadcast_sent && !deliveries.empty() && status_ == Status::active)
                status_ = Status::temp_inactive;
        } else {
            if (status_ == Status::active || status_ == Status::temp_inactive) {
                for (const RoundDelivery& d : deliveries) {
                    if (d.reliable && d.msg.kind == kAnnounce) {
                        status_ = Status::perm_inactive;
                        break;
                    }
                }
            }
        }
    }

    std::string digest() const override {
        switch (status_) {
        case Status::active: return "active";
        case Status::temp_inactive: return "temp";
        case Status::perm_inactive: return "perm";
        case Status::in_mis: return "mis";
        }
        return {};
    }

private:
    bool bit_set(int idx) const {
        return (bits_ >> (bits_len_ - 1 - idx)) & 1u;
    }

    int node_;
    int bits_len_;
    int election_;
    int announce_;
    double p_act_;
    Status status_ = Status::active;
    bool joined_this_phase_ = false;
    std::uint64_t bits_ = 0;
};

} // namespace

MisResult mis(const DualGraph& graph, const FmmbParams& params,
              RoundAdversary& adversary, std::uint64_t seed) {
    params.validate();
    int n = graph.n();
    int l = log2ceil(n);
    int election = params.election_factor * l;
    if (election > 64)
        throw InvalidParameter("mis: election bit-string longer than 64 bits");
    int announce = params.announce_rounds(n);
    int phase_len = election + announce;
    int cap_rounds = params.mis_phase_cap(n) * phase_len;

    std::vector<MisAutomaton*> raw;
    std::vector<std::unique_ptr<RoundAutomaton>> automata;
    for (int v = 0; v < n; ++v) {
        auto a = std::make_unique<MisAutomaton>(v, params.election_factor * l, election,
                                                announce, params.activation());
        raw.push_back(a.get());
        automata.push_back(std::move(a));
    }

    RoundRunOptions options;
    options.max_rounds = cap_rounds;
    options.seed = seed;
    options.stop = [&](int round) {
        if ((round + 1) % phase_len != 0) return false;
        return std::all_of(raw.begin(), raw.end(),
                           [](const MisAutomaton* a) { return a->decided(); });
    };

    MisResult result;
    result.trace = run_rounds(graph, automata, adversary, options);
    result.rounds = int(result.trace.rounds.size());
    result.phases = (result.rounds + phase_len - 1) / phase_len;
    for (int v = 0; v < n; ++v)
        if (raw[v]->status() == MisAutomaton::Status::in_mis) result.mis.insert(v);
    return result;
}

MisWitness verify_mis(const DualGraph& graph, const std::set<int>& s) {
    for (int v : s) {
        for (int u : graph.neighbors_g(v)) {
            if (u > v && s.count(u))
                return {false, "edge (" + std::to_string(v) + "," + std::to_string(u) +
                                   ") inside the set"};
        }
    }
    for (int v = 0; v < graph.n(); ++v) {
        if (s.count(v)) continue;
        bool dominated = false;
        for (int u : graph.neighbors_g(v))
            if (s.count(u)) dominated = true;
        if (!dominated)
            return {false, "vertex " + std::to_string(v) + " has no neighbor in the set"};
    }
    return {};
}

// --- gather ----------------------------------------------------------------

namespace {

class GatherAutomaton : public RoundAutomaton {
public:
    GatherAutomaton(int node, bool is_mis, std::set<int> initial, double p_act)
        : node_(node), is_mis_(is_mis), owned_(std::move(initial)), p_act_(p_act) {}

    const std::set<int>& owned() const { return owned_; }
    const std::set<int>& seen() const { return seen_; }

    std::optional<RoundMessage> on_round(int round, Rng& rng) override {
        switch (round % 3) {
        case 0: {
            heard_announce_ = false;
            offers_.clear();
            if (is_mis_ && rng.bernoulli(p_act_)) {
                RoundMessage m;
                m.kind = kGatherAnnounce;
                m.sender_id = node_;
                return m;
            }
            return std::nullopt;
        }
        case 1: {
            if (!is_mis_ && heard_announce_ && !owned_.empty()) {
                RoundMessage m;
                m.kind = kGatherOffer;
                m.payload = *owned_.begin();
                m.sender_id = node_;
                return m;
            }
            return std::nullopt;
        }
        default: {
            if (is_mis_ && !offers_.empty()) {
                RoundMessage m;
                m.kind = kGatherAck;
                m.payload = offers_.front();
                m.sender_id = node_;
                return m;
            }
            return std::nullopt;
        }
        }
    }

    void on_deliveries(int round, bool,
                       const std::vector<RoundDelivery>& deliveries) override {
        for (const RoundDelivery& d : deliveries) {
            if (d.reliable && d.msg.payload >= 0) seen_.insert(d.msg.payload);
        }
        switch (round % 3) {
        case 0:
            if (!is_mis_) {
                for (const RoundDelivery& d : deliveries)
                    if (d.reliable && d.msg.kind == kGatherAnnounce)
                        heard_announce_ = true;
            }
            break;
        case 1:
            if (is_mis_) {
                for (const RoundDelivery& d : deliveries) {
                    if (d.reliable && d.msg.kind == kGatherOffer) {
                        owned_.insert(d.msg.payload);
                        offers_.push_back(d.msg.payload);
                    }
                }
            }
            break;
        default:
            if (!is_mis_) {
                for (const RoundDelivery& d : deliveries)
                    if (d.reliable && d.msg.kind == kGatherAck)
                        owned_.erase(d.msg.payload);
            }
            break;
        }
    }

    std::string digest() const override {
        return (is_mis_ ? "mis:" : "node:") + std::to_string(owned_.size());
    }

private:
    int node_;
    bool is_mis_;
    std::set<int> owned_;
    double p_act_;
    bool heard_announce_ = false;
    std::vector<int> offers_;
    std::set<int> seen_;
};

} // namespace

GatherResult gather(const DualGraph& graph, const std::set<int>& s,
                    const std::map<int, std::vector<int>>& initial,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed) {
    params.validate();
    auto witness = verify_mis(graph, s);
    if (!witness.ok)
        throw PreconditionViolation("gather: set is not a maximal independent set: " +
                                    witness.detail);
    int k = 0;
    std::set<int> all_payloads;
    for (const auto& [node, payloads] : initial)
        for (int p : payloads) all_payloads.insert(p);
    k = int(all_payloads.size());

    std::vector<GatherAutomaton*> raw;
    std::vector<std::unique_ptr<RoundAutomaton>> automata;
    for (int v = 0; v < graph.n(); ++v) {
        std::set<int> mine;
        auto it = initial.find(v);
        if (it != initial.end()) mine.insert(it->second.begin(), it->second.end());
        auto a = std::make_unique<GatherAutomaton>(v, s.count(v) > 0, std::move(mine),
                                                   params.activation());
        raw.push_back(a.get());
        automata.push_back(std::move(a));
    }

    auto covered = [&]() {
        std::set<int> at_mis;
        for (int v : s) {
            const auto& o = raw[v]->owned();
            at_mis.insert(o.begin(), o.end());
        }
        return std::includes(at_mis.begin(), at_mis.end(), all_payloads.begin(),
                             all_payloads.end());
    };

    RoundRunOptions options;
    options.max_rounds = params.gather_period_cap(graph.n(), k) * 3;
    options.seed = seed;
    options.stop = [&](int round) { return (round + 1) % 3 == 0 && covered(); };

    GatherResult result;
    result.trace = run_rounds(graph, automata, adversary, options);
    result.rounds = int(result.trace.rounds.size());
    result.periods = (result.rounds + 2) / 3;
    result.covered = covered();
    for (int v = 0; v < graph.n(); ++v) {
        result.owned[v] = raw[v]->owned();
        result.seen[v] = raw[v]->seen();
    }
    return result;
}

// --- overlay ---------------------------------------------------------------

Overlay overlay(const DualGraph& graph, const std::set<int>& s) {
    Overlay h;
    h.nodes.assign(s.begin(), s.end());
    for (int v : s) {
        auto dist = bfs_distances(graph, v);
        for (int u : s)
            if (u > v && dist[u] >= 1 && dist[u] <= 3) h.edges.insert({v, u});
    }
    // Diameter per overlay component via BFS over h.edges.
    std::map<int, std::vector<int>> adj;
    for (const auto& [u, v] : h.edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (int src : h.nodes) {
        std::map<int, int> dist{{src, 0}};
        std::vector<int> queue{src};
        for (std::size_t i = 0; i < queue.size(); ++i) {
            int x = queue[i];
            for (int y : adj[x]) {
                if (!dist.count(y)) {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                    h.diameter = std::max(h.diameter, dist[y]);
                }
            }
        }
    }
    return h;
}

// --- spread ----------------------------------------------------------------

namespace {

class SpreadAutomaton : public RoundAutomaton {
public:
    SpreadAutomaton(int node, bool is_mis, std::set<int> have, double p_act,
                    int periods_per_phase)
        : node_(node), is_mis_(is_mis), have_(std::move(have)), p_act_(p_act),
          phase_rounds_(3 * periods_per_phase) {}

    const std::set<int>& have() const { return have_; }
    const std::set<int>& sent() const { return sent_; }

    std::optional<RoundMessage> on_round(int round, Rng& rng) override {
        int phase_round = round % phase_rounds_;
        int pr = round % 3;
        if (phase_round == 0 && is_mis_) {
            current_ = -1;
            for (int p : have_) {
                if (!sent_.count(p)) {
                    current_ = p;
                    break;
                }
            }
        }
        if (pr == 0) {
            relay_ = -1; // receptions do not carry across periods
            if (is_mis_ && current_ >= 0 && rng.bernoulli(p_act_)) {
                RoundMessage m;
                m.kind = kSpread;
                m.payload = current_;
                m.sender_id = node_;
                return m;
            }
            return std::nullopt;
        }
        if (relay_ >= 0) {
            RoundMessage m;
            m.kind = kSpread;
            m.payload = relay_;
            m.sender_id = node_;
            relay_ = -1;
            return m;
        }
        return std::nullopt;
    }

    // A reception is a reception whichever edge carried it: it is absorbed
    // and relayed onward. Relaying only reliable copies would let the
    // delivery choice sever a relay chain by routing the message over an
    // unreliable edge.
    void on_deliveries(int round, bool,
                       const std::vector<RoundDelivery>& deliveries) override {
        for (const RoundDelivery& d : deliveries) {
            if (d.msg.payload < 0) continue;
            have_.insert(d.msg.payload);
            if (relay_ < 0) relay_ = d.msg.payload;
        }
        if (round % phase_rounds_ == phase_rounds_ - 1 && is_mis_ && current_ >= 0) {
            sent_.insert(current_);
            current_ = -1;
        }
    }

    std::string digest() const override {
        return (is_mis_ ? "mis:" : "node:") + std::to_string(have_.size()) + "/" +
               std::to_string(sent_.size());
    }

private:
    int node_;
    bool is_mis_;
    std::set<int> have_;
    std::set<int> sent_;
    double p_act_;
    int phase_rounds_;
    int current_ = -1;
    int relay_ = -1;
};

} // namespace

SpreadResult spread(const DualGraph& graph, const std::set<int>& s,
                    const std::map<int, std::set<int>>& initial_have,
                    const std::map<int, std::vector<int>>& arrivals,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed) {
    params.validate();
    Targets targets = component_targets(graph, arrivals);
    Overlay h = overlay(graph, s);
    int k = 0;
    for (const auto& [comp, payloads] : targets.payloads)
        k = std::max(k, int(payloads.size()));

    int periods = params.localbcast_periods(graph.n());
    std::vector<SpreadAutomaton*> raw;
    std::vector<std::unique_ptr<RoundAutomaton>> automata;
    for (int v = 0; v < graph.n(); ++v) {
        std::set<int> have;
        auto it = initial_have.find(v);
        if (it != initial_have.end()) have = it->second;
        auto a = std::make_unique<SpreadAutomaton>(v, s.count(v) > 0, std::move(have),
                                                   params.activation(), periods);
        raw.push_back(a.get());
        automata.push_back(std::move(a));
    }

    auto complete = [&]() {
        for (int v : s) {
            const auto& target = targets.payloads[targets.comp_of[v]];
            if (!std::includes(raw[v]->sent().begin(), raw[v]->sent().end(),
                               target.begin(), target.end()))
                return false;
        }
        return true;
    };

    int phase_rounds = 3 * periods;
    RoundRunOptions options;
    options.max_rounds = params.spread_phase_cap(h.diameter, k) * phase_rounds;
    options.seed = seed;
    options.stop = [&](int round) {
        return (round + 1) % phase_rounds == 0 && complete();
    };

    SpreadResult result;
    result.trace = run_rounds(graph, automata, adversary, options);
    result.rounds = int(result.trace.rounds.size());
    result.phases = (result.rounds + phase_rounds - 1) / phase_rounds;
    result.complete = complete();
    for (int v = 0; v < graph.n(); ++v) {
        result.have[v] = raw[v]->have();
        if (s.count(v)) result.sent[v] = raw[v]->sent();
    }
    return result;
}

// --- composition -------------------------------------------------------------

std::string FmmbResult::to_json() const {
    nlohmann::json j;
    j["mis"] = std::vector<int>(mis.begin(), mis.end());
    j["mis_valid"] = mis_valid;
    j["gather_covered"] = gather_covered;
    j["spread_complete"] = spread_complete;
    j["delivered_all"] = delivered_all;
    j["rounds"] = {{"mis", rounds_mis},
                   {"gather", rounds_gather},
                   {"spread", rounds_spread},
                   {"total", total_rounds()}};
    j["d_h"] = d_h;
    j["diameter_g"] = diameter_g;
    return j.dump(2) + "\n";
}

FmmbResult fmmb_run(const DualGraph& graph,
                    const std::map<int, std::vector<int>>& arrivals,
                    const FmmbParams& params, RoundAdversary& adversary,
                    std::uint64_t seed) {
    FmmbResult result;
    Rng root(seed);

    MisResult m = mis(graph, params, adversary, root.fork(1).next());
    result.mis = m.mis;
    result.rounds_mis = m.rounds;
    result.trace_mis = std::move(m.trace);
    result.mis_valid = verify_mis(graph, result.mis).ok;
    result.diameter_g = metrics(graph).diameter_g;
    if (!result.mis_valid) return result;

    GatherResult g =
        gather(graph, result.mis, arrivals, params, adversary, root.fork(2).next());
    result.rounds_gather = g.rounds;
    result.gather_covered = g.covered;
    result.trace_gather = std::move(g.trace);

    Overlay h = overlay(graph, result.mis);
    result.d_h = h.diameter;

    // Spread starts from the gathered MIS sets; every node also knows its own
    // arrivals and whatever it reliably saw while gathering.
    std::map<int, std::set<int>> have = g.owned;
    for (const auto& [node, payloads] : arrivals)
        have[node].insert(payloads.begin(), payloads.end());
    for (const auto& [node, seen] : g.seen)
        have[node].insert(seen.begin(), seen.end());

    SpreadResult sp = spread(graph, result.mis, have, arrivals, params, adversary,
                             root.fork(3).next());
    result.rounds_spread = sp.rounds;
    result.spread_complete = sp.complete;
    result.trace_spread = std::move(sp.trace);
    result.delivered = sp.have;

    Targets targets = component_targets(graph, arrivals);
    result.delivered_all = true;
    for (int v = 0; v < graph.n(); ++v) {
        const auto& target = targets.payloads[targets.comp_of[v]];
        if (!std::includes(result.delivered[v].begin(), result.delivered[v].end(),
                           target.begin(), target.end()))
            result.delivered_all = false;
    }
    return result;
}

} // namespace dualmac
