#include "dualmac/checker.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

std::string violation_kind_name(ViolationKind k) {
    switch (k) {
    case ViolationKind::well_formedness: return "well-formedness";
    case ViolationKind::receive_correctness: return "receive-correctness";
    case ViolationKind::ack_correctness: return "ack-correctness";
    case ViolationKind::termination: return "termination";
    case ViolationKind::ack_bound: return "ack-bound";
    case ViolationKind::progress_bound: return "progress-bound";
    case ViolationKind::abort_bound: return "abort-bound";
    }
    return "?";
}

bool ViolationReport::has(ViolationKind k) const {
    return std::any_of(violations.begin(), violations.end(),
                       [k](const Violation& v) { return v.kind == k; });
}

int ViolationReport::count(ViolationKind k) const {
    return int(std::count_if(violations.begin(), violations.end(),
                             [k](const Violation& v) { return v.kind == k; }));
}

std::string ViolationReport::to_json() const {
    nlohmann::json j;
    j["violations"] = nlohmann::json::array();
    for (const Violation& v : violations) {
        nlohmann::json item;
        item["kind"] = violation_kind_name(v.kind);
        item["nodes"] = v.nodes;
        item["instances"] = v.instances;
        item["window"] = {v.window_start.str(), v.window_end.str()};
        item["detail"] = v.detail;
        j["violations"].push_back(item);
    }
    j["warnings"] = warnings;
    j["clean"] = violations.empty();
    return j.dump(2) + "\n";
}

namespace {

struct ContendRcv {
    Rational time;
    Rational term; // effective termination of the causing instance
};

class Checker {
public:
    Checker(const Trace& trace, const DualGraph& graph, const EngineConfig& config,
            const CheckOptions& options)
        : trace_(trace), graph_(graph), config_(config), options_(options) {}

    ViolationReport run() {
        validate_structure();
        check_well_formedness();
        check_receive();
        check_ack_and_bounds();
        check_progress();
        return std::move(report_);
    }

private:
    void add(ViolationKind kind, std::vector<int> nodes, std::vector<int> instances,
             Rational ws, Rational we, std::string detail) {
        report_.violations.push_back(
            {kind, std::move(nodes), std::move(instances), ws, we, std::move(detail)});
    }

    void validate_structure() {
        const auto& ev = trace_.events;
        for (std::size_t i = 1; i < ev.size(); ++i) {
            if (ev[i].seq <= ev[i - 1].seq)
                throw ParseError("trace: seq not strictly increasing at index " +
                                 std::to_string(i));
            if (ev[i].time < ev[i - 1].time)
                throw ParseError("trace: events not sorted by time at index " +
                                 std::to_string(i));
        }
        for (const Event& e : ev) {
            if (e.kind != EventKind::arrive && (e.node < 0 || e.node >= graph_.n()))
                throw ParseError("trace: event node out of range");
        }
        instances_ = trace_.instances;
        if (instances_.empty() && !trace_.events.empty()) {
            Trace copy = trace_;
            copy.rebuild_instances();
            instances_ = copy.instances;
        }
        by_id_.clear();
        for (std::size_t i = 0; i < instances_.size(); ++i)
            by_id_[instances_[i].id] = i;
        // rcv/termination events must reference known instances.
        for (const Event& e : ev) {
            if ((e.kind == EventKind::rcv || e.kind == EventKind::ack ||
                 e.kind == EventKind::abort) &&
                !by_id_.count(e.instance))
                throw ParseError("trace: event references unknown instance " +
                                 std::to_string(e.instance));
        }
    }

    const MessageInstance& inst(int id) const { return instances_[by_id_.at(id)]; }

    Rational term_eff(const MessageInstance& mi) const {
        return mi.terminated() ? mi.term_time : trace_.horizon;
    }

    void check_well_formedness() {
        std::map<int, int> open_own; // node -> open instance id
        for (const Event& e : trace_.events) {
            if (e.kind == EventKind::bcast) {
                auto it = open_own.find(e.node);
                if (it != open_own.end()) {
                    add(ViolationKind::well_formedness, {e.node},
                        {it->second, e.instance}, e.time, e.time,
                        "node " + std::to_string(e.node) + " broadcast instance " +
                            std::to_string(e.instance) + " while instance " +
                            std::to_string(it->second) + " is unterminated (seq " +
                            std::to_string(e.seq) + ")");
                } else {
                    open_own[e.node] = e.instance;
                }
            } else if (e.kind == EventKind::ack || e.kind == EventKind::abort) {
                auto it = open_own.find(e.node);
                if (it != open_own.end() && it->second == e.instance)
                    open_own.erase(it);
            }
        }
    }

    void check_receive() {
        std::set<std::pair<int, int>> seen; // (instance, receiver)
        for (const Event& e : trace_.events) {
            if (e.kind != EventKind::rcv) continue;
            const MessageInstance& mi = inst(e.instance);
            if (!graph_.has_edge_gp(mi.sender, e.node)) {
                add(ViolationKind::receive_correctness, {e.node, mi.sender},
                    {e.instance}, e.time, e.time,
                    "rcv at node " + std::to_string(e.node) + " from non-E' neighbor " +
                        std::to_string(mi.sender) + " (seq " + std::to_string(e.seq) +
                        ")");
            }
            if (!seen.insert({e.instance, e.node}).second) {
                add(ViolationKind::receive_correctness, {e.node}, {e.instance}, e.time,
                    e.time,
                    "duplicate rcv of instance " + std::to_string(e.instance) +
                        " at node " + std::to_string(e.node));
            }
            if (mi.term == MessageInstance::Term::acked && e.seq > mi.term_seq) {
                add(ViolationKind::receive_correctness, {e.node}, {e.instance}, e.time,
                    e.time,
                    "rcv of instance " + std::to_string(e.instance) +
                        " after its ack (seq " + std::to_string(e.seq) + ")");
            }
            if (mi.term == MessageInstance::Term::aborted &&
                e.time > mi.term_time + config_.eps_abort) {
                add(ViolationKind::abort_bound, {e.node}, {e.instance}, mi.term_time,
                    e.time,
                    "rcv of instance " + std::to_string(e.instance) + " at t=" +
                        e.time.str() + ", more than eps_abort after its abort at t=" +
                        mi.term_time.str());
            }
            if (e.reliable >= 0) {
                bool expect = graph_.has_edge_g(mi.sender, e.node);
                if ((e.reliable != 0) != expect)
                    report_.warnings.push_back(
                        "rcv seq " + std::to_string(e.seq) +
                        " carries a reliable flag inconsistent with the graph");
            }
        }
    }

    void check_ack_and_bounds() {
        // rcv seqs per (instance, node) for the precedence test.
        std::map<std::pair<int, int>, std::int64_t> first_rcv_seq;
        std::map<int, int> term_events;
        for (const Event& e : trace_.events) {
            if (e.kind == EventKind::rcv) {
                auto key = std::make_pair(e.instance, e.node);
                if (!first_rcv_seq.count(key)) first_rcv_seq[key] = e.seq;
            } else if (e.kind == EventKind::ack || e.kind == EventKind::abort) {
                ++term_events[e.instance];
            }
        }
        for (const auto& [id, count] : term_events) {
            if (count > 1)
                add(ViolationKind::ack_correctness, {inst(id).sender}, {id},
                    inst(id).term_time, inst(id).term_time,
                    "instance " + std::to_string(id) + " terminated " +
                        std::to_string(count) + " times");
        }
        for (const MessageInstance& mi : instances_) {
            if (mi.term == MessageInstance::Term::acked) {
                for (int j : graph_.neighbors_g(mi.sender)) {
                    auto it = first_rcv_seq.find({mi.id, j});
                    if (it == first_rcv_seq.end() || it->second > mi.term_seq) {
                        add(ViolationKind::ack_correctness, {mi.sender, j}, {mi.id},
                            mi.bcast_at, mi.term_time,
                            "ack of instance " + std::to_string(mi.id) +
                                " precedes any rcv at G-neighbor " + std::to_string(j));
                    }
                }
                if (mi.term_time - mi.bcast_at > config_.f_ack)
                    add(ViolationKind::ack_bound, {mi.sender}, {mi.id}, mi.bcast_at,
                        mi.term_time,
                        "instance " + std::to_string(mi.id) + " acked after " +
                            (mi.term_time - mi.bcast_at).str() + " > F_ack");
            } else if (mi.term == MessageInstance::Term::aborted) {
                if (mi.term_time - mi.bcast_at > config_.f_ack)
                    add(ViolationKind::ack_bound, {mi.sender}, {mi.id}, mi.bcast_at,
                        mi.term_time,
                        "instance " + std::to_string(mi.id) +
                            " neither acked nor aborted within F_ack");
            } else {
                if (mi.bcast_at + config_.f_ack <= trace_.horizon) {
                    add(ViolationKind::termination, {mi.sender}, {mi.id}, mi.bcast_at,
                        trace_.horizon,
                        "instance " + std::to_string(mi.id) +
                            " never terminated although F_ack elapsed before the "
                            "horizon");
                } else {
                    report_.warnings.push_back("instance " + std::to_string(mi.id) +
                                               " still open at the horizon");
                }
            }
        }
    }

    // Exact progress-bound scan. For node j and a spanning instance I from a
    // G-neighbor, a violating window [s, e] exists iff for some candidate
    // start s (the instance's bcast, or just past the termination of an
    // instance that previously delivered to j) there is room for
    // e in (s + F_prog, term(I)] below the earliest receive still contending
    // at s. Between candidates those sets are constant, so this is exhaustive.
    void check_progress() {
        std::vector<std::vector<ContendRcv>> rcvs(graph_.n());
        for (const Event& e : trace_.events) {
            if (e.kind != EventKind::rcv) continue;
            const MessageInstance& mi = inst(e.instance);
            if (!graph_.has_edge_gp(mi.sender, e.node)) continue;
            rcvs[e.node].push_back({e.time, term_eff(mi)});
        }

        for (const MessageInstance& mi : instances_) {
            Rational span_end = term_eff(mi);
            if (!(span_end - mi.bcast_at > config_.f_prog)) continue;
            for (int j : graph_.neighbors_g(mi.sender)) {
                scan_node_instance(j, mi, span_end, rcvs[j]);
            }
        }
    }

    // Earliest receive at j that still contends for windows starting at s:
    // min time over receives with term >= s (permissive) or additionally
    // time >= s (strict). after=true uses strict inequality at the boundary.
    std::optional<Rational> earliest_blocker(const std::vector<ContendRcv>& rcvs,
                                             const Rational& s, bool after) const {
        std::optional<Rational> best;
        for (const ContendRcv& r : rcvs) {
            bool contends = after ? r.term > s : r.term >= s;
            if (!contends) continue;
            if (options_.strict_progress) {
                bool inside = after ? r.time > s : r.time >= s;
                if (!inside) continue;
            }
            if (!best || r.time < *best) best = r.time;
        }
        return best;
    }

    void scan_node_instance(int j, const MessageInstance& mi, const Rational& span_end,
                            const std::vector<ContendRcv>& rcvs) {
        std::vector<std::pair<Rational, bool>> candidates; // (s, after?)
        candidates.emplace_back(mi.bcast_at, false);
        std::set<Rational> boundaries;
        for (const ContendRcv& r : rcvs) {
            if (r.term >= mi.bcast_at && r.term + config_.f_prog < span_end)
                boundaries.insert(r.term);
            if (options_.strict_progress && r.time >= mi.bcast_at &&
                r.time + config_.f_prog < span_end)
                boundaries.insert(r.time);
        }
        for (const Rational& b : boundaries) candidates.emplace_back(b, true);
        std::sort(candidates.begin(), candidates.end());

        for (const auto& [s, after] : candidates) {
            auto blocker = earliest_blocker(rcvs, s, after);
            Rational cap = blocker ? dualmac::min(*blocker, span_end) : span_end;
            if (s + config_.f_prog < cap) {
                // Concrete witness window inside the feasible region.
                Rational ws = after ? s + (cap - config_.f_prog - s) / 4 : s;
                Rational we = blocker && *blocker <= span_end
                                  ? (ws + config_.f_prog + cap) / 2
                                  : span_end;
                add(ViolationKind::progress_bound, {j}, {mi.id}, ws, we,
                    "node " + std::to_string(j) + " starved while instance " +
                        std::to_string(mi.id) + " from G-neighbor " +
                        std::to_string(mi.sender) + " spans [" + mi.bcast_at.str() +
                        ", " + span_end.str() + "]: no contending rcv discharges [" +
                        ws.str() + ", " + we.str() + "]");
                return; // one violation per (node, instance)
            }
        }
    }

    const Trace& trace_;
    const DualGraph& graph_;
    const EngineConfig& config_;
    CheckOptions options_;
    std::vector<MessageInstance> instances_;
    std::map<int, std::size_t> by_id_;
    ViolationReport report_;
};

} // namespace

ViolationReport check(const Trace& trace, const DualGraph& graph,
                      const EngineConfig& config, const CheckOptions& options) {
    return Checker(trace, graph, config, options).run();
}

} // namespace dualmac
