#pragma once

#include <string>
#include <vector>

#include "dualmac/graph.hpp"
#include "dualmac/trace.hpp"

namespace dualmac {

enum class ViolationKind {
    well_formedness,
    receive_correctness,
    ack_correctness,
    termination,
    ack_bound,
    progress_bound,
    abort_bound,
};

std::string violation_kind_name(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::vector<int> nodes;
    std::vector<int> instances;
    Rational window_start;
    Rational window_end;
    std::string detail;
};

struct ViolationReport {
    std::vector<Violation> violations;
    std::vector<std::string> warnings; // e.g. instances cut open at the horizon

    bool clean() const { return violations.empty(); }
    bool has(ViolationKind k) const;
    int count(ViolationKind k) const;
    std::string to_json() const;
};

struct CheckOptions {
    // Permissive progress reading (default): a receive that happened before
    // the window start still discharges it, provided its instance had not
    // terminated before the start. Strict mode requires the receive to fall
    // inside the window.
    bool strict_progress = false;
};

// Validates a trace against every abstract MAC layer guarantee. Structural
// problems in the trace itself (unsorted events, dangling instance ids) throw
// ParseError; model violations land in the report.
ViolationReport check(const Trace& trace, const DualGraph& graph,
                      const EngineConfig& config, const CheckOptions& options = {});

} // namespace dualmac
