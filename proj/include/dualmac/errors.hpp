#pragma once

#include <stdexcept>
#include <string>

namespace dualmac {

// Error taxonomy shared across the library. Each type corresponds to one
// failure class surfaced by the public API; all carry a human-readable detail.

struct InvalidParameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PreconditionViolation : std::logic_error {
    using std::logic_error::logic_error;
};

// An automaton broke the user-well-formedness contract (e.g. double broadcast).
struct ExecutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Too many events at a single timestamp: a zero-delay cycle that never
// advances time.
struct LivelockError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A standard-model automaton used an enhanced-model capability.
struct ModelViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scheduler issued an illegal decision (past time, bad receiver, ...).
struct SchedulerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A round adversary broke a delivery constraint.
struct AdversaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A trace analysis was asked to process an incompatible trace.
struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized input (trace, graph, config).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A composed pipeline stage failed; `stage` names it.
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_, const std::string& what_)
        : std::runtime_error(stage_ + ": " + what_), stage(std::move(stage_)) {}
};

} // namespace dualmac
