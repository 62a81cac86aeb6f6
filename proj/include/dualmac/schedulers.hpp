#pragma once

#include <map>
#include <memory>

#include "dualmac/engine.hpp"

namespace dualmac {

// Plan-driven scheduler base: derived classes lay out delivery/ack times per
// instance the first time it appears; next() then replays the earliest item
// that the engine view shows as still pending. Ordering within a timestamp is
// deliveries first, then acks, tie-broken by (instance, receiver).
class PlanScheduler : public Scheduler {
public:
    std::optional<SchedulerDecision> next(const EngineView& view) override;

protected:
    struct Plan {
        std::map<int, Rational> deliveries; // receiver -> absolute time
        Rational ack_at;
    };

    virtual Plan plan_instance(const InstanceState& inst, const EngineView& view) = 0;

    // Called once when a decision is about to be handed to the engine.
    virtual void on_decision(const SchedulerDecision&, const InstanceState&,
                             const Plan&) {}

    std::map<int, Plan> plans_;
};

// Delivers each instance to all G-neighbors (only) at bcast + F_prog and
// acknowledges at bcast + F_ack: the maximally slow schedule that still
// meets every bound.
class SlowSynchronousScheduler : public PlanScheduler {
protected:
    Plan plan_instance(const InstanceState& inst, const EngineView& view) override;
};

// Delivers to all G-neighbors and acknowledges at bcast + F_prog.
class EagerScheduler : public PlanScheduler {
protected:
    Plan plan_instance(const InstanceState& inst, const EngineView& view) override;
};

// Seeded adversarial schedule: per-receiver delivery times drawn from a grid
// in (0, F_ack], random extra deliveries over E'-only edges, ack at a random
// time covering all G-deliveries. Deliveries that would starve a neighbor's
// progress window are pulled forward to the window deadline, which keeps
// every trace checker-clean.
class RandomAdversaryScheduler : public PlanScheduler {
public:
    explicit RandomAdversaryScheduler(std::uint64_t seed, double p_extra = 0.5,
                                      int grid = 64)
        : rng_(Rng(seed).fork(0x61647665ull)), p_extra_(p_extra), grid_(grid) {}

protected:
    Plan plan_instance(const InstanceState& inst, const EngineView& view) override;
    void on_decision(const SchedulerDecision& d, const InstanceState& inst,
                     const Plan& plan) override;

private:
    Rng rng_;
    double p_extra_;
    int grid_;
    // cover_until[j]: latest termination among instances already delivered to
    // j; windows starting at or before it are discharged by a past rcv.
    std::map<int, Rational> cover_until_;
};

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, std::uint64_t seed);

} // namespace dualmac
