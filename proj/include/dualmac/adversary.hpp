#pragma once

#include <map>
#include <memory>

#include "dualmac/engine.hpp"
#include "dualmac/schedulers.hpp"

namespace dualmac {

// A prepared lower-bound run: topology, message placement, the scripted
// scheduler, and the completion-time floor the schedule forces.
struct LowerBoundSetup {
    DualGraph graph;
    std::map<int, std::vector<int>> arrivals;
    std::unique_ptr<Scheduler> scheduler;
    Rational floor;
};

struct FloorCertificate {
    Rational floor;
    Rational measured;
    double ratio = 0.0; // measured / floor (0 when floor is 0)
    std::string to_json() const;
};

// Star with a pendant receiver: k singleton messages serialized through the
// hub under the slow-synchronous schedule force completion >= (k-1) * F_ack.
LowerBoundSetup star_lower_bound(int k, const EngineConfig& config);

// Double line with crossing unreliable edges. The scripted scheduler walks a
// frontier down both lines, spending a full F_ack window per hop: the
// frontier broadcasts cross-deliver once early in the window (which satisfies
// every progress obligation), deliver forward at the window end, and every
// other broadcast completes instantaneously against its G-neighbors.
// Forces completion >= (d-2) * F_ack. Requires F_ack divisible by F_prog.
LowerBoundSetup crossing_lower_bound(int d, const EngineConfig& config);

// Frontier-walking scheduler used by crossing_lower_bound.
class CrossingScheduler : public PlanScheduler {
public:
    CrossingScheduler(int d, const EngineConfig& config);

protected:
    Plan plan_instance(const InstanceState& inst, const EngineView& view) override;

private:
    int d_;
    Rational f_ack_;
    Rational f_prog_;
    // Next frontier broadcast expected on each line: 1-based index and time.
    int next_a_ = 1;
    int next_b_ = 1;
    Rational next_a_at_{0};
    Rational next_b_at_{0};
};

} // namespace dualmac
