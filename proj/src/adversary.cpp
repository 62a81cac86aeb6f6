#include "dualmac/adversary.hpp"

#include <json.hpp>

#include "dualmac/errors.hpp"

namespace dualmac {

std::string FloorCertificate::to_json() const {
    nlohmann::json j;
    j["floor"] = floor.str();
    j["measured"] = measured.str();
    j["ratio"] = ratio;
    return j.dump(2) + "\n";
}

LowerBoundSetup star_lower_bound(int k, const EngineConfig& config) {
    if (k < 2) throw InvalidParameter("star_lower_bound: k must be >= 2");
    LowerBoundSetup setup;
    setup.graph = make_star_bridge(k);
    for (int i = 0; i < k; ++i) setup.arrivals[i] = {i}; // leaves 0..k-2, hub k-1
    setup.scheduler = std::make_unique<SlowSynchronousScheduler>();
    setup.floor = config.f_ack * Rational(k - 1);
    return setup;
}

CrossingScheduler::CrossingScheduler(int d, const EngineConfig& config)
    : d_(d), f_ack_(config.f_ack), f_prog_(config.f_prog) {
    Rational q = f_ack_ / f_prog_;
    if (!q.is_integer())
        throw InvalidParameter(
            "crossing_lower_bound: F_ack must be an integer multiple of F_prog");
}

PlanScheduler::Plan CrossingScheduler::plan_instance(const InstanceState& inst,
                                                     const EngineView& view) {
    const DualGraph& g = view.graph;
    int d = d_;
    auto a_vertex = [&](int i) { return i - 1; };
    auto b_vertex = [&](int i) { return d + i - 1; };

    // Frontier broadcast of message 0 down the a-line?
    if (next_a_ <= d - 1 && inst.sender == a_vertex(next_a_) && inst.payload == 0 &&
        inst.bcast_at == next_a_at_) {
        int i = next_a_;
        Rational t0 = next_a_at_;
        ++next_a_;
        next_a_at_ = t0 + f_ack_;
        Plan plan;
        plan.deliveries[b_vertex(i + 1)] = t0 + f_prog_; // the one cross delivery
        if (i >= 2) plan.deliveries[a_vertex(i - 1)] = t0 + f_prog_;
        plan.deliveries[a_vertex(i + 1)] = t0 + f_ack_;
        plan.ack_at = t0 + f_ack_;
        return plan;
    }
    // Frontier broadcast of message 1 down the b-line?
    if (next_b_ <= d - 1 && inst.sender == b_vertex(next_b_) && inst.payload == 1 &&
        inst.bcast_at == next_b_at_) {
        int i = next_b_;
        Rational t0 = next_b_at_;
        ++next_b_;
        next_b_at_ = t0 + f_ack_;
        Plan plan;
        plan.deliveries[a_vertex(i + 1)] = t0 + f_prog_;
        if (i >= 2) plan.deliveries[b_vertex(i - 1)] = t0 + f_prog_;
        plan.deliveries[b_vertex(i + 1)] = t0 + f_ack_;
        plan.ack_at = t0 + f_ack_;
        return plan;
    }
    // Everything else: deliver to all G-neighbors and acknowledge with no
    // time passing.
    Plan plan;
    for (int j : g.neighbors_g(inst.sender)) plan.deliveries[j] = inst.bcast_at;
    plan.ack_at = inst.bcast_at;
    return plan;
}

LowerBoundSetup crossing_lower_bound(int d, const EngineConfig& config) {
    if (d < 2) throw InvalidParameter("crossing_lower_bound: d must be >= 2");
    LowerBoundSetup setup;
    setup.graph = make_double_line(d);
    setup.arrivals[0] = {0};  // m0 at a_1
    setup.arrivals[d] = {1};  // m1 at b_1
    setup.scheduler = std::make_unique<CrossingScheduler>(d, config);
    setup.floor = config.f_ack * Rational(d - 2);
    return setup;
}

} // namespace dualmac
