#include "dualmac/schedulers.hpp"

#include <algorithm>

#include "dualmac/errors.hpp"

namespace dualmac {

std::optional<SchedulerDecision> PlanScheduler::next(const EngineView& view) {
    for (const InstanceState* inst : view.open) {
        if (!plans_.count(inst->id))
            plans_.emplace(inst->id, plan_instance(*inst, view));
    }

    // Earliest pending item; deliveries win ties against acks so an ack never
    // jumps ahead of a same-time delivery it depends on.
    std::optional<SchedulerDecision> best;
    const InstanceState* best_inst = nullptr;
    auto better = [&](const SchedulerDecision& cand) {
        if (!best) return true;
        if (cand.at != best->at) return cand.at < best->at;
        bool cand_del = cand.kind == SchedulerDecision::Kind::deliver;
        bool best_del = best->kind == SchedulerDecision::Kind::deliver;
        if (cand_del != best_del) return cand_del;
        if (cand.instance != best->instance) return cand.instance < best->instance;
        return cand.receiver < best->receiver;
    };

    for (const InstanceState* inst : view.open) {
        const Plan& plan = plans_.at(inst->id);
        for (const auto& [recv, at] : plan.deliveries) {
            if (inst->delivered.count(recv)) continue;
            auto cand = SchedulerDecision::deliver(inst->id, recv, at);
            if (better(cand)) {
                best = cand;
                best_inst = inst;
            }
        }
        if (!inst->terminated) {
            auto cand = SchedulerDecision::ack(inst->id, plan.ack_at);
            if (better(cand)) {
                best = cand;
                best_inst = inst;
            }
        }
    }
    if (best) on_decision(*best, *best_inst, plans_.at(best_inst->id));
    return best;
}

PlanScheduler::Plan SlowSynchronousScheduler::plan_instance(const InstanceState& inst,
                                                            const EngineView& view) {
    Plan plan;
    for (int j : view.graph.neighbors_g(inst.sender))
        plan.deliveries[j] = inst.bcast_at + view.config.f_prog;
    plan.ack_at = inst.bcast_at + view.config.f_ack;
    return plan;
}

PlanScheduler::Plan EagerScheduler::plan_instance(const InstanceState& inst,
                                                  const EngineView& view) {
    Plan plan;
    for (int j : view.graph.neighbors_g(inst.sender))
        plan.deliveries[j] = inst.bcast_at + view.config.f_prog;
    plan.ack_at = inst.bcast_at + view.config.f_prog;
    return plan;
}

PlanScheduler::Plan RandomAdversaryScheduler::plan_instance(const InstanceState& inst,
                                                            const EngineView& view) {
    Rng rng = rng_.fork(std::uint64_t(inst.id));
    const Rational& f_ack = view.config.f_ack;
    const Rational& f_prog = view.config.f_prog;
    Rational step = f_ack / grid_;

    Plan plan;
    std::int64_t max_q = 0;
    for (int j : view.graph.neighbors_g(inst.sender)) {
        std::int64_t q = rng.range(1, grid_);
        max_q = std::max(max_q, q);
        plan.deliveries[j] = inst.bcast_at + step * q;
    }
    std::int64_t ack_q = rng.range(std::max<std::int64_t>(max_q, 1), grid_);
    plan.ack_at = inst.bcast_at + step * ack_q;

    for (int j : view.graph.neighbors_gp(inst.sender)) {
        if (view.graph.has_edge_g(inst.sender, j)) continue;
        if (!rng.bernoulli(p_extra_)) continue;
        std::int64_t q = rng.range(1, ack_q);
        plan.deliveries.emplace(j, inst.bcast_at + step * q);
    }

    // Progress repair: if this instance outlives the first uncovered window of
    // a G-neighbor and its delivery lands later still, pull the delivery to
    // the window deadline. The rcv then discharges every window the instance
    // spans, because its termination caps their endpoints.
    for (int j : view.graph.neighbors_g(inst.sender)) {
        Rational covered = inst.bcast_at;
        auto it = cover_until_.find(j);
        if (it != cover_until_.end()) covered = dualmac::max(covered, it->second);
        Rational deadline = covered + f_prog;
        if (plan.ack_at > deadline && plan.deliveries[j] > deadline)
            plan.deliveries[j] = deadline;
    }
    return plan;
}

void RandomAdversaryScheduler::on_decision(const SchedulerDecision& d,
                                           const InstanceState&, const Plan& plan) {
    if (d.kind == SchedulerDecision::Kind::deliver) {
        auto& cover = cover_until_[d.receiver];
        cover = dualmac::max(cover, plan.ack_at);
    }
}

std::unique_ptr<Scheduler> make_scheduler(const std::string& name, std::uint64_t seed) {
    if (name == "slow_synchronous") return std::make_unique<SlowSynchronousScheduler>();
    if (name == "eager") return std::make_unique<EagerScheduler>();
    if (name == "random_adversary")
        return std::make_unique<RandomAdversaryScheduler>(seed);
    throw InvalidParameter("unknown scheduler '" + name + "'");
}

} // namespace dualmac
