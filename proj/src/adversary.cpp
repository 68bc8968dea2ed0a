/**
 * Copyright 2026 The DualChain Simulator Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dualchain/adversary.hpp"

#include <algorithm>

namespace dualchain {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::Passive: return "Passive";
        case Strategy::Silent: return "Silent";
        case Strategy::SilentLeader: return "SilentLeader";
        case Strategy::Equivocator: return "Equivocator";
        case Strategy::Manipulator: return "Manipulator";
    }
    return "?";
}

Strategy strategy_from_string(std::string_view name) {
    for (auto s : {Strategy::Passive, Strategy::Silent, Strategy::SilentLeader, Strategy::Equivocator,
                   Strategy::Manipulator})
        if (to_string(s) == name) return s;
    throw Error("unknown strategy '" + std::string(name) + "'");
}

Action adversary_decide(const Behavior& b, SimTime now, const DecisionContext& ctx) {
    if (!b.active(now)) return Action::Follow;
    switch (b.strategy) {
        case Strategy::Passive: return Action::Follow;
        case Strategy::Silent: return Action::Drop;
        case Strategy::SilentLeader:
            return ctx.step == Step::Propose || ctx.step == Step::FcPropose ? Action::Drop : Action::Follow;
        case Strategy::Equivocator:
        case Strategy::Manipulator:
            switch (ctx.step) {
                case Step::Propose: return b.strategy == Strategy::Equivocator ? Action::Equivocate : Action::Taint;
                case Step::Vote: return ctx.counterpart_malicious ? Action::VoteBlindly : Action::Follow;
                case Step::Complain: return ctx.counterpart_malicious ? Action::Drop : Action::Follow;
                default: return Action::Follow;
            }
    }
    return Action::Follow;
}

NodeId fc_leader(const Assignment& a, FcId fc, std::uint64_t view, const EpochRandomness& rand) {
    return select_leader(a.fc_members(fc), view, rand, 0x1'0000'0000ULL + fc.value);
}

NodeId ps_initial_leader(const Assignment& a, PsId ps, const EpochRandomness& rand) {
    return select_leader(a.ps_members(ps), 0, rand, ps.value);
}

std::vector<Behavior> realize_plan(const AttackPlan& plan, const std::vector<NodeId>& random_set,
                                   const Assignment& assignment, const EpochRandomness& rand) {
    std::vector<Behavior> out(assignment.node_count());
    if (!plan.is_planted()) {
        for (auto n : random_set) out.at(n.value) = Behavior{true, plan.strategy, plan.activation};
        return out;
    }
    auto corrupt = [&](NodeId n, Strategy s, SimTime at) {
        if (out[n.value].malicious) return false;
        out[n.value] = Behavior{true, s, at};
        return true;
    };
    for (const auto& fl : plan.planted_fc_leaders) {
        if (fl.fc.value >= assignment.fc_count()) throw PlanError("planted FC leader: no such FC");
        if (fl.count > assignment.fc_members(fl.fc).size()) throw PlanError("planted FC leader: count exceeds FC size");
        for (std::uint32_t v = 0; v < fl.count; ++v) corrupt(fc_leader(assignment, fl.fc, v, rand), fl.strategy, fl.activation);
    }
    for (std::size_t idx = 0; idx < plan.planted.size(); ++idx) {
        const auto& p = plan.planted[idx];
        if (p.ps.value >= assignment.ps_count()) throw PlanError("planted shard: no such PS");
        const auto& members = assignment.ps_members(p.ps);
        std::uint32_t already = 0;
        for (auto n : members) already += out[n.value].malicious ? 1 : 0;
        if (already + p.count > members.size()) throw PlanError("planted shard: count exceeds PS size");
        std::uint32_t placed = 0;
        if (p.include_leader && p.count > 0 && corrupt(ps_initial_leader(assignment, p.ps, rand), p.strategy, p.activation))
            ++placed;
        std::vector<NodeId> order(members.begin(), members.end());
        auto rng = rand.stream(Stream::Adversary, {p.ps.value, idx});
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.uniform(i)]);
        const NodeId leader = ps_initial_leader(assignment, p.ps, rand);
        for (auto n : order) {
            if (placed >= p.count) break;
            // Unless asked for, the view-0 leader stays honest.
            if (!p.include_leader && n == leader) continue;
            if (corrupt(n, p.strategy, p.activation)) ++placed;
        }
        if (placed < p.count) throw PlanError("planted shard: not enough eligible members");
    }
    return out;
}

}  // namespace dualchain
