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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualchain/identity.hpp"
#include "dualchain/types.hpp"

namespace dualchain {

enum class Strategy : std::uint8_t { Passive, Silent, SilentLeader, Equivocator, Manipulator };

std::string_view to_string(Strategy s);
/// Throws Error for unknown names.
Strategy strategy_from_string(std::string_view name);

/// What one node does; honest nodes keep the default.
struct Behavior {
    bool malicious = false;
    Strategy strategy = Strategy::Passive;
    SimTime activation = 0;

    bool active(SimTime now) const { return malicious && strategy != Strategy::Passive && now >= activation; }
};

/// Protocol steps at which a node may deviate.
enum class Step : std::uint8_t {
    Propose,
    Vote,
    Header,
    Complain,
    FcPropose,
    FcVote,
    FcViewChange,
    Receipt,
    Sync,
};

enum class Action : std::uint8_t {
    Follow,      // run the honest rule
    Drop,        // emit nothing
    Equivocate,  // propose two sibling blocks
    Taint,       // add one unfunded transaction to the proposal
    VoteBlindly, // vote for an allied leader's block regardless of validity or earlier votes
};

struct DecisionContext {
    Step step = Step::Propose;
    /// The leader being voted for or complained about is an ally.
    bool counterpart_malicious = false;
};

/// Deterministic per-step decision. Honest and not-yet-active nodes always Follow.
Action adversary_decide(const Behavior& b, SimTime now, const DecisionContext& ctx);

/// Exact corruption of one shard, bypassing random sampling.
struct PlantedShard {
    PsId ps;
    std::uint32_t count = 0;
    Strategy strategy = Strategy::Silent;
    SimTime activation = 0;
    /// Corrupt the view-0 leader first.
    bool include_leader = false;
};

/// Corrupts the FC leaders of views 0..count−1.
struct PlantedFcLeaders {
    FcId fc;
    std::uint32_t count = 0;
    Strategy strategy = Strategy::Silent;
    SimTime activation = 0;
};

struct AttackPlan {
    /// Applied to the randomly sampled ⌊f·N⌋ set when nothing is planted.
    Strategy strategy = Strategy::Passive;
    SimTime activation = 0;
    std::vector<PlantedShard> planted;
    std::vector<PlantedFcLeaders> planted_fc_leaders;

    bool is_planted() const { return !planted.empty() || !planted_fc_leaders.empty(); }
};

class PlanError : public Error {
  public:
    using Error::Error;
};

/// Per-node behaviors. With planted entries the malicious set is exactly the
/// planted nodes; otherwise it is `random_set`.
std::vector<Behavior> realize_plan(const AttackPlan& plan, const std::vector<NodeId>& random_set,
                                   const Assignment& assignment, const EpochRandomness& rand);

/// Round-robin FC leader.
NodeId fc_leader(const Assignment& a, FcId fc, std::uint64_t view, const EpochRandomness& rand);
/// Initial PS leader.
NodeId ps_initial_leader(const Assignment& a, PsId ps, const EpochRandomness& rand);

}  // namespace dualchain
