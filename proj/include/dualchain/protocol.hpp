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
#include <memory>
#include <variant>
#include <vector>

#include "dualchain/adversary.hpp"
#include "dualchain/identity.hpp"
#include "dualchain/ledger.hpp"
#include "dualchain/messages.hpp"
#include "dualchain/secparams.hpp"

namespace dualchain {

struct ProtocolConfig {
    SimTime delta = kTick;
    SimTime ps_base_timeout = 4 * kTick;
    SimTime fc_base_timeout = 6 * kTick;
    /// Delay between an FC finalization and the leader's next proposal.
    SimTime fc_interval = kTick;
    /// How long an FC node waits before trusting a NoProposal complaint.
    SimTime complaint_grace = kTick;
    std::uint32_t block_capacity = 64;
    bool pipelining = true;
    std::uint32_t max_speculative_depth = 8;
    /// Back-off exponents stop growing here.
    std::uint32_t max_backoff_exponent = 3;
};

/// Everything every node knows at epoch start. Immutable during a run.
struct World {
    secparams::EpochParams params;
    EpochRandomness rand;
    Assignment assignment;
    std::vector<std::vector<Principal>> accounts;  // funded, per home shard
    std::vector<Principal> adversary_accounts;     // unfunded, one per shard
    KeyRegistry keys;
    LedgerContext ctx;
    ProtocolConfig proto;
    std::uint64_t genesis_balance = 0;
    std::vector<Behavior> behavior;

    World(const secparams::EpochParams& params, const EpochRandomness& rand, const ProtocolConfig& proto,
          std::uint32_t accounts_per_shard, std::uint64_t genesis_balance);
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    std::uint32_t ps_count() const { return static_cast<std::uint32_t>(assignment.ps_count()); }
    bool is_malicious(NodeId n) const { return behavior.at(n.value).malicious; }
    ShardState genesis_state(PsId ps) const;
    std::uint64_t initial_supply() const;
};

enum class TimerKind : std::uint8_t { PsTimeout, FcTimeout, FcPropose, ComplaintGrace };

struct TimerRequest {
    SimTime at = 0;
    TimerKind kind = TimerKind::PsTimeout;
    std::uint64_t generation = 0;
    std::shared_ptr<const Complaint> complaint;  // ComplaintGrace only
};

enum class TraceKind : std::uint8_t {
    Propose,
    Vote,
    PsQuorum,
    Complain,
    AdoptLeader,
    FinalizeAdopted,
    FcCache,
    FcPropose,
    FcVote,
    FcFinal,
    ViewChange,
    FcView,
};
const char* to_string(TraceKind k);

struct TraceRecord {
    TraceKind kind;
    Hash256 detail;
};

struct Send {
    std::vector<NodeId> to;
    Message msg;
};

// Facts reported to the global oracle; never read back by nodes.
struct ObsProposed {
    PsId ps;
    std::uint64_t view = 0, height = 0;
    Hash256 hash;
};
struct ObsVoted {
    PsId ps;
    std::uint64_t view = 0, height = 0;
    Hash256 hash;
};
struct ObsPsQuorum {
    PsId ps;
    Hash256 hash;
};
struct ObsPsCommitted {
    PsId ps;
    std::uint64_t height = 0;
    Hash256 hash;
    std::shared_ptr<const ProposerBlock> block;
};
struct ObsFcProposed {
    std::shared_ptr<const FcProposal> proposal;
};
struct ObsFcFinalized {
    std::shared_ptr<const FcProposal> proposal;
    std::shared_ptr<const FinalizerBlock> block;  // with FC votes
};
struct ObsTallyQuorum {
    PsId ps;
    std::uint64_t view = 0;
};
struct ObsFcViewEntered {
    FcId fc;
    std::uint64_t view = 0;
};
struct ObsStuck {
    PsId ps;
    Hash256 hash;  // finalized block this node cannot apply
};
using Observation = std::variant<ObsProposed, ObsVoted, ObsPsQuorum, ObsPsCommitted, ObsFcProposed, ObsFcFinalized,
                                 ObsTallyQuorum, ObsFcViewEntered, ObsStuck>;

/// Output of one handler invocation.
struct Effects {
    std::vector<Send> sends;
    std::vector<TimerRequest> timers;
    std::vector<TraceRecord> trace;
    std::vector<Observation> observations;
};

}  // namespace dualchain
