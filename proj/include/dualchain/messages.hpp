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
#include <string_view>
#include <variant>
#include <vector>

#include "dualchain/identity.hpp"
#include "dualchain/ledger.hpp"

namespace dualchain {

enum class ComplaintReason : std::uint8_t { NoProposal = 0, Equivocation = 1 };

/// A PS member's accusation against its leader.
struct Complaint {
    PsId ps;
    NodeId suspect;
    std::uint64_t view = 0;
    ComplaintReason reason = ComplaintReason::NoProposal;
    /// Highest height the complainer saw from the suspect in this view.
    std::uint64_t last_height = 0;
    /// Two leader-signed headers of one height (Equivocation only).
    std::vector<ProposerHeader> evidence;
    NodeId complainer;
    Signature sig;

    Hash256 digest() const;
};

struct FcProposal;

/// FC-internal view change vote; reports the sender's latest FC vote.
struct FcViewChange {
    FcId fc;
    std::uint64_t new_view = 0;
    std::uint64_t finalized_height = 0;
    bool has_vote = false;
    std::uint64_t voted_height = 0;
    std::uint64_t voted_view = 0;
    Hash256 voted_hash;
    NodeId signer;
    Signature sig;
    /// Body of the reported vote so a new leader can re-propose it. Checked
    /// against voted_hash, not signed.
    std::shared_ptr<const FcProposal> voted;

    Hash256 digest() const;
};

/// A finalizer block proposal with everything a voter needs to check it.
struct FcProposal {
    FinalizerBlock block;
    std::vector<ProposerHeader> headers;  // one per segment hash, in segment order
    std::vector<Complaint> complaints;    // backing every view_change entry
    std::vector<FcViewChange> justification;
    Signature leader_sig;

    Hash256 signing_digest() const;
};

struct ProposalMsg {
    std::shared_ptr<const ProposerBlock> block;
};
struct VoteMsg {
    std::shared_ptr<const ProposerHeader> header;  // without votes
    Signature sig;
};
struct HeaderMsg {
    std::shared_ptr<const ProposerHeader> header;  // with PS votes
};
struct ComplainMsg {
    std::shared_ptr<const Complaint> complaint;
};
struct FcProposalMsg {
    std::shared_ptr<const FcProposal> proposal;
};
struct FcVoteMsg {
    Hash256 block;
    std::uint64_t height = 0;
    std::uint64_t view = 0;
    Signature sig;
};
struct FcViewChangeMsg {
    std::shared_ptr<const FcViewChange> vc;
};
struct ReceiptMsg {
    std::shared_ptr<const Receipt> receipt;
};
struct BlockRequestMsg {
    Hash256 hash;
};
struct BlockResponseMsg {
    std::shared_ptr<const ProposerBlock> block;
};

using Message = std::variant<ProposalMsg, VoteMsg, HeaderMsg, ComplainMsg, FcProposalMsg, FcVoteMsg,
                             FcViewChangeMsg, ReceiptMsg, BlockRequestMsg, BlockResponseMsg>;

std::string_view message_name(const Message& m);

}  // namespace dualchain
