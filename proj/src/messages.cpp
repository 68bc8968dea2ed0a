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

#include "dualchain/messages.hpp"

namespace dualchain {

Hash256 Complaint::digest() const {
    Encoder e;
    e.str("complain").u32(ps.value).u32(suspect.value).u64(view).u8(static_cast<std::uint8_t>(reason)).u64(last_height);
    e.u32(static_cast<std::uint32_t>(evidence.size()));
    for (const auto& h : evidence) e.hash(h.hash()).hash(h.leader_sig.tag);
    e.u32(complainer.value);
    return e.digest();
}

Hash256 FcViewChange::digest() const {
    Encoder e;
    e.str("fc-view-change").u32(fc.value).u64(new_view).u64(finalized_height).u8(has_vote ? 1 : 0);
    e.u64(voted_height).u64(voted_view).hash(voted_hash).u32(signer.value);
    return e.digest();
}

Hash256 FcProposal::signing_digest() const {
    Encoder e;
    e.str("fc-proposal").hash(block.hash()).u64(block.view).u32(block.proposer.value);
    return e.digest();
}

std::string_view message_name(const Message& m) {
    struct Visitor {
        std::string_view operator()(const ProposalMsg&) const { return "Proposal"; }
        std::string_view operator()(const VoteMsg&) const { return "Vote"; }
        std::string_view operator()(const HeaderMsg&) const { return "Header"; }
        std::string_view operator()(const ComplainMsg&) const { return "Complain"; }
        std::string_view operator()(const FcProposalMsg&) const { return "FcProposal"; }
        std::string_view operator()(const FcVoteMsg&) const { return "FcVote"; }
        std::string_view operator()(const FcViewChangeMsg&) const { return "FcViewChange"; }
        std::string_view operator()(const ReceiptMsg&) const { return "Receipt"; }
        std::string_view operator()(const BlockRequestMsg&) const { return "BlockRequest"; }
        std::string_view operator()(const BlockResponseMsg&) const { return "BlockResponse"; }
    };
    return std::visit(Visitor{}, m);
}

}  // namespace dualchain
