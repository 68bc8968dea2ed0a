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

#include "dualchain/node.hpp"

namespace dualchain {

void Node::start(SimTime now, Effects& fx) {
    ps_.start(now, fx);
    fc_.start(now, fx);
}

void Node::hand_off(SimTime now, Effects& fx) {
    for (const auto& f : fc_.take_finalized()) ps_.on_finalized(now, f.block, *f.proposal, fx);
}

void Node::on_message(SimTime now, NodeId from, const Message& m, Effects& fx) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ProposalMsg>) ps_.on_proposal(now, msg, fx);
            else if constexpr (std::is_same_v<T, VoteMsg>) ps_.on_vote(now, msg, fx);
            else if constexpr (std::is_same_v<T, ReceiptMsg>) ps_.on_receipt(now, msg, fx);
            else if constexpr (std::is_same_v<T, BlockRequestMsg>) ps_.on_block_request(now, from, msg, fx);
            else if constexpr (std::is_same_v<T, BlockResponseMsg>) ps_.on_block_response(now, msg, fx);
            else if constexpr (std::is_same_v<T, HeaderMsg>) fc_.on_header(now, msg, fx);
            else if constexpr (std::is_same_v<T, ComplainMsg>) fc_.on_complaint(now, msg, fx);
            else if constexpr (std::is_same_v<T, FcProposalMsg>) fc_.on_proposal(now, msg, fx);
            else if constexpr (std::is_same_v<T, FcVoteMsg>) fc_.on_vote(now, msg, fx);
            else if constexpr (std::is_same_v<T, FcViewChangeMsg>) fc_.on_view_change(now, msg, fx);
        },
        m);
    hand_off(now, fx);
}

void Node::on_timer(SimTime now, const TimerRequest& t, Effects& fx) {
    if (t.kind == TimerKind::PsTimeout) {
        ps_.on_timeout(now, t, fx);
        return;
    }
    fc_.on_timeout(now, t, fx);
    hand_off(now, fx);
}

}  // namespace dualchain
