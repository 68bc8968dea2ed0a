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

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dualchain/protocol.hpp"

namespace dualchain {

/// A finalized FC block together with the proposal that carried it.
struct FcFinalization {
    std::shared_ptr<const FinalizerBlock> block;  // with FC votes
    std::shared_ptr<const FcProposal> proposal;
};

/// One node's finalizer-committee state machine.
class FcReplica {
  public:
    FcReplica(NodeId self, const World& world);

    void start(SimTime now, Effects& fx);
    void on_header(SimTime now, const HeaderMsg& m, Effects& fx);
    void on_complaint(SimTime now, const ComplainMsg& m, Effects& fx);
    void on_proposal(SimTime now, const FcProposalMsg& m, Effects& fx);
    void on_vote(SimTime now, const FcVoteMsg& m, Effects& fx);
    void on_view_change(SimTime now, const FcViewChangeMsg& m, Effects& fx);
    void on_timeout(SimTime now, const TimerRequest& t, Effects& fx);

    /// Finalizations since the last call, oldest first.
    std::vector<FcFinalization> take_finalized();

    FcId fc() const { return fc_; }
    std::uint64_t view() const { return view_; }
    NodeId leader() const { return leader_; }
    bool is_leader() const { return leader_ == self_; }
    std::uint64_t height() const { return height_; }
    const Hash256& tip() const { return tip_; }
    std::uint64_t backoff_exponent() const { return exp_; }
    /// Finalized PS tip and view as tracked by this FC node.
    Hash256 ps_tip(PsId ps) const;
    std::uint64_t ps_height(PsId ps) const;
    std::uint64_t ps_view(PsId ps) const;
    NodeId ps_leader(PsId ps) const;
    /// Complaints counted against the current leader of `ps`.
    std::size_t counted_complaints(PsId ps) const;
    std::size_t cached_headers(PsId ps) const;
    /// Arrival time of the oldest cached, not yet finalized header.
    std::optional<SimTime> oldest_candidate() const;

  private:
    struct Known {
        std::shared_ptr<const ProposerHeader> header;
        SimTime arrival = 0;
    };
    struct Track {
        PsId ps;
        Hash256 tip;
        std::uint64_t height = 0;
        std::uint64_t view = 0;
        std::map<std::uint64_t, NodeId> leaders;  // by view
        std::unordered_map<Hash256, Known, Hash256Hasher> known;
        std::unordered_map<Hash256, std::vector<Hash256>, Hash256Hasher> children;
        std::vector<std::shared_ptr<const ProposerHeader>> held;     // headers of views not yet known
        std::vector<std::shared_ptr<const Complaint>> held_complaints;
        std::map<std::uint64_t, std::uint64_t> max_height;  // by view
        std::map<NodeId, std::shared_ptr<const Complaint>> counted;  // current view, by complainer
        bool tally_reported = false;
        NodeId leader() const { return leaders.rbegin()->second; }
    };

    Action decide(Step step) const;
    bool send(Step step, Message msg);
    void trace(TraceKind k, const Hash256& h);

    Track* track(PsId ps);
    const Track* track(PsId ps) const;
    bool header_valid(const Track& t, const ProposerHeader& h, const Hash256& hash);
    void admit_header(Track& t, const std::shared_ptr<const ProposerHeader>& h);
    bool complaint_valid(const Track& t, const Complaint& c, const Hash256& digest);
    void accept_complaint(Track& t, const std::shared_ptr<const Complaint>& c);
    void count_complaint(Track& t, const std::shared_ptr<const Complaint>& c);
    std::vector<const ProposerHeader*> candidate_chain(const Track& t) const;

    void arm_view_timer();
    void schedule_proposal(SimTime at);
    void propose();
    std::shared_ptr<const FcProposal> fresh_proposal() const;
    bool proposal_valid(const FcProposal& p);
    /// `locked` is set when the justification forces this exact body.
    bool justification_valid(const FcProposal& p, bool& locked) const;
    void consider(const std::shared_ptr<const FcProposal>& p);
    void try_finalize(std::uint64_t height, std::uint64_t view, const Hash256& hash);
    void finalize(const std::shared_ptr<const FcProposal>& p, std::uint64_t view, const AggregateVotes& votes);
    void send_view_change(std::uint64_t new_view);
    void enter_view(std::uint64_t view);
    void replay_buffers();

    NodeId self_;
    const World* world_;
    Signer signer_;
    FcId fc_;
    const std::vector<NodeId>* members_;
    const Behavior* behavior_;
    std::vector<Track> tracks_;  // one per PS of this FC, in PS order

    SimTime now_ = 0;
    Effects* fx_ = nullptr;

    std::uint64_t view_ = 0;
    NodeId leader_;
    std::uint64_t height_ = 0;
    Hash256 tip_;
    std::uint64_t last_fin_view_ = 0;
    std::vector<FcFinalization> handoff_;

    std::unordered_set<Hash256, Hash256Hasher> verified_headers_;
    std::unordered_set<Hash256, Hash256Hasher> verified_complaints_;  // signature and evidence only
    std::unordered_map<Hash256, std::shared_ptr<const FcProposal>, Hash256Hasher> bodies_;
    std::vector<std::shared_ptr<const FcProposal>> buffered_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Hash256> my_votes_;  // (height, view)
    std::optional<std::pair<std::uint64_t, std::shared_ptr<const FcProposal>>> last_vote_;  // (view, body)
    std::map<std::tuple<std::uint64_t, std::uint64_t, Hash256>, AggregateVotes> tallies_;  // (height, view, hash)
    std::set<std::pair<std::uint64_t, std::uint64_t>> proposed_;           // (height, view)

    std::map<std::uint64_t, std::map<NodeId, std::shared_ptr<const FcViewChange>>> vcs_;  // by new_view
    std::uint64_t vc_sent_ = 0;

    std::uint64_t view_generation_ = 0;
    std::uint64_t propose_generation_ = 0;
    std::uint32_t exp_ = 0;
};

}  // namespace dualchain
