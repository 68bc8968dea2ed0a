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

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dualchain/protocol.hpp"

namespace dualchain {

/// One node's proposer-shard state machine. Handlers append their outputs to
/// an Effects value and never block.
class PsReplica {
  public:
    PsReplica(NodeId self, const World& world);

    void start(SimTime now, Effects& fx);
    void on_client_tx(SimTime now, const Transaction& tx, Effects& fx);
    void on_proposal(SimTime now, const ProposalMsg& m, Effects& fx);
    void on_vote(SimTime now, const VoteMsg& m, Effects& fx);
    void on_receipt(SimTime now, const ReceiptMsg& m, Effects& fx);
    void on_block_request(SimTime now, NodeId from, const BlockRequestMsg& m, Effects& fx);
    void on_block_response(SimTime now, const BlockResponseMsg& m, Effects& fx);
    /// A finalizer block of this node's FC, already carrying an FC quorum.
    void on_finalized(SimTime now, const std::shared_ptr<const FinalizerBlock>& fin, const FcProposal& prop,
                      Effects& fx);
    void on_timeout(SimTime now, const TimerRequest& t, Effects& fx);

    PsId ps() const { return ps_; }
    std::uint64_t view() const { return view_; }
    NodeId leader() const { return leader_; }
    bool is_leader() const { return leader_ == self_; }
    const ShardState& finalized() const { return fin_; }
    std::size_t speculative_size() const { return tree_.size(); }
    bool knows_block(const Hash256& h) const { return tree_.count(h) > 0; }
    bool has_quorum(const Hash256& h) const;
    std::uint32_t backoff_exponent() const { return exp_; }
    std::optional<SimTime> deadline() const { return armed_ ? std::optional<SimTime>(deadline_) : std::nullopt; }
    std::size_t mempool_size() const { return mempool_.size(); }
    std::size_t queued_receipts() const;
    std::size_t pending_finalization() const { return pending_.size(); }
    /// Hash voted at (view, height), if any.
    std::optional<Hash256> vote_at(std::uint64_t view, std::uint64_t height) const;

  private:
    struct Entry {
        std::shared_ptr<const ProposerBlock> block;
        Hash256 parent;
        std::uint64_t height = 0;
        BlockDelta delta;
        bool quorum = false;
        SimTime quorum_time = 0;
    };
    struct Tally {
        std::shared_ptr<const ProposerHeader> header;
        AggregateVotes votes;
        std::shared_ptr<const ProposerHeader> certified;
        bool forwarded = false;
    };
    struct PendingFinal {
        Hash256 hash;
        ProposerHeader header;  // with PS votes
        std::shared_ptr<const FinalizerBlock> fin;
        bool requested = false;
    };

    Action decide(Step step, bool counterpart_malicious = false) const;
    bool send(Step step, const std::vector<NodeId>& to, Message msg);
    void trace(TraceKind k, const Hash256& h);

    bool leader_sig_ok(const ProposerHeader& h, const Hash256& hash) const;
    void note_signed_header(const ProposerHeader& h, const Hash256& hash);
    StateView view_at(const Hash256& parent) const;
    bool insert_block(const std::shared_ptr<const ProposerBlock>& block);
    void adopt_orphans(const Hash256& parent);
    void request_missing(const Hash256& hash, NodeId hint);
    void handle_block(const std::shared_ptr<const ProposerBlock>& block, bool from_network);
    void cast_vote(const ProposerHeader& header, bool honest_rule);
    void check_quorum(const Hash256& h);
    void maybe_forward(const Hash256& h);

    std::optional<Hash256> proposal_parent() const;
    std::uint64_t certified_depth() const;
    bool waiting_on_fc() const;
    void try_propose();
    ProposerBlock build_block(const Hash256& parent, std::uint64_t height, std::size_t skip_txs, bool taint) const;
    void sign_and_root(ProposerBlock& b) const;

    void arm(SimTime at);
    void cancel_timer();
    void refresh_timer();
    void progress();
    void complain(ComplaintReason reason);

    void adopt_view(std::uint64_t view, NodeId leader);
    void drain_pending();
    void commit_block(const PendingFinal& p);
    void prune();

    NodeId self_;
    const World* world_;
    Signer signer_;
    PsId ps_;
    FcId fc_;
    const std::vector<NodeId>* members_;
    const std::vector<NodeId>* fc_members_;
    const Behavior* behavior_;

    // Per-call context.
    SimTime now_ = 0;
    Effects* fx_ = nullptr;

    std::uint64_t view_ = 0;
    NodeId leader_;
    std::uint64_t leader_max_height_ = 0;

    ShardState fin_;
    Hash256 latest_fc_;
    std::unordered_map<Hash256, std::shared_ptr<const ProposerBlock>, Hash256Hasher> finalized_blocks_;

    std::unordered_map<Hash256, Entry, Hash256Hasher> tree_;
    std::unordered_map<Hash256, std::vector<Hash256>, Hash256Hasher> children_;
    std::unordered_map<Hash256, std::vector<std::shared_ptr<const ProposerBlock>>, Hash256Hasher> orphans_;
    std::vector<std::shared_ptr<const ProposerBlock>> future_;
    std::unordered_set<Hash256, Hash256Hasher> requested_;

    std::unordered_map<Hash256, Tally, Hash256Hasher> tallies_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Hash256> vote_log_;
    std::unordered_set<Hash256, Hash256Hasher> voted_;
    struct SignedHeader {
        ProposerHeader header;
        Hash256 hash;
    };
    std::map<std::pair<std::uint64_t, std::uint64_t>, SignedHeader> signed_headers_;
    std::optional<std::pair<ProposerHeader, ProposerHeader>> evidence_;
    std::optional<std::uint64_t> equivocation_reported_view_;
    std::set<std::pair<std::uint64_t, Hash256>> proposed_;

    std::set<std::pair<SimTime, Hash256>> mempool_order_;
    std::unordered_map<Hash256, Transaction, Hash256Hasher> mempool_;
    std::vector<std::deque<std::shared_ptr<const Receipt>>> receipts_;  // by source PS, FIFO
    std::unordered_set<Hash256, Hash256Hasher> receipt_seen_;

    std::deque<PendingFinal> pending_;

    std::uint64_t generation_ = 0;
    bool armed_ = false;
    SimTime deadline_ = 0;
    std::uint32_t exp_ = 0;
};

}  // namespace dualchain
