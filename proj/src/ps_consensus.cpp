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

#include "dualchain/ps_consensus.hpp"

#include <algorithm>

namespace dualchain {

PsReplica::PsReplica(NodeId self, const World& world)
    : self_(self),
      world_(&world),
      signer_(world.keys.issue(principal_of(self))),
      ps_(world.assignment.ps_of.at(self.value)),
      fc_(world.assignment.fc_of.at(self.value)),
      members_(&world.assignment.ps_members(ps_)),
      fc_members_(&world.assignment.fc_members(fc_)),
      behavior_(&world.behavior.at(self.value)),
      leader_(ps_initial_leader(world.assignment, ps_, world.rand)),
      fin_(world.genesis_state(ps_)),
      latest_fc_(fc_genesis(fc_)),
      receipts_(world.ps_count()) {}

// --- plumbing ---------------------------------------------------------------

Action PsReplica::decide(Step step, bool counterpart_malicious) const {
    return adversary_decide(*behavior_, now_, DecisionContext{step, counterpart_malicious});
}

bool PsReplica::send(Step step, const std::vector<NodeId>& to, Message msg) {
    const bool ally = step == Step::Complain && world_->is_malicious(leader_);
    if (decide(step, ally) == Action::Drop) return false;
    fx_->sends.push_back(Send{to, std::move(msg)});
    return true;
}

void PsReplica::trace(TraceKind k, const Hash256& h) { fx_->trace.push_back(TraceRecord{k, h}); }

bool PsReplica::has_quorum(const Hash256& h) const {
    auto it = tallies_.find(h);
    return it != tallies_.end() && it->second.certified != nullptr;
}

std::size_t PsReplica::queued_receipts() const {
    std::size_t n = 0;
    for (const auto& q : receipts_) n += q.size();
    return n;
}

std::optional<Hash256> PsReplica::vote_at(std::uint64_t view, std::uint64_t height) const {
    auto it = vote_log_.find({view, height});
    if (it == vote_log_.end()) return std::nullopt;
    return it->second;
}

// --- timer --------------------------------------------------------------------

void PsReplica::arm(SimTime at) {
    armed_ = true;
    deadline_ = at;
    fx_->timers.push_back(TimerRequest{at, TimerKind::PsTimeout, ++generation_, nullptr});
}

void PsReplica::cancel_timer() {
    if (!armed_) return;
    armed_ = false;
    ++generation_;
}

void PsReplica::refresh_timer() {
    if (is_leader() || waiting_on_fc()) {
        cancel_timer();
        return;
    }
    if (!armed_) arm(now_ + (world_->proto.ps_base_timeout << exp_));
}

void PsReplica::progress() {
    exp_ = 0;
    cancel_timer();
    refresh_timer();
}

void PsReplica::on_timeout(SimTime now, const TimerRequest& t, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!armed_ || t.generation != generation_) return;
    armed_ = false;
    complain(evidence_ ? ComplaintReason::Equivocation : ComplaintReason::NoProposal);
    exp_ = std::min(exp_ + 1, world_->proto.max_backoff_exponent);
    refresh_timer();
}

void PsReplica::complain(ComplaintReason reason) {
    if (is_leader()) return;
    Complaint c;
    c.ps = ps_;
    c.suspect = leader_;
    c.view = view_;
    c.reason = reason;
    c.last_height = leader_max_height_;
    if (reason == ComplaintReason::Equivocation && evidence_) c.evidence = {evidence_->first, evidence_->second};
    c.complainer = self_;
    c.sig = signer_.sign(c.digest());
    const Hash256 d = c.digest();
    if (send(Step::Complain, *fc_members_, ComplainMsg{std::make_shared<const Complaint>(std::move(c))}))
        trace(TraceKind::Complain, d);
}

// --- lifecycle ----------------------------------------------------------------

void PsReplica::start(SimTime now, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    refresh_timer();
    try_propose();
}

void PsReplica::on_client_tx(SimTime now, const Transaction& tx, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (mempool_.count(tx.id) || fin_.included_txs.count(tx.id)) return;
    if (home_shard(tx.payer, world_->ps_count()) != ps_.value || !tx_signature_ok(tx, world_->ctx)) return;
    mempool_.emplace(tx.id, tx);
    mempool_order_.insert({tx.issue_time, tx.id});
}

void PsReplica::on_receipt(SimTime now, const ReceiptMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    const auto& r = m.receipt;
    if (!r || r->dest_ps != ps_ || r->source_ps.value >= receipts_.size()) return;
    const Hash256 d = r->batch_digest();
    if (receipt_seen_.count(d) || fin_.applied_receipts.count(d)) return;
    if (!verify_receipt(*r, world_->ctx)) return;
    receipt_seen_.insert(d);
    receipts_[r->source_ps.value].push_back(r);
}

// --- blocks -----------------------------------------------------------------

bool PsReplica::leader_sig_ok(const ProposerHeader& h, const Hash256& hash) const {
    if (member_position(*members_, h.leader) < 0) return false;
    return verify(world_->keys, h.leader_sig, hash, h.leader);
}

void PsReplica::note_signed_header(const ProposerHeader& h, const Hash256& hash) {
    if (h.view != view_ || h.leader != leader_) return;
    auto [it, fresh] = signed_headers_.try_emplace({h.view, h.height}, SignedHeader{h, hash});
    if (fresh || evidence_ || it->second.hash == hash) return;
    if (!leader_sig_ok(it->second.header, it->second.hash) || !leader_sig_ok(h, hash)) return;
    evidence_ = {it->second.header, h};
    if (equivocation_reported_view_ != view_) {
        equivocation_reported_view_ = view_;
        complain(ComplaintReason::Equivocation);
    }
}

StateView PsReplica::view_at(const Hash256& parent) const {
    std::vector<const BlockDelta*> overlays;
    Hash256 cur = parent;
    while (cur != fin_.tip) {
        const auto& e = tree_.at(cur);
        overlays.push_back(&e.delta);
        cur = e.parent;
    }
    return StateView(fin_, std::move(overlays));
}

bool PsReplica::insert_block(const std::shared_ptr<const ProposerBlock>& block) {
    const auto& h = block->header;
    const Hash256 hash = h.hash();
    if (tree_.count(hash)) return true;
    std::uint64_t parent_height = 0;
    if (h.parent == fin_.tip) {
        parent_height = fin_.height;
    } else {
        auto it = tree_.find(h.parent);
        if (it == tree_.end()) return false;
        parent_height = it->second.height;
    }
    if (h.height != parent_height + 1 || !leader_sig_ok(h, hash)) return false;
    BlockDelta delta;
    try {
        delta = apply_block(view_at(h.parent), *block, world_->ctx);
    } catch (const InvalidBlock&) {
        return false;
    }
    Entry e;
    e.block = block;
    e.parent = h.parent;
    e.height = h.height;
    e.delta = std::move(delta);
    if (auto t = tallies_.find(hash); t != tallies_.end() && t->second.certified) {
        e.quorum = true;
        e.quorum_time = now_;
    }
    tree_.emplace(hash, std::move(e));
    children_[h.parent].push_back(hash);
    return true;
}

void PsReplica::adopt_orphans(const Hash256& parent) {
    auto it = orphans_.find(parent);
    if (it == orphans_.end()) return;
    auto list = std::move(it->second);
    orphans_.erase(it);
    for (const auto& b : list) handle_block(b, true);
}

void PsReplica::on_proposal(SimTime now, const ProposalMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!m.block || m.block->header.ps != ps_) return;
    handle_block(m.block, true);
    drain_pending();
    try_propose();
    refresh_timer();
}

void PsReplica::handle_block(const std::shared_ptr<const ProposerBlock>& block, bool from_network) {
    const auto& h = block->header;
    if (h.height <= fin_.height) return;
    if (h.view > view_) {
        future_.push_back(block);
        return;
    }
    const Hash256 hash = h.hash();
    note_signed_header(h, hash);
    const bool from_leader = h.view == view_ && h.leader == leader_;
    const bool parent_known = h.parent == fin_.tip || tree_.count(h.parent) > 0;

    const Action a = decide(Step::Vote, world_->is_malicious(h.leader));
    if (a == Action::VoteBlindly && from_network && leader_sig_ok(h, hash)) {
        if (parent_known) insert_block(block);
        cast_vote(h, false);
        if (parent_known) adopt_orphans(hash);
        return;
    }
    if (!parent_known) {
        if (h.height > fin_.height + 4 * world_->proto.max_speculative_depth) return;
        orphans_[h.parent].push_back(block);
        request_missing(h.parent, h.leader);
        return;
    }
    if (!insert_block(block)) return;
    if (from_leader) {
        if (h.height > leader_max_height_) {
            leader_max_height_ = h.height;
            progress();
        }
        if (from_network && !vote_log_.count({h.view, h.height})) cast_vote(h, true);
    }
    adopt_orphans(hash);
}

void PsReplica::request_missing(const Hash256& hash, NodeId hint) {
    if (!requested_.insert(hash).second) return;
    // Ask whoever built on it plus a few of its voters.
    std::vector<NodeId> to;
    if (hint != self_) to.push_back(hint);
    if (auto t = tallies_.find(hash); t != tallies_.end()) {
        for (const auto& [pos, tag] : t->second.votes.entries) {
            if (to.size() >= 3) break;
            const NodeId n = (*members_)[pos];
            if (n != self_ && std::find(to.begin(), to.end(), n) == to.end()) to.push_back(n);
        }
    }
    if (!to.empty()) send(Step::Sync, to, BlockRequestMsg{hash});
}

void PsReplica::cast_vote(const ProposerHeader& header, bool honest_rule) {
    const Hash256 hash = header.hash();
    if (voted_.count(hash)) return;
    ProposerHeader bare = header;
    bare.votes = AggregateVotes{};
    Signature sig = signer_.sign(hash);
    if (!send(Step::Vote, *members_, VoteMsg{std::make_shared<const ProposerHeader>(std::move(bare)), sig})) return;
    if (honest_rule) vote_log_[{header.view, header.height}] = hash;
    voted_.insert(hash);
    trace(TraceKind::Vote, hash);
    fx_->observations.push_back(ObsVoted{ps_, header.view, header.height, hash});
    maybe_forward(hash);
}

void PsReplica::on_vote(SimTime now, const VoteMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!m.header || m.header->ps != ps_ || m.header->height <= fin_.height) return;
    const Hash256 hash = m.header->hash();
    if (m.sig.digest != hash || m.sig.signer >= kAccountBase) return;
    const NodeId voter(static_cast<std::uint32_t>(m.sig.signer));
    const auto pos = member_position(*members_, voter);
    if (pos < 0 || !verify(world_->keys, m.sig, hash, voter)) return;
    auto& t = tallies_[hash];
    if (!t.header) note_signed_header(*m.header, hash);
    if (!t.header) {
        t.header = m.header;
        t.votes.digest = hash;
    }
    if (!t.votes.add(static_cast<std::uint32_t>(pos), m.sig.tag)) return;
    check_quorum(hash);
    try_propose();
    refresh_timer();
}

void PsReplica::check_quorum(const Hash256& hash) {
    auto& t = tallies_.at(hash);
    if (t.certified || t.votes.size() < world_->ctx.quorum_ps) return;
    auto cert = std::make_shared<ProposerHeader>(*t.header);
    cert->votes = t.votes;
    t.certified = std::move(cert);
    if (auto it = tree_.find(hash); it != tree_.end()) {
        it->second.quorum = true;
        it->second.quorum_time = now_;
    }
    trace(TraceKind::PsQuorum, hash);
    fx_->observations.push_back(ObsPsQuorum{ps_, hash});
    maybe_forward(hash);
}

void PsReplica::maybe_forward(const Hash256& hash) {
    auto it = tallies_.find(hash);
    if (it == tallies_.end() || !it->second.certified || it->second.forwarded || !voted_.count(hash)) return;
    it->second.forwarded = true;
    send(Step::Header, *fc_members_, HeaderMsg{it->second.certified});
}

// --- proposing ------------------------------------------------------------------

std::uint64_t PsReplica::certified_depth() const {
    // Depth of the deepest chain of quorum blocks above the finalized tip.
    std::uint64_t best = 0;
    std::vector<std::pair<Hash256, std::uint64_t>> stack{{fin_.tip, 0}};
    while (!stack.empty()) {
        auto [h, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        auto it = children_.find(h);
        if (it == children_.end()) continue;
        for (const auto& c : it->second) {
            auto e = tree_.find(c);
            if (e != tree_.end() && e->second.quorum && e->second.block->header.view == view_) stack.push_back({c, d + 1});
        }
    }
    return best;
}

std::optional<Hash256> PsReplica::proposal_parent() const {
    if (!world_->proto.pipelining) {
        // One block at a time: wait until the previous one is finalized.
        if (auto it = children_.find(fin_.tip); it != children_.end()) {
            for (const auto& c : it->second) {
                const auto& e = tree_.at(c);
                if (e.quorum && e.block->header.view == view_) return std::nullopt;
            }
        }
        return fin_.tip;
    }
    // Deepest quorum chain of this view; ties go to the earliest quorum, then
    // the lower hash. Older views can no longer be finalized.
    Hash256 best = fin_.tip;
    std::uint64_t best_h = fin_.height;
    SimTime best_t = 0;
    std::vector<Hash256> stack{fin_.tip};
    while (!stack.empty()) {
        const Hash256 h = stack.back();
        stack.pop_back();
        auto it = children_.find(h);
        if (it == children_.end()) continue;
        for (const auto& c : it->second) {
            const auto& e = tree_.at(c);
            if (!e.quorum || e.block->header.view != view_) continue;
            stack.push_back(c);
            if (e.height > best_h || (e.height == best_h && (e.quorum_time < best_t || (e.quorum_time == best_t && c < best)))) {
                best = c;
                best_h = e.height;
                best_t = e.quorum_time;
            }
        }
    }
    if (best_h - fin_.height >= world_->proto.max_speculative_depth) return std::nullopt;
    return best;
}

bool PsReplica::waiting_on_fc() const {
    if (!world_->proto.pipelining) {
        auto it = children_.find(fin_.tip);
        if (it == children_.end()) return false;
        for (const auto& c : it->second) {
            const auto& e = tree_.at(c);
            if (e.quorum && e.block->header.view == view_) return true;
        }
        return false;
    }
    return certified_depth() >= world_->proto.max_speculative_depth;
}

void PsReplica::sign_and_root(ProposerBlock& b) const {
    b.outbox = partition_outbox(b.txs, ps_, world_->ps_count());
    b.header.tx_root = b.compute_tx_root();
    b.header.leader_sig = signer_.sign(b.header.hash());
}

ProposerBlock PsReplica::build_block(const Hash256& parent, std::uint64_t height, std::size_t skip_txs,
                                     bool taint) const {
    ProposerBlock b;
    b.header.ps = ps_;
    b.header.view = view_;
    b.header.height = height;
    b.header.parent = parent;
    b.header.latest_fc_block = latest_fc_;
    b.header.latest_finalized = fin_.tip;
    b.header.leader = self_;

    const StateView view = view_at(parent);
    const std::size_t cap = world_->ctx.block_capacity;
    std::size_t load = taint ? 1 : 0;
    std::unordered_set<Hash256, Hash256Hasher> chosen;
    for (const auto& queue : receipts_) {
        for (const auto& r : queue) {
            const Hash256 d = r->batch_digest();
            if (view.has_receipt(d) || chosen.count(d)) continue;
            if (load + r->batch.size() > cap) break;
            chosen.insert(d);
            load += r->batch.size();
            b.deposits.push_back(r);
        }
    }
    std::map<Address, std::uint64_t> spent;
    std::size_t skipped = 0;
    for (const auto& [t, id] : mempool_order_) {
        if (load >= cap) break;
        const Transaction& tx = mempool_.at(id);
        if (view.has_tx(id)) continue;
        auto it = spent.find(tx.payer);
        const std::uint64_t bal = it != spent.end() ? it->second : view.balance(tx.payer);
        if (bal < tx.amount) continue;
        if (skipped < skip_txs) {
            ++skipped;
            continue;
        }
        spent[tx.payer] = bal - tx.amount;
        b.txs.push_back(tx);
        ++load;
    }
    if (taint) {
        const Principal acct = world_->adversary_accounts.at(ps_.value);
        const Address from = account_address_for(acct);
        const Address to = account_address_for(world_->accounts.at(ps_.value).front());
        b.txs.push_back(Transaction::make(world_->keys.issue(acct), from, to, 1, now_, height ^ (std::uint64_t{self_.value} << 40)));
    }
    return b;
}

void PsReplica::try_propose() {
    if (!is_leader() || !pending_.empty()) return;
    const auto parent = proposal_parent();
    if (!parent) return;
    if (!proposed_.insert({view_, *parent}).second) return;
    const Action a = decide(Step::Propose);
    if (a == Action::Drop) return;
    const std::uint64_t height = (*parent == fin_.tip ? fin_.height : tree_.at(*parent).height) + 1;

    auto emit = [&](ProposerBlock b, const std::vector<NodeId>& to) {
        sign_and_root(b);
        const Hash256 h = b.header.hash();
        fx_->sends.push_back(Send{to, ProposalMsg{std::make_shared<const ProposerBlock>(std::move(b))}});
        trace(TraceKind::Propose, h);
        fx_->observations.push_back(ObsProposed{ps_, view_, height, h});
    };

    if (a != Action::Equivocate) {
        emit(build_block(*parent, height, 0, a == Action::Taint), *members_);
        return;
    }
    // Sibling blocks with distinct transaction sets; honest members split in
    // two halves, allies receive both.
    ProposerBlock first = build_block(*parent, height, 0, false);
    ProposerBlock second = build_block(*parent, height, 1, false);
    sign_and_root(first);
    sign_and_root(second);
    if (first.header.hash() == second.header.hash()) {
        second.header.latest_fc_block = sha256(first.header.hash().hex());
    }
    std::vector<NodeId> honest, allies;
    for (auto n : *members_) (world_->is_malicious(n) ? allies : honest).push_back(n);
    std::vector<NodeId> to_a(honest.begin(), honest.begin() + static_cast<std::ptrdiff_t>((honest.size() + 1) / 2));
    std::vector<NodeId> to_b(honest.begin() + static_cast<std::ptrdiff_t>((honest.size() + 1) / 2), honest.end());
    to_a.insert(to_a.end(), allies.begin(), allies.end());
    to_b.insert(to_b.end(), allies.begin(), allies.end());
    emit(std::move(first), to_a);
    emit(std::move(second), to_b);
}

// --- finalization -----------------------------------------------------------------

void PsReplica::adopt_view(std::uint64_t view, NodeId leader) {
    view_ = view;
    leader_ = leader;
    leader_max_height_ = 0;
    evidence_.reset();
    Encoder e;
    e.str("adopt").u32(ps_.value).u64(view).u32(leader.value);
    trace(TraceKind::AdoptLeader, e.digest());
    auto pending = std::move(future_);
    future_.clear();
    for (const auto& b : pending) handle_block(b, true);
}

void PsReplica::on_finalized(SimTime now, const std::shared_ptr<const FinalizerBlock>& fin, const FcProposal& prop,
                             Effects& fx) {
    now_ = now;
    fx_ = &fx;
    latest_fc_ = fin->hash();
    bool moved = false;
    for (const auto& vc : fin->view_changes) {
        if (vc.ps == ps_ && vc.new_view > view_) {
            adopt_view(vc.new_view, vc.new_leader);
            moved = true;
        }
    }
    std::size_t idx = 0;
    for (const auto& seg : fin->segments) {
        for (const auto& h : seg.headers) {
            if (seg.ps == ps_) {
                const ProposerHeader& hdr = prop.headers.at(idx);
                if (hdr.height > fin_.height) pending_.push_back(PendingFinal{h, hdr, fin, false});
                moved = true;
            }
            ++idx;
        }
    }
    drain_pending();
    if (moved) progress();
    try_propose();
    refresh_timer();
}

void PsReplica::drain_pending() {
    while (!pending_.empty()) {
        auto& p = pending_.front();
        if (p.header.height <= fin_.height) {
            pending_.pop_front();
            continue;
        }
        auto it = tree_.find(p.hash);
        if (it != tree_.end() && it->second.parent == fin_.tip) {
            const PendingFinal done = p;
            pending_.pop_front();
            commit_block(done);
            continue;
        }
        if (it != tree_.end() || p.header.parent != fin_.tip) {
            fx_->observations.push_back(ObsStuck{ps_, p.hash});
            return;
        }
        if (auto fb = finalized_blocks_.find(p.hash); fb != finalized_blocks_.end()) {
            pending_.pop_front();
            continue;
        }
        if (!p.requested) {
            // Fetch the body from the nodes that voted for it.
            p.requested = true;
            std::vector<NodeId> voters;
            for (const auto& [pos, tag] : p.header.votes.entries)
                if (pos < members_->size() && (*members_)[pos] != self_) voters.push_back((*members_)[pos]);
            if (!voters.empty()) send(Step::Sync, voters, BlockRequestMsg{p.hash});
        }
        return;
    }
}

void PsReplica::commit_block(const PendingFinal& p) {
    const Entry e = tree_.at(p.hash);
    commit(fin_, e.delta, e.block->header);
    finalized_blocks_[p.hash] = e.block;
    for (const auto& tx : e.block->txs) {
        if (mempool_.erase(tx.id)) mempool_order_.erase({tx.issue_time, tx.id});
    }
    for (const auto& r : e.block->deposits) {
        auto& q = receipts_.at(r->source_ps.value);
        const Hash256 d = r->batch_digest();
        q.erase(std::remove_if(q.begin(), q.end(), [&](const auto& x) { return x->batch_digest() == d; }), q.end());
    }
    trace(TraceKind::FinalizeAdopted, p.hash);
    fx_->observations.push_back(ObsPsCommitted{ps_, e.height, p.hash, e.block});
    if (voted_.count(p.hash) && !e.block->outbox.empty()) {
        ProposerBlock certified = *e.block;
        certified.header = p.header;
        for (const auto& batch : e.block->outbox) {
            auto r = std::make_shared<const Receipt>(build_receipt(certified, *p.fin, batch.dest));
            send(Step::Receipt, world_->assignment.ps_members(batch.dest), ReceiptMsg{std::move(r)});
        }
    }
    prune();
}

void PsReplica::prune() {
    std::unordered_map<Hash256, Entry, Hash256Hasher> keep;
    std::unordered_map<Hash256, std::vector<Hash256>, Hash256Hasher> kids;
    std::vector<Hash256> stack{fin_.tip};
    while (!stack.empty()) {
        const Hash256 h = stack.back();
        stack.pop_back();
        auto it = children_.find(h);
        if (it == children_.end()) continue;
        for (const auto& c : it->second) {
            auto e = tree_.find(c);
            if (e == tree_.end()) continue;
            kids[h].push_back(c);
            keep.emplace(c, std::move(e->second));
            stack.push_back(c);
        }
    }
    tree_ = std::move(keep);
    children_ = std::move(kids);
    const std::uint64_t h = fin_.height;
    std::erase_if(tallies_, [&](const auto& kv) { return kv.second.header->height <= h; });
    std::erase_if(voted_, [&](const Hash256& x) { return !tree_.count(x) && !tallies_.count(x); });
    std::erase_if(orphans_, [&](const auto& kv) {
        return kv.second.empty() || kv.second.front()->header.height <= h;
    });
    std::erase_if(requested_, [&](const Hash256& x) { return tree_.count(x) > 0; });
    std::erase_if(vote_log_, [&](const auto& kv) { return kv.first.second <= h; });
    std::erase_if(signed_headers_, [&](const auto& kv) { return kv.first.second <= h; });
    std::erase_if(proposed_, [&](const auto& kv) { return kv.second != fin_.tip && !tree_.count(kv.second); });
}

// --- body sync ----------------------------------------------------------------

void PsReplica::on_block_request(SimTime now, NodeId from, const BlockRequestMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    std::shared_ptr<const ProposerBlock> b;
    if (auto it = tree_.find(m.hash); it != tree_.end()) b = it->second.block;
    else if (auto f = finalized_blocks_.find(m.hash); f != finalized_blocks_.end()) b = f->second;
    if (b) send(Step::Sync, {from}, BlockResponseMsg{b});
}

void PsReplica::on_block_response(SimTime now, const BlockResponseMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!m.block || m.block->header.ps != ps_) return;
    const Hash256 hash = m.block->header.hash();
    if (requested_.erase(hash)) handle_block(m.block, true);
    if (!pending_.empty() && hash == pending_.front().hash && !tree_.count(hash) && !insert_block(m.block))
        fx_->observations.push_back(ObsStuck{ps_, hash});
    drain_pending();
    try_propose();
    refresh_timer();
}

}  // namespace dualchain
