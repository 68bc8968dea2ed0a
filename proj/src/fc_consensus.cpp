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

#include "dualchain/fc_consensus.hpp"

#include <algorithm>

namespace dualchain {

FcReplica::FcReplica(NodeId self, const World& world)
    : self_(self),
      world_(&world),
      signer_(world.keys.issue(principal_of(self))),
      fc_(world.assignment.fc_of.at(self.value)),
      members_(&world.assignment.fc_members(fc_)),
      behavior_(&world.behavior.at(self.value)),
      leader_(fc_leader(world.assignment, fc_, 0, world.rand)),
      tip_(fc_genesis(fc_)) {
    for (auto ps : world.assignment.shards_of_fc(fc_)) {
        Track t;
        t.ps = ps;
        t.tip = ps_genesis(ps);
        t.leaders[0] = ps_initial_leader(world.assignment, ps, world.rand);
        tracks_.push_back(std::move(t));
    }
}

// --- plumbing ---------------------------------------------------------------

Action FcReplica::decide(Step step) const { return adversary_decide(*behavior_, now_, DecisionContext{step, false}); }

bool FcReplica::send(Step step, Message msg) {
    if (decide(step) == Action::Drop) return false;
    fx_->sends.push_back(Send{*members_, std::move(msg)});
    return true;
}

void FcReplica::trace(TraceKind k, const Hash256& h) { fx_->trace.push_back(TraceRecord{k, h}); }

FcReplica::Track* FcReplica::track(PsId ps) {
    for (auto& t : tracks_)
        if (t.ps == ps) return &t;
    return nullptr;
}

const FcReplica::Track* FcReplica::track(PsId ps) const {
    for (const auto& t : tracks_)
        if (t.ps == ps) return &t;
    return nullptr;
}

std::vector<FcFinalization> FcReplica::take_finalized() { return std::exchange(handoff_, {}); }

Hash256 FcReplica::ps_tip(PsId ps) const { return track(ps)->tip; }
std::uint64_t FcReplica::ps_height(PsId ps) const { return track(ps)->height; }
std::uint64_t FcReplica::ps_view(PsId ps) const { return track(ps)->view; }
NodeId FcReplica::ps_leader(PsId ps) const { return track(ps)->leader(); }
std::size_t FcReplica::counted_complaints(PsId ps) const { return track(ps)->counted.size(); }
std::size_t FcReplica::cached_headers(PsId ps) const { return track(ps)->known.size(); }

std::optional<SimTime> FcReplica::oldest_candidate() const {
    std::optional<SimTime> out;
    // Only headers still linked to the finalized tip; the rest are excluded.
    for (const auto& t : tracks_) {
        std::vector<Hash256> stack{t.tip};
        while (!stack.empty()) {
            const Hash256 h = stack.back();
            stack.pop_back();
            auto it = t.children.find(h);
            if (it == t.children.end()) continue;
            for (const auto& c : it->second) {
                auto k = t.known.find(c);
                if (k == t.known.end()) continue;
                if (!out || k->second.arrival < *out) out = k->second.arrival;
                stack.push_back(c);
            }
        }
    }
    return out;
}

void FcReplica::start(SimTime now, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    arm_view_timer();
    if (is_leader()) schedule_proposal(now + world_->proto.fc_interval);
}

// --- headers ------------------------------------------------------------------

bool FcReplica::header_valid(const Track& t, const ProposerHeader& h, const Hash256& hash) {
    // Headers of replaced leaders stop being finalizable once the view change is.
    if (h.ps != t.ps || h.view != t.view || h.leader != t.leader()) return false;
    if (verified_headers_.count(hash)) return true;
    const auto& members = world_->assignment.ps_members(t.ps);
    if (member_position(members, h.leader) < 0 || !verify(world_->keys, h.leader_sig, hash, h.leader)) return false;
    if (h.votes.digest != hash || count_valid(h.votes, members, world_->keys) < world_->ctx.quorum_ps) return false;
    verified_headers_.insert(hash);
    return true;
}

void FcReplica::on_header(SimTime now, const HeaderMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!m.header) return;
    if (Track* t = track(m.header->ps)) admit_header(*t, m.header);
}

void FcReplica::admit_header(Track& t, const std::shared_ptr<const ProposerHeader>& h) {
    if (h->height <= t.height || h->view < t.view) return;
    if (h->view > t.view) {
        t.held.push_back(h);
        return;
    }
    const Hash256 hash = h->hash();
    if (t.known.count(hash) || !header_valid(t, *h, hash)) return;
    t.known.emplace(hash, Known{h, now_});
    t.children[h->parent].push_back(hash);
    auto& mh = t.max_height[h->view];
    mh = std::max(mh, h->height);
    // A later header contradicts NoProposal complaints that predate it.
    std::erase_if(t.counted, [&](const auto& kv) {
        return kv.second->reason == ComplaintReason::NoProposal && kv.second->last_height < mh;
    });
    trace(TraceKind::FcCache, hash);
}

std::vector<const ProposerHeader*> FcReplica::candidate_chain(const Track& t) const {
    // Follow the earliest-arriving certified child from the finalized tip.
    std::vector<const ProposerHeader*> chain;
    Hash256 cur = t.tip;
    std::uint64_t height = t.height;
    for (;;) {
        auto it = t.children.find(cur);
        if (it == t.children.end()) break;
        const Known* best = nullptr;
        Hash256 best_hash;
        for (const auto& c : it->second) {
            auto k = t.known.find(c);
            if (k == t.known.end() || k->second.header->height != height + 1) continue;
            if (!best || k->second.arrival < best->arrival || (k->second.arrival == best->arrival && c < best_hash)) {
                best = &k->second;
                best_hash = c;
            }
        }
        if (!best) break;
        chain.push_back(best->header.get());
        cur = best_hash;
        ++height;
    }
    return chain;
}

// --- complaints ---------------------------------------------------------------

bool FcReplica::complaint_valid(const Track& t, const Complaint& c, const Hash256& digest) {
    if (c.ps != t.ps || c.view != t.view || c.suspect != t.leader() || c.complainer == c.suspect) return false;
    const auto& members = world_->assignment.ps_members(t.ps);
    if (member_position(members, c.complainer) < 0) return false;
    if (c.reason == ComplaintReason::NoProposal && !c.evidence.empty()) return false;
    if (c.reason == ComplaintReason::Equivocation && c.evidence.size() != 2) return false;
    for (const auto& h : c.evidence)
        if (h.ps != t.ps || h.view != c.view || h.leader != c.suspect) return false;
    if (verified_complaints_.count(digest)) return true;
    if (!verify(world_->keys, c.sig, digest, c.complainer)) return false;
    if (c.reason == ComplaintReason::Equivocation) {
        const auto& a = c.evidence[0];
        const auto& b = c.evidence[1];
        const Hash256 ha = a.hash(), hb = b.hash();
        if (a.height != b.height || ha == hb) return false;
        if (!verify(world_->keys, a.leader_sig, ha, c.suspect) || !verify(world_->keys, b.leader_sig, hb, c.suspect))
            return false;
    }
    verified_complaints_.insert(digest);
    return true;
}

void FcReplica::on_complaint(SimTime now, const ComplainMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (!m.complaint) return;
    if (Track* t = track(m.complaint->ps)) accept_complaint(*t, m.complaint);
}

void FcReplica::accept_complaint(Track& t, const std::shared_ptr<const Complaint>& c) {
    if (c->view > t.view) {
        t.held_complaints.push_back(c);
        return;
    }
    if (t.counted.count(c->complainer) || !complaint_valid(t, *c, c->digest())) return;
    if (c->reason == ComplaintReason::Equivocation) {
        count_complaint(t, c);
        return;
    }
    // Give the suspect's in-flight headers time to arrive before trusting it.
    fx_->timers.push_back(TimerRequest{now_ + world_->proto.complaint_grace, TimerKind::ComplaintGrace, 0, c});
}

void FcReplica::count_complaint(Track& t, const std::shared_ptr<const Complaint>& c) {
    if (!t.counted.emplace(c->complainer, c).second) return;
    if (!t.tally_reported && t.counted.size() >= world_->ctx.quorum_ps) {
        t.tally_reported = true;
        fx_->observations.push_back(ObsTallyQuorum{t.ps, t.view});
    }
}

// --- timers -------------------------------------------------------------------

void FcReplica::arm_view_timer() {
    fx_->timers.push_back(
        TimerRequest{now_ + (world_->proto.fc_base_timeout << exp_), TimerKind::FcTimeout, ++view_generation_, nullptr});
}

void FcReplica::schedule_proposal(SimTime at) {
    fx_->timers.push_back(TimerRequest{at, TimerKind::FcPropose, ++propose_generation_, nullptr});
}

void FcReplica::on_timeout(SimTime now, const TimerRequest& t, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    switch (t.kind) {
        case TimerKind::FcPropose:
            if (t.generation == propose_generation_) propose();
            return;
        case TimerKind::FcTimeout:
            if (t.generation != view_generation_) return;
            send_view_change(std::max(view_, vc_sent_) + 1);
            exp_ = std::min(exp_ + 1, world_->proto.max_backoff_exponent);
            arm_view_timer();
            return;
        case TimerKind::ComplaintGrace: {
            const auto& c = t.complaint;
            Track* tr = c ? track(c->ps) : nullptr;
            if (!tr || c->view != tr->view) return;
            auto mh = tr->max_height.find(c->view);
            if (mh == tr->max_height.end() || mh->second <= c->last_height) count_complaint(*tr, c);
            return;
        }
        case TimerKind::PsTimeout: return;
    }
}

// --- proposing ------------------------------------------------------------------

std::shared_ptr<const FcProposal> FcReplica::fresh_proposal() const {
    auto p = std::make_shared<FcProposal>();
    auto& b = p->block;
    b.fc = fc_;
    b.height = height_ + 1;
    b.parent = tip_;
    b.view = view_;
    b.proposer = self_;
    for (const auto& t : tracks_) {
        const auto chain = candidate_chain(t);
        if (!chain.empty()) {
            Segment seg{t.ps, {}};
            for (const auto* h : chain) {
                seg.headers.push_back(h->hash());
                p->headers.push_back(*h);
            }
            b.segments.push_back(std::move(seg));
        }
        if (t.counted.size() >= world_->ctx.quorum_ps) {
            ViewChangeEntry vc;
            vc.ps = t.ps;
            vc.new_view = t.view + 1;
            std::vector<NodeId> complainers;
            for (const auto& [who, c] : t.counted) {
                complainers.push_back(who);
                vc.complaint_digests.push_back(c->digest());
                p->complaints.push_back(*c);
            }
            std::sort(vc.complaint_digests.begin(), vc.complaint_digests.end());
            vc.new_leader = pick_complainer(complainers, world_->rand, t.ps, vc.new_view);
            b.view_changes.push_back(std::move(vc));
        }
    }
    if (view_ != last_fin_view_)
        if (auto it = vcs_.find(view_); it != vcs_.end())
            for (const auto& [who, vc] : it->second) p->justification.push_back(*vc);
    p->leader_sig = signer_.sign(p->signing_digest());
    return p;
}

void FcReplica::propose() {
    if (!is_leader() || !proposed_.insert({height_ + 1, view_}).second) return;
    if (decide(Step::FcPropose) == Action::Drop) return;
    std::shared_ptr<const FcProposal> p;
    if (view_ != last_fin_view_) {
        // Re-propose the highest vote reported for this height, if any.
        const FcViewChange* best = nullptr;
        if (auto it = vcs_.find(view_); it != vcs_.end())
            for (const auto& [who, vc] : it->second)
                if (vc->has_vote && vc->voted_height == height_ + 1 && (!best || vc->voted_view > best->voted_view))
                    best = vc.get();
        if (best && best->voted && best->voted->block.hash() == best->voted_hash && best->voted->block.parent == tip_) {
            auto re = std::make_shared<FcProposal>(*best->voted);
            re->block.view = view_;
            re->block.proposer = self_;
            re->block.votes = AggregateVotes{};
            re->justification.clear();
            for (const auto& [who, vc] : vcs_.at(view_)) re->justification.push_back(*vc);
            re->leader_sig = signer_.sign(re->signing_digest());
            p = std::move(re);
        }
    }
    if (!p) p = fresh_proposal();
    trace(TraceKind::FcPropose, p->block.hash());
    fx_->observations.push_back(ObsFcProposed{p});
    fx_->sends.push_back(Send{*members_, FcProposalMsg{p}});
}

// --- voting -------------------------------------------------------------------

bool FcReplica::justification_valid(const FcProposal& p, bool& locked) const {
    const std::uint64_t v = p.block.view;
    std::set<NodeId> signers;
    const FcViewChange* best = nullptr;
    for (const auto& vc : p.justification) {
        if (vc.fc != fc_ || vc.new_view != v || vc.signer != NodeId(static_cast<std::uint32_t>(vc.sig.signer))) continue;
        if (member_position(*members_, vc.signer) < 0 || !verify(world_->keys, vc.sig, vc.digest(), vc.signer)) continue;
        if (!signers.insert(vc.signer).second) continue;
        if (vc.has_vote && vc.voted_height == p.block.height && (!best || vc.voted_view > best->voted_view)) best = &vc;
    }
    if (signers.size() < world_->ctx.quorum_fc) return false;
    locked = best != nullptr;
    return !best || best->voted_hash == p.block.hash();
}

bool FcReplica::proposal_valid(const FcProposal& p) {
    const auto& b = p.block;
    if (b.fc != fc_ || b.height != height_ + 1 || b.parent != tip_) return false;
    if (b.proposer != fc_leader(world_->assignment, fc_, b.view, world_->rand)) return false;
    if (!verify(world_->keys, p.leader_sig, p.signing_digest(), b.proposer)) return false;
    // A body some FC node may already have finalized must stay votable, so
    // the subjective freshness check below is waived for it.
    bool locked = false;
    if (b.view != last_fin_view_ && !justification_valid(p, locked)) return false;

    std::size_t idx = 0;
    std::optional<PsId> prev_ps;
    for (const auto& seg : b.segments) {
        if (seg.headers.empty() || (prev_ps && !(*prev_ps < seg.ps))) return false;
        prev_ps = seg.ps;
        Track* t = track(seg.ps);
        if (!t) return false;
        Hash256 parent = t->tip;
        std::uint64_t height = t->height;
        for (const auto& hash : seg.headers) {
            if (idx >= p.headers.size()) return false;
            const auto& h = p.headers[idx++];
            if (h.parent != parent || h.height != height + 1 || h.hash() != hash || !header_valid(*t, h, hash)) return false;
            parent = hash;
            ++height;
        }
    }
    if (idx != p.headers.size()) return false;

    std::vector<Hash256> digests;
    digests.reserve(p.complaints.size());
    for (const auto& c : p.complaints) digests.push_back(c.digest());
    std::size_t used = 0;
    prev_ps.reset();
    for (const auto& vc : b.view_changes) {
        if (prev_ps && !(*prev_ps < vc.ps)) return false;
        prev_ps = vc.ps;
        const Track* t = track(vc.ps);
        if (!t || vc.new_view != t->view + 1) return false;
        if (!std::is_sorted(vc.complaint_digests.begin(), vc.complaint_digests.end())) return false;
        std::vector<NodeId> complainers;
        for (const auto& d : vc.complaint_digests) {
            auto c = std::find_if(p.complaints.begin(), p.complaints.end(), [&](const Complaint& x) {
                return x.ps == vc.ps && digests[&x - p.complaints.data()] == d;
            });
            if (c == p.complaints.end() || !complaint_valid(*t, *c, d)) return false;
            if (c->reason == ComplaintReason::NoProposal && !locked) {
                auto mh = t->max_height.find(c->view);
                if (mh != t->max_height.end() && mh->second > c->last_height) return false;
            }
            complainers.push_back(c->complainer);
        }
        std::sort(complainers.begin(), complainers.end());
        if (std::adjacent_find(complainers.begin(), complainers.end()) != complainers.end()) return false;
        if (complainers.size() < world_->ctx.quorum_ps) return false;
        if (vc.new_leader != pick_complainer(complainers, world_->rand, vc.ps, vc.new_view)) return false;
        used += complainers.size();
    }
    return used == p.complaints.size();
}

void FcReplica::on_proposal(SimTime now, const FcProposalMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (m.proposal && m.proposal->block.fc == fc_) consider(m.proposal);
}

void FcReplica::consider(const std::shared_ptr<const FcProposal>& p) {
    const auto& b = p->block;
    if (b.height <= height_) return;
    if (b.height > height_ + 1 || b.view > view_) {
        if (std::find(buffered_.begin(), buffered_.end(), p) == buffered_.end()) buffered_.push_back(p);
        return;
    }
    if (b.proposer != fc_leader(world_->assignment, fc_, b.view, world_->rand) ||
        !verify(world_->keys, p->leader_sig, p->signing_digest(), b.proposer))
        return;
    const Hash256 hash = b.hash();
    bodies_[hash] = p;
    try_finalize(b.height, b.view, hash);
    if (b.height <= height_ || b.view < view_ || my_votes_.count({b.height, b.view})) return;
    if (!proposal_valid(*p)) return;
    if (decide(Step::FcVote) == Action::Drop) return;
    my_votes_[{b.height, b.view}] = hash;
    last_vote_ = {b.view, p};
    trace(TraceKind::FcVote, hash);
    send(Step::FcVote, FcVoteMsg{hash, b.height, b.view, signer_.sign(hash)});
}

void FcReplica::on_vote(SimTime now, const FcVoteMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    if (m.height <= height_ || m.sig.signer >= kAccountBase) return;
    const NodeId voter(static_cast<std::uint32_t>(m.sig.signer));
    const auto pos = member_position(*members_, voter);
    if (pos < 0 || !verify(world_->keys, m.sig, m.block, voter)) return;
    auto& t = tallies_[{m.height, m.view, m.block}];
    t.digest = m.block;
    if (!t.add(static_cast<std::uint32_t>(pos), m.sig.tag)) return;
    try_finalize(m.height, m.view, m.block);
}

void FcReplica::try_finalize(std::uint64_t height, std::uint64_t view, const Hash256& hash) {
    if (height != height_ + 1) return;
    auto t = tallies_.find({height, view, hash});
    if (t == tallies_.end() || t->second.size() < world_->ctx.quorum_fc) return;
    auto body = bodies_.find(hash);
    if (body == bodies_.end() || body->second->block.parent != tip_) return;
    const AggregateVotes votes = t->second;
    finalize(body->second, view, votes);
}

void FcReplica::finalize(const std::shared_ptr<const FcProposal>& p, std::uint64_t view, const AggregateVotes& votes) {
    auto fin = std::make_shared<FinalizerBlock>(p->block);
    fin->view = view;
    fin->proposer = fc_leader(world_->assignment, fc_, view, world_->rand);
    fin->votes = votes;
    const Hash256 hash = fin->hash();
    height_ = fin->height;
    tip_ = hash;
    last_fin_view_ = view;
    trace(TraceKind::FcFinal, hash);
    fx_->observations.push_back(ObsFcFinalized{p, fin});

    for (const auto& vc : fin->view_changes) {
        Track* t = track(vc.ps);
        t->view = vc.new_view;
        t->leaders[vc.new_view] = vc.new_leader;
        t->counted.clear();
        t->tally_reported = false;
        std::erase_if(t->known, [&](const auto& kv) { return kv.second.header->view < vc.new_view; });
        Encoder e;
        e.str("view-change").u32(vc.ps.value).u64(vc.new_view).u32(vc.new_leader.value);
        trace(TraceKind::ViewChange, e.digest());
    }
    std::size_t idx = 0;
    for (const auto& seg : fin->segments) {
        Track* t = track(seg.ps);
        t->tip = seg.headers.back();
        idx += seg.headers.size();
        t->height = p->headers.at(idx - 1).height;
        std::erase_if(t->known, [&](const auto& kv) { return kv.second.header->height <= t->height; });
        std::erase_if(t->children, [&](const auto& kv) { return kv.first != t->tip && !t->known.count(kv.first); });
    }
    for (auto& t : tracks_) std::erase_if(t.max_height, [&](const auto& kv) { return kv.first < t.view; });

    tallies_.erase(tallies_.begin(), tallies_.lower_bound({height_ + 1, 0, Hash256{}}));
    std::erase_if(bodies_, [&](const auto& kv) { return kv.second->block.height <= height_; });
    std::erase_if(my_votes_, [&](const auto& kv) { return kv.first.first <= height_; });
    std::erase_if(proposed_, [&](const auto& k) { return k.first <= height_; });
    if (last_vote_ && last_vote_->second->block.height <= height_) last_vote_.reset();
    handoff_.push_back(FcFinalization{fin, p});

    exp_ = 0;
    arm_view_timer();
    if (is_leader()) schedule_proposal(now_ + world_->proto.fc_interval);
    replay_buffers();
}

void FcReplica::replay_buffers() {
    for (auto& t : tracks_) {
        auto held = std::exchange(t.held, {});
        for (const auto& h : held) admit_header(t, h);
        auto complaints = std::exchange(t.held_complaints, {});
        for (const auto& c : complaints)
            if (c->view >= t.view) accept_complaint(t, c);
    }
    auto buffered = std::exchange(buffered_, {});
    for (const auto& p : buffered) {
        if (p->block.height <= height_) continue;
        consider(p);
    }
}

// --- view change ----------------------------------------------------------------

void FcReplica::send_view_change(std::uint64_t new_view) {
    if (new_view <= vc_sent_) return;
    vc_sent_ = new_view;
    auto vc = std::make_shared<FcViewChange>();
    vc->fc = fc_;
    vc->new_view = new_view;
    vc->finalized_height = height_;
    if (last_vote_) {
        vc->has_vote = true;
        vc->voted_height = last_vote_->second->block.height;
        vc->voted_view = last_vote_->first;
        vc->voted_hash = last_vote_->second->block.hash();
        vc->voted = last_vote_->second;
    }
    vc->signer = self_;
    vc->sig = signer_.sign(vc->digest());
    send(Step::FcViewChange, FcViewChangeMsg{std::move(vc)});
}

void FcReplica::on_view_change(SimTime now, const FcViewChangeMsg& m, Effects& fx) {
    now_ = now;
    fx_ = &fx;
    const auto& vc = m.vc;
    if (!vc || vc->fc != fc_ || vc->new_view <= view_) return;
    if (member_position(*members_, vc->signer) < 0 || !verify(world_->keys, vc->sig, vc->digest(), vc->signer)) return;
    auto& set = vcs_[vc->new_view];
    if (!set.emplace(vc->signer, vc).second) return;
    const std::size_t n = members_->size();
    const std::size_t quorum = world_->ctx.quorum_fc;
    // Enough senders that at least one is honest: join them.
    if (set.size() >= n - quorum + 1) send_view_change(vc->new_view);
    if (set.size() >= quorum) enter_view(vc->new_view);
}

void FcReplica::enter_view(std::uint64_t view) {
    if (view <= view_) return;
    view_ = view;
    leader_ = fc_leader(world_->assignment, fc_, view, world_->rand);
    std::erase_if(vcs_, [&](const auto& kv) { return kv.first < view; });
    Encoder e;
    e.str("fc-view").u32(fc_.value).u64(view).u32(leader_.value);
    trace(TraceKind::FcView, e.digest());
    fx_->observations.push_back(ObsFcViewEntered{fc_, view});
    arm_view_timer();
    ++propose_generation_;
    if (is_leader()) propose();
    replay_buffers();
}

}  // namespace dualchain
