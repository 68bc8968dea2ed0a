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

#include <gtest/gtest.h>

#include "harness.hpp"

namespace dualchain::testing {
namespace {

struct FcFixture : ::testing::Test {
    World world{secparams::EpochParams::make(8, 0.0, 8, 4), EpochRandomness{9, 0}, ProtocolConfig{}, 4, 1000};
    PsId ps{0};
    NodeId leader = ps_initial_leader(world.assignment, ps, world.rand);
    const std::vector<NodeId>& members = world.assignment.ps_members(ps);

    NodeId member_other_than(NodeId a, NodeId b = NodeId(~0u)) const {
        for (auto n : members)
            if (n != a && n != b) return n;
        return NodeId(0);
    }

    ProposerBlock proposal(std::uint64_t view = 0) {
        PsReplica r(leader, world);
        Effects fx;
        r.start(0, fx);
        for (const auto& s : fx.sends)
            if (const auto* p = std::get_if<ProposalMsg>(&s.msg)) {
                ProposerBlock b = *p->block;
                if (view != b.header.view) {
                    b.header.view = view;
                    b.header.leader_sig = world.keys.issue(leader.value).sign(b.header.hash());
                }
                return b;
            }
        ADD_FAILURE() << "leader did not propose";
        return {};
    }

    std::shared_ptr<const ProposerHeader> certified(ProposerHeader h, std::size_t votes) const {
        h.votes = AggregateVotes{};
        h.votes.digest = h.hash();
        for (std::size_t i = 0; i < votes; ++i)
            h.votes.add(static_cast<std::uint32_t>(i), world.keys.issue(members[i].value).sign(h.votes.digest).tag);
        return std::make_shared<const ProposerHeader>(std::move(h));
    }

    std::shared_ptr<const Complaint> complaint(NodeId from, ComplaintReason reason,
                                               std::vector<ProposerHeader> evidence = {}) const {
        Complaint c;
        c.ps = ps;
        c.suspect = leader;
        c.view = 0;
        c.reason = reason;
        c.evidence = std::move(evidence);
        c.complainer = from;
        c.sig = world.keys.issue(from.value).sign(c.digest());
        return std::make_shared<const Complaint>(std::move(c));
    }

    std::pair<ProposerHeader, ProposerHeader> equivocation() {
        ProposerHeader a = proposal().header;
        ProposerHeader b = a;
        b.latest_fc_block = sha256(std::string_view("other"));
        b.leader_sig = world.keys.issue(leader.value).sign(b.hash());
        return {a, b};
    }

    // Fires every grace timer in `fx` at its deadline.
    static void fire_grace(FcReplica& r, const Effects& fx) {
        for (const auto& t : fx.timers)
            if (t.kind == TimerKind::ComplaintGrace) {
                Effects out;
                r.on_timeout(t.at, t, out);
            }
    }
};

TEST_F(FcFixture, HeaderNeedsAPsQuorum) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    const auto h = proposal().header;
    r.on_header(kTick, HeaderMsg{certified(h, secparams::quorum_ps(4) - 1)}, fx);
    EXPECT_EQ(r.cached_headers(ps), 0u);
    r.on_header(kTick, HeaderMsg{certified(h, secparams::quorum_ps(4))}, fx);
    EXPECT_EQ(r.cached_headers(ps), 1u);
}

TEST_F(FcFixture, ForgedVoteTagsDoNotCount) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    auto h = *certified(proposal().header, secparams::quorum_ps(4));
    // Position 0 carries a tag made by the member at position 3.
    ASSERT_EQ(h.votes.entries.front().first, 0u);
    h.votes.entries.front().second = world.keys.issue(members.back().value).sign(h.votes.digest).tag;
    r.on_header(kTick, HeaderMsg{std::make_shared<const ProposerHeader>(h)}, fx);
    EXPECT_EQ(r.cached_headers(ps), 0u);
}

TEST_F(FcFixture, HeaderOfAFutureViewIsHeldNotCached) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    r.on_header(kTick, HeaderMsg{certified(proposal(1).header, 4)}, fx);
    EXPECT_EQ(r.cached_headers(ps), 0u);
}

TEST_F(FcFixture, NoProposalComplaintCountsAfterGrace) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    Effects in;
    r.on_complaint(kTick, ComplainMsg{complaint(member_other_than(leader), ComplaintReason::NoProposal)}, in);
    EXPECT_EQ(r.counted_complaints(ps), 0u);
    fire_grace(r, in);
    EXPECT_EQ(r.counted_complaints(ps), 1u);
}

TEST_F(FcFixture, LaterHeaderCancelsNoProposalComplaint) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    Effects in;
    r.on_complaint(kTick, ComplainMsg{complaint(member_other_than(leader), ComplaintReason::NoProposal)}, in);
    r.on_header(kTick, HeaderMsg{certified(proposal().header, 4)}, fx);
    fire_grace(r, in);
    EXPECT_EQ(r.counted_complaints(ps), 0u);
}

TEST_F(FcFixture, EquivocationComplaintCountsImmediately) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    auto [a, b] = equivocation();
    r.on_complaint(kTick, ComplainMsg{complaint(member_other_than(leader), ComplaintReason::Equivocation, {a, b})}, fx);
    EXPECT_EQ(r.counted_complaints(ps), 1u);
}

TEST_F(FcFixture, InvalidComplaintsAreRejected) {
    FcReplica r(member_other_than(leader), world);
    Effects fx;
    r.start(0, fx);
    const NodeId c = member_other_than(leader);
    auto [a, b] = equivocation();
    // Identical evidence is not an equivocation.
    r.on_complaint(kTick, ComplainMsg{complaint(c, ComplaintReason::Equivocation, {a, a})}, fx);
    // Evidence the suspect never signed.
    ProposerHeader unsigned_b = b;
    unsigned_b.leader_sig = world.keys.issue(c.value).sign(unsigned_b.hash());
    r.on_complaint(kTick, ComplainMsg{complaint(c, ComplaintReason::Equivocation, {a, unsigned_b})}, fx);
    // The suspect complaining about itself.
    r.on_complaint(kTick, ComplainMsg{complaint(leader, ComplaintReason::Equivocation, {a, b})}, fx);
    // A node outside the PS.
    NodeId outsider(0);
    for (std::uint32_t i = 0; i < 8; ++i)
        if (member_position(members, NodeId(i)) < 0) outsider = NodeId(i);
    r.on_complaint(kTick, ComplainMsg{complaint(outsider, ComplaintReason::Equivocation, {a, b})}, fx);
    // A signature by someone other than the complainer.
    Complaint forged = *complaint(c, ComplaintReason::Equivocation, {a, b});
    forged.sig = world.keys.issue(member_other_than(leader, c).value).sign(forged.digest());
    r.on_complaint(kTick, ComplainMsg{std::make_shared<const Complaint>(forged)}, fx);
    fire_grace(r, fx);
    EXPECT_EQ(r.counted_complaints(ps), 0u);
}

TEST(FcLockstep, HonestCommitteeAgreesOnOneChain) {
    Lockstep net(8, 8, 4, 9);
    net.start();
    net.run_until(30 * kTick);
    std::map<std::uint64_t, Hash256> tips;
    std::uint64_t top = 0, low = ~0ull;
    for (const auto& node : net.nodes) {
        const auto& f = node.fc();
        top = std::max(top, f.height());
        low = std::min(low, f.height());
        auto [it, fresh] = tips.emplace(f.height(), f.tip());
        if (!fresh) EXPECT_EQ(it->second, f.tip());
        EXPECT_EQ(f.view(), 0u);
    }
    EXPECT_GE(low, 5u);
    EXPECT_LE(top - low, 1u);
}

TEST(FcLockstep, SilentFcLeaderIsReplaced) {
    NodeId silent;
    Lockstep net(8, 8, 4, 9, ProtocolConfig{}, [&](World& w) {
        silent = fc_leader(w.assignment, FcId(0), 0, w.rand);
        w.behavior[silent.value] = Behavior{true, Strategy::Silent, 0};
    });
    net.start();
    net.run_until(40 * kTick);
    for (const auto& node : net.nodes) {
        if (node.id() == silent) continue;
        EXPECT_GE(node.fc().view(), 1u);
        EXPECT_NE(node.fc().leader(), silent);
        EXPECT_GE(node.fc().height(), 3u);
    }
}

TEST(FcLockstep, ComplaintQuorumReplacesThePsLeader) {
    NodeId silent;
    Lockstep net(8, 8, 4, 9, ProtocolConfig{}, [&](World& w) {
        silent = ps_initial_leader(w.assignment, PsId(1), w.rand);
        w.behavior[silent.value] = Behavior{true, Strategy::Silent, 0};
    });
    net.start();
    net.run_until(40 * kTick);
    for (const auto& node : net.nodes) {
        if (node.id() == silent) continue;
        EXPECT_GE(node.fc().ps_view(PsId(1)), 1u);
        EXPECT_NE(node.fc().ps_leader(PsId(1)), silent);
        EXPECT_EQ(node.fc().ps_view(PsId(0)), 0u);
    }
    EXPECT_GT(net.count_delivered<ComplainMsg>(), 0u);
}

}  // namespace
}  // namespace dualchain::testing
