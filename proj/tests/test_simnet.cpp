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

#include <cmath>

#include <gtest/gtest.h>

#include "dualchain/simnet.hpp"

namespace dualchain {
namespace {

SimConfig tiny(std::uint64_t seed) {
    SimConfig c;
    c.params = secparams::EpochParams::make(8, 0.0, 8, 4);
    c.seed = seed;
    c.end_time = 30 * kTick;
    c.accounts_per_shard = 4;
    return c;
}

SimConfig small(std::uint64_t seed) {
    SimConfig c;
    c.params = secparams::EpochParams::make(64, 0.0, 32, 16);
    c.seed = seed;
    c.end_time = 20 * kTick;
    c.workload.rate = 10;
    c.workload.cross_shard_ratio = 0.3;
    c.workload.duration = 20 * kTick;
    return c;
}

void expect_all_checks_pass(const SimResult& r) {
    for (const auto& c : r.checks) EXPECT_TRUE(c.pass) << c.name << ": " << c.detail;
    EXPECT_TRUE(r.all_pass());
}

TEST(Workload, ArrivalCountAndCrossShareWithinThreeSigma) {
    World world(secparams::EpochParams::make(64, 0.0, 32, 16), EpochRandomness{3, 0}, ProtocolConfig{}, 8, 100);
    WorkloadConfig w;
    w.rate = 20;
    w.cross_shard_ratio = 0.4;
    w.duration = 200 * kTick;
    const auto txs = generate_workload(world, w);
    // One Bernoulli trial per millitick.
    const double trials = 200 * 1000.0, p = w.rate / 1000.0;
    const double mean = trials * p, sd = std::sqrt(trials * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(txs.size()), mean, 3 * sd);

    std::size_t cross = 0;
    for (const auto& tx : txs) {
        cross += home_shard(tx.payer, world.ps_count()) != home_shard(tx.payee, world.ps_count());
        EXPECT_GE(tx.issue_time, w.start);
        EXPECT_LT(tx.issue_time, w.start + w.duration);
        EXPECT_GE(tx.amount, 1u);
        EXPECT_LE(tx.amount, w.max_amount);
    }
    const double n = static_cast<double>(txs.size());
    EXPECT_NEAR(static_cast<double>(cross), n * 0.4, 3 * std::sqrt(n * 0.4 * 0.6));
}

TEST(Workload, ExtremeCrossRatios) {
    World world(secparams::EpochParams::make(64, 0.0, 32, 16), EpochRandomness{4, 0}, ProtocolConfig{}, 8, 100);
    for (double ratio : {0.0, 1.0}) {
        WorkloadConfig w;
        w.rate = 50;
        w.cross_shard_ratio = ratio;
        w.duration = 10 * kTick;
        const auto txs = generate_workload(world, w);
        ASSERT_FALSE(txs.empty());
        for (const auto& tx : txs) {
            const bool cross = home_shard(tx.payer, world.ps_count()) != home_shard(tx.payee, world.ps_count());
            EXPECT_EQ(cross, ratio == 1.0);
        }
    }
}

TEST(Workload, RejectsOutOfRangeConfig) {
    World world(secparams::EpochParams::make(8, 0.0, 8, 4), EpochRandomness{4, 0}, ProtocolConfig{}, 4, 100);
    WorkloadConfig w;
    w.duration = kTick;
    w.rate = -1;
    EXPECT_THROW(generate_workload(world, w), Error);
    w.rate = 1;
    w.cross_shard_ratio = 1.5;
    EXPECT_THROW(generate_workload(world, w), Error);
}

TEST(NetModel, DelaysRespectTheBoundsOnBothSidesOfGst) {
    NetModel net;
    net.gst = 10 * kTick;
    CounterRng rng(77, Stream::Network);
    for (int i = 0; i < 10000; ++i) {
        const SimTime pre = net.sample(rng, 5 * kTick);
        EXPECT_GE(pre, net.d_min);
        EXPECT_LE(pre, net.pre_gst_max);
        const SimTime post = net.sample(rng, 10 * kTick);
        EXPECT_GE(post, net.d_min);
        EXPECT_LE(post, net.delta);
    }
    NetModel bad;
    bad.d_min = 2 * kTick;
    EXPECT_THROW(bad.validate(), Error);
}

TEST(Simulation, TinyIntraShardWorkloadConfirmsEverything) {
    SimConfig c = tiny(2);
    c.workload.rate = 1;
    c.workload.duration = 10 * kTick;
    const auto r = simulate(c);
    EXPECT_GT(r.metrics.issued_txs, 0u);
    EXPECT_EQ(r.metrics.confirmed_txs, r.metrics.issued_txs);
    EXPECT_EQ(r.metrics.confirmed_cross, 0u);
    expect_all_checks_pass(r);
}

TEST(Simulation, ZeroWorkloadStillFinalizesEmptyBlocks) {
    const auto r = simulate(tiny(3));
    EXPECT_EQ(r.metrics.issued_txs, 0u);
    EXPECT_EQ(r.metrics.confirmed_txs, 0u);
    EXPECT_GT(r.metrics.finalized_ps_blocks, 0u);
    for (auto h : r.metrics.fc_heights) EXPECT_GT(h, 0u);
    EXPECT_EQ(r.facts.final_supply, r.facts.initial_supply);
    expect_all_checks_pass(r);
}

TEST(Simulation, HonestRunHasNoViewChangesOrStagnation) {
    auto c = small(5);
    const auto r = simulate(c);
    EXPECT_EQ(r.metrics.ps_view_changes, 0u);
    EXPECT_EQ(r.metrics.fc_view_changes, 0u);
    EXPECT_TRUE(r.metrics.stagnation.empty());
    EXPECT_GT(r.metrics.confirmed_cross, 0u);
    EXPECT_LE(r.metrics.confirmed_txs, r.metrics.issued_txs);
    EXPECT_GE(r.facts.cross_debited, r.facts.cross_credited);
    EXPECT_EQ(r.facts.final_supply + r.facts.in_flight, r.facts.initial_supply);
    expect_all_checks_pass(r);
}

TEST(Simulation, SameSeedSameTraceDifferentSeedDifferentTrace) {
    auto a = small(8);
    a.keep_trace = true;
    const auto r1 = simulate(a);
    const auto r2 = simulate(a);
    EXPECT_EQ(r1.trace_hash, r2.trace_hash);
    EXPECT_EQ(r1.trace, r2.trace);
    EXPECT_EQ(trace_hash_of(r1.trace), r1.trace_hash);
    EXPECT_EQ(r1.metrics.confirmed_txs, r2.metrics.confirmed_txs);
    auto b = a;
    b.seed = 9;
    EXPECT_NE(simulate(b).trace_hash, r1.trace_hash);
}

TEST(Simulation, KeepTraceDoesNotChangeTheHash) {
    auto a = small(10);
    auto b = a;
    b.keep_trace = true;
    EXPECT_EQ(simulate(a).trace_hash, simulate(b).trace_hash);
}

TEST(Simulation, CpuTimeIsIrrelevantAcrossThreads) {
    // Runs on separate threads reproduce the serial hash.
    const auto ref = simulate(small(12)).trace_hash;
    std::vector<Hash256> hashes(4);
#pragma omp parallel for
    for (int i = 0; i < 4; ++i) hashes[static_cast<std::size_t>(i)] = simulate(small(12)).trace_hash;
    for (const auto& h : hashes) EXPECT_EQ(h, ref);
}

TEST(Simulation, EventBudgetRaisesLivelockGuard) {
    auto c = small(1);
    c.max_events = 1000;
    EXPECT_THROW(simulate(c), LivelockGuard);
}

TEST(Simulation, PlantedSilentLeaderIsReplacedAndChecksHold) {
    auto c = small(6);
    c.end_time = 40 * kTick;
    c.attack.planted.push_back({PsId(1), 5, Strategy::SilentLeader, 0, true});
    const auto r = simulate(c);
    EXPECT_GE(r.metrics.ps_view_changes, 1u);
    bool ps1 = false;
    for (const auto& vc : r.facts.view_changes) {
        if (vc.ps != PsId(1)) continue;
        ps1 = true;
        EXPECT_FALSE(vc.suspect_honest);
        EXPECT_NE(vc.suspect, vc.new_leader);
    }
    EXPECT_TRUE(ps1);
    expect_all_checks_pass(r);
}

TEST(Simulation, EquivocatorsDoNotBreakSafetyChecks) {
    for (std::uint64_t seed : {1, 2, 3}) {
        auto c = small(seed);
        c.end_time = 30 * kTick;
        c.attack.planted.push_back({PsId(0), 7, Strategy::Equivocator, 0, true});
        c.attack.planted.push_back({PsId(3), 7, Strategy::Manipulator, 0, true});
        const auto r = simulate(c);
        expect_all_checks_pass(r);
    }
}

}  // namespace
}  // namespace dualchain
