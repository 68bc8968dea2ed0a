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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualchain/node.hpp"

namespace dualchain {

struct NetModel {
    SimTime gst = 0;
    SimTime delta = kTick;
    SimTime d_min = kTick / 10;
    SimTime pre_gst_max = 10 * kTick;

    /// Delay of one message sent at `now`.
    SimTime sample(CounterRng& rng, SimTime now) const;
    void validate() const;
};

struct WorkloadConfig {
    /// Transactions per tick, system-wide.
    double rate = 0.0;
    double cross_shard_ratio = 0.0;
    SimTime start = 0;
    SimTime duration = 0;
    std::uint64_t max_amount = 10;
    void validate() const;
};

/// Arrival stream: one Bernoulli trial per 1/1000 tick, integer-only.
std::vector<Transaction> generate_workload(const World& world, const WorkloadConfig& w);

struct SimConfig {
    secparams::EpochParams params;
    std::uint64_t seed = 1;
    ProtocolConfig proto;
    NetModel net;
    WorkloadConfig workload;
    AttackPlan attack;
    std::uint32_t accounts_per_shard = 8;
    std::uint64_t genesis_balance = 1'000'000;
    SimTime end_time = 100 * kTick;
    std::uint64_t max_events = 50'000'000;
    bool keep_trace = false;
    /// Gaps between finalizations longer than this are stagnation intervals.
    SimTime stagnation_threshold = 10 * kTick;
    /// Candidates older than this at run end fail the liveness check.
    SimTime pending_horizon = 40 * kTick;
    /// TPS series bucket width.
    SimTime tps_bucket = 10 * kTick;
};

class LivelockGuard : public Error {
  public:
    using Error::Error;
};

struct Interval {
    SimTime begin = 0, end = 0;
};

struct Metrics {
    std::uint64_t issued_txs = 0;
    std::uint64_t confirmed_txs = 0;
    std::uint64_t confirmed_cross = 0;
    double tps = 0.0;  // confirmed per tick over [gst, end]
    std::vector<std::uint64_t> tps_series;  // confirmations per bucket
    double latency_mean = 0.0, latency_p50 = 0.0, latency_p95 = 0.0;  // ticks
    // Mean per-block phases in ticks: proposal→PS quorum, quorum→FC proposal, FC proposal→commit.
    double phase_proposal = 0.0, phase_verification = 0.0, phase_finalization = 0.0;
    std::uint64_t finalized_ps_blocks = 0;
    std::vector<std::uint64_t> ps_heights;
    std::vector<std::uint64_t> fc_heights;
    std::uint64_t ps_view_changes = 0;
    std::uint64_t fc_view_changes = 0;
    /// Longest gap after GST with no PS block finalized anywhere.
    SimTime longest_gap = 0;
    /// Longest gap after GST between finalizations within one PS.
    SimTime longest_ps_gap = 0;
    std::vector<Interval> stagnation;  // per-PS gaps above the threshold
    std::uint64_t events = 0;
};

struct CheckResult {
    std::string name;
    bool pass = true;
    std::uint64_t violations = 0;
    std::string detail;
};

/// Post-hoc facts that acceptance tests inspect directly.
struct RunFacts {
    struct ViewChangeFact {
        PsId ps;
        std::uint64_t new_view = 0;
        NodeId suspect, new_leader;
        bool suspect_honest = false;
        SimTime finalized_at = 0;
        std::uint64_t fc_height = 0;
        SimTime first_complaint = 0;  // earliest send among the complaints used
    };
    std::vector<ViewChangeFact> view_changes;
    struct TallyFact {
        PsId ps;
        std::uint64_t view = 0;
        SimTime at = 0;
    };
    std::vector<TallyFact> tallies;  // first honest FC node reaching quorum_ps
    /// (time, ps, height) of the first honest commit of every PS block.
    struct Commit {
        SimTime at = 0;
        PsId ps;
        std::uint64_t height = 0;
        std::size_t txs = 0;
    };
    std::vector<Commit> commits;
    /// (time, fc, height) of every first finalization.
    struct FcFinal {
        SimTime at = 0;
        FcId fc;
        std::uint64_t height = 0;
        SimTime proposed_at = 0;
    };
    std::vector<FcFinal> fc_finals;
    std::vector<std::pair<SimTime, PsId>> proposals;  // first sighting of each PS block
    std::uint64_t initial_supply = 0;
    std::uint64_t final_supply = 0;   // finalized balances
    std::uint64_t in_flight = 0;      // debited, not yet credited
    std::uint64_t cross_debited = 0;
    std::uint64_t cross_credited = 0;
};

struct SimResult {
    Metrics metrics;
    std::vector<CheckResult> checks;
    RunFacts facts;
    Hash256 trace_hash;
    std::vector<std::string> trace;  // only with keep_trace
    bool all_pass() const;
};

class Oracle;

/// One deterministic run.
class Simulation {
  public:
    explicit Simulation(const SimConfig& cfg);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    SimResult run();
    const World& world() const { return *world_; }
    const Node& node(NodeId n) const { return nodes_.at(n.value); }

  private:
    struct Event;
    struct Later {
        bool operator()(const Event& a, const Event& b) const;
    };
    void push(Event e);
    void apply(NodeId owner, SimTime now, Effects& fx);
    CounterRng& edge(NodeId from, NodeId to);

    SimConfig cfg_;
    std::unique_ptr<World> world_;
    std::vector<Node> nodes_;
    std::vector<Transaction> workload_;
    std::vector<Event> queue_;
    std::uint64_t seq_ = 0;
    std::map<std::pair<std::uint32_t, std::uint32_t>, CounterRng> edges_;
    std::unique_ptr<Oracle> oracle_;
    Sha256Stream trace_stream_;
    std::vector<std::string> trace_;
};

/// Convenience: build and run.
SimResult simulate(const SimConfig& cfg);

/// SHA-256 over concatenated trace lines (each newline-terminated).
Hash256 trace_hash_of(const std::vector<std::string>& lines);

}  // namespace dualchain
