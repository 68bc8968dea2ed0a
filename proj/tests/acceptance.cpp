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

// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "dualchain/secparams.hpp"
#include "dualchain/simnet.hpp"

namespace dc = dualchain;
namespace sp = dualchain::secparams;

namespace {

// Tolerances and suite sizes.
constexpr double kTableBound = 7.6e-6;
constexpr double kTableRelTol = 0.50;
constexpr double kC1Seconds = 10.0;
constexpr double kC2Seconds = 30.0;
constexpr int kMonteCarloTrials = 1'000'000;
constexpr double kMonteCarloSigmas = 3.0;
constexpr int kSafetySeeds = 200;
constexpr int kSilentSeeds = 50;
constexpr int kLeaderSeeds = 20;
constexpr int kCrossSeeds = 20;
constexpr int kPipelinePairs = 50;
constexpr int kPipelineWins = 45;
constexpr int kScaleSeeds = 3;
constexpr double kScaleRatio = 2.0;
constexpr int kStagnationSeeds = 20;
constexpr std::int64_t kGrowthWindow = 10;  // δ per required block
constexpr std::int64_t kMaxStall = 20;      // δ

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<dc::SimResult> run_all(const std::vector<dc::SimConfig>& cfgs) {
    std::vector<dc::SimResult> out(cfgs.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < cfgs.size(); ++i) out[i] = dc::simulate(cfgs[i]);
    return out;
}

const dc::CheckResult* find_check(const dc::SimResult& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool check_ok(const dc::SimResult& r, const std::string& name) {
    const auto* c = find_check(r, name);
    return c != nullptr && c->pass;
}

std::string failing_checks(const dc::SimResult& r) {
    std::string s;
    for (const auto& c : r.checks)
        if (!c.pass) s += (s.empty() ? "" : ",") + c.name;
    return s;
}

/// 64 nodes, 2 FCs of 32, K=2, m=16.
dc::SimConfig small_world(std::uint64_t seed, std::int64_t ticks) {
    dc::SimConfig c;
    c.seed = seed;
    c.params = sp::EpochParams::make(64, 0.0, 32, 16);
    c.workload.rate = 10;
    c.workload.duration = ticks * dc::kTick;
    c.end_time = ticks * dc::kTick;
    return c;
}

// --- 1 ------------------------------------------------------------------------

Outcome table_reproduction() {
    struct Row {
        std::uint32_t N, n, m;
        double published;
    };
    const Row rows[] = {{640, 320, 80, 4.3e-6}, {1290, 430, 86, 6.0e-6}, {1920, 480, 96, 5.8e-6}, {2550, 510, 102, 6.8e-6}};
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    for (const auto& r : rows) {
        const double v = sp::system_failure_upper(sp::EpochParams::make(r.N, 0.25, r.n, r.m));
        const bool ok = v <= kTableBound && std::abs(v - r.published) <= kTableRelTol * r.published;
        o.pass = o.pass && ok;
        o.detail += fmt("N=%u %.3g (published %.2g) ", r.N, v, r.published);
    }
    const double secs = seconds_since(t0);
    o.pass = o.pass && secs < kC1Seconds;
    o.detail += fmt("in %.2fs", secs);
    return o;
}

// --- 2 ------------------------------------------------------------------------

Outcome probability_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    std::uint64_t mismatches = 0, cases = 0;
    for (unsigned pop = 0; pop <= 12; ++pop) {
        const unsigned full = 1u << pop;
        for (unsigned marked = 0; marked <= pop; ++marked) {
            const unsigned marked_mask = (1u << marked) - 1;
            for (unsigned draws = 0; draws <= pop; ++draws) {
                std::vector<unsigned> hits(draws + 1, 0);
                unsigned total = 0;
                for (unsigned s = 0; s < full; ++s) {
                    if (static_cast<unsigned>(std::popcount(s)) != draws) continue;
                    ++total;
                    ++hits[std::popcount(s & marked_mask)];
                }
                for (unsigned k = 0; k <= draws; ++k) {
                    mpq_class expect(hits[k], total);
                    expect.canonicalize();
                    ++cases;
                    if (sp::hypergeom_pmf_exact(pop, marked, draws, k) != expect) ++mismatches;
                }
            }
        }
    }
    o.pass = mismatches == 0;
    o.detail = fmt("pmf %llu/%llu exact; ", static_cast<unsigned long long>(cases - mismatches),
                   static_cast<unsigned long long>(cases));

    // Sample committees of 20 from 100 nodes, 30 of them malicious.
    const auto p = sp::EpochParams::make(100, 0.3, 20, 20);
    const double exact = sp::fc_case1_prob(p);
    std::mt19937_64 gen(0x5eed'0002);
    std::vector<int> pool(100);
    int fails = 0;
    for (int t = 0; t < kMonteCarloTrials; ++t) {
        for (int i = 0; i < 100; ++i) pool[i] = i < 30 ? 1 : 0;
        int bad = 0;
        for (int i = 0; i < 20; ++i) {
            std::uniform_int_distribution<int> d(i, 99);
            std::swap(pool[i], pool[d(gen)]);
            bad += pool[i];
        }
        if (bad >= 20 / 3) ++fails;
    }
    const double est = static_cast<double>(fails) / kMonteCarloTrials;
    const double se = std::sqrt(exact * (1 - exact) / kMonteCarloTrials);
    const bool mc_ok = std::abs(est - exact) <= kMonteCarloSigmas * se;
    const double secs = seconds_since(t0);
    o.pass = o.pass && mc_ok && secs < kC2Seconds;
    o.detail += fmt("tail %.6f vs MC %.6f (%.2f se) in %.1fs", exact, est, std::abs(est - exact) / se, secs);
    return o;
}

// --- 3 and 5 (shared safety suite) ----------------------------------------------

std::vector<std::pair<std::uint32_t, std::uint32_t>> fc_splits() {
    // Per-PS malicious counts below m/2 whose FC total stays below n/3.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t a = 0; a <= 7; ++a)
        for (std::uint32_t b = 0; b <= 7; ++b)
            if (a + b <= 10 && a + b > 0) out.emplace_back(a, b);
    return out;
}

dc::SimConfig safety_config(std::uint64_t seed) {
    auto c = small_world(seed, 40);
    c.workload.cross_shard_ratio = 0.5;
    static const auto splits = fc_splits();
    const bool lead = seed % 2 == 0;
    // Every fourth run taints proposals instead of forking them.
    const dc::Strategy st = seed % 4 == 3 ? dc::Strategy::Manipulator : dc::Strategy::Equivocator;
    for (std::uint32_t fc = 0; fc < 2; ++fc) {
        const auto [a, b] = splits[(seed * 7 + fc * 13) % splits.size()];
        c.attack.planted.push_back(dc::PlantedShard{dc::PsId(2 * fc), a, st, 0, lead});
        c.attack.planted.push_back(dc::PlantedShard{dc::PsId(2 * fc + 1), b, st, 0, lead});
    }
    return c;
}

const std::vector<dc::SimResult>& safety_suite() {
    static const std::vector<dc::SimResult> results = [] {
        std::vector<dc::SimConfig> cfgs;
        for (int s = 1; s <= kSafetySeeds; ++s) cfgs.push_back(safety_config(static_cast<std::uint64_t>(s)));
        return run_all(cfgs);
    }();
    return results;
}

Outcome safety() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& rs = safety_suite();
    std::uint64_t prefix = 0, invalid = 0, unbacked = 0, other = 0, vcs = 0;
    std::string first_other;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        for (const auto& c : r.checks) {
            if (c.name == "ps_agreement" || c.name == "fc_agreement") prefix += c.violations;
            else if (c.name == "finalized_blocks_valid") invalid += c.violations;
            else if (c.name == "finalized_headers_have_quorum") unbacked += c.violations;
            else if (!c.pass) {
                ++other;
                if (first_other.empty()) first_other = fmt(" first: seed %zu %s", i + 1, c.name.c_str());
            }
        }
        vcs += r.metrics.ps_view_changes;
    }
    Outcome o;
    o.pass = prefix == 0 && invalid == 0 && unbacked == 0;
    o.detail = fmt("%zu runs: %llu prefix conflicts, %llu invalid finalized blocks, %llu unbacked headers; "
                   "%llu view changes; %llu other check failures%s; %.0fs",
                   rs.size(), static_cast<unsigned long long>(prefix), static_cast<unsigned long long>(invalid),
                   static_cast<unsigned long long>(unbacked), static_cast<unsigned long long>(vcs),
                   static_cast<unsigned long long>(other), first_other.c_str(), seconds_since(t0));
    return o;
}

// --- 4 ------------------------------------------------------------------------

Outcome silent_liveness() {
    std::vector<dc::SimConfig> cfgs;
    for (int s = 1; s <= kSilentSeeds; ++s) {
        auto c = small_world(static_cast<std::uint64_t>(s), 60);
        c.attack.planted = {dc::PlantedShard{dc::PsId(0), 7, dc::Strategy::Silent, 0, false}};
        cfgs.push_back(c);
    }
    const auto rs = run_all(cfgs);
    Outcome o;
    double worst_rate = 1e9;
    dc::SimTime worst_gap = 0;
    int bad = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        const auto& c = cfgs[i];
        std::uint64_t at_gst = 0;
        for (const auto& cm : r.facts.commits)
            if (cm.ps == dc::PsId(0) && cm.at <= c.net.gst) at_gst = std::max(at_gst, cm.height);
        const double windows = static_cast<double>(c.end_time - c.net.gst) / static_cast<double>(kGrowthWindow * c.net.delta);
        const double rate = static_cast<double>(r.metrics.ps_heights[0] - at_gst) / windows;
        worst_rate = std::min(worst_rate, rate);
        worst_gap = std::max(worst_gap, r.metrics.longest_ps_gap);
        if (rate < 1.0 || !r.all_pass()) {
            ++bad;
            if (o.detail.empty()) o.detail = fmt("seed %zu fails (rate %.2f, checks: %s); ", i + 1, rate, failing_checks(r).c_str());
        }
    }
    o.pass = bad == 0;
    o.detail += fmt("%d/%zu runs grow >= 1 block per %lld delta; slowest %.2f blocks per window, longest gap %.1f delta",
                    static_cast<int>(rs.size()) - bad, rs.size(), static_cast<long long>(kGrowthWindow), worst_rate,
                    dc::to_ticks(worst_gap));
    return o;
}

// --- 5 ------------------------------------------------------------------------

Outcome leader_replacement() {
    std::vector<dc::SimConfig> cfgs;
    for (int s = 1; s <= kLeaderSeeds; ++s) {
        auto c = small_world(static_cast<std::uint64_t>(s), 60);
        c.attack.planted = {dc::PlantedShard{dc::PsId(0), 7, dc::Strategy::SilentLeader, 0, true},
                            dc::PlantedShard{dc::PsId(2), 3, dc::Strategy::SilentLeader, 0, true}};
        cfgs.push_back(c);
    }
    const auto rs = run_all(cfgs);
    Outcome o;
    int late = 0, stalled = 0, unchecked = 0, tallies = 0;
    std::string first;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        const auto& c = cfgs[i];
        if (!r.all_pass()) {
            ++unchecked;
            if (first.empty()) first = fmt(" seed %zu checks: %s;", i + 1, failing_checks(r).c_str());
        }
        for (const auto& t : r.facts.tallies) {
            // Tallies too close to the end have no room for the next FC block.
            if (t.at + kGrowthWindow * c.net.delta > c.end_time) continue;
            ++tallies;
            const dc::FcId fc = dc::FcId(t.ps.value / 2);
            std::uint64_t before = 0;
            for (const auto& f : r.facts.fc_finals)
                if (f.fc == fc && f.at <= t.at) before = std::max(before, f.height);
            const auto vc = std::find_if(r.facts.view_changes.begin(), r.facts.view_changes.end(), [&](const auto& v) {
                return v.ps == t.ps && v.new_view == t.view + 1;
            });
            // One FC block may already be in flight when the tally completes.
            if (vc == r.facts.view_changes.end() || vc->fc_height > before + 2) {
                ++late;
                if (first.empty()) first = fmt(" seed %zu ps %u view %llu late;", i + 1, t.ps.value,
                                               static_cast<unsigned long long>(t.view));
            }
        }
        for (std::uint32_t ps : {0u, 2u}) {
            dc::SimTime last_vc = 0;
            for (const auto& v : r.facts.view_changes)
                if (v.ps == dc::PsId(ps)) last_vc = std::max(last_vc, v.finalized_at);
            const bool resumed = std::any_of(r.facts.commits.begin(), r.facts.commits.end(),
                                             [&](const auto& cm) { return cm.ps == dc::PsId(ps) && cm.at > last_vc; });
            if (last_vc == 0 || !resumed) {
                ++stalled;
                if (first.empty()) first = fmt(" seed %zu ps %u did not resume;", i + 1, ps);
            }
        }
    }
    std::uint64_t honest_replaced = 0;
    for (const auto& r : safety_suite())
        if (const auto* c = find_check(r, "honest_leaders_kept")) honest_replaced += c->violations;
    for (const auto& r : rs)
        if (const auto* c = find_check(r, "honest_leaders_kept")) honest_replaced += c->violations;
    o.pass = late == 0 && stalled == 0 && unchecked == 0 && honest_replaced == 0 && tallies > 0;
    o.detail = fmt("%d tallies, %d view changes late, %d PS chains not resumed, %d runs with failed checks, "
                   "%llu honest leaders replaced across %d safety runs;%s",
                   tallies, late, stalled, unchecked, static_cast<unsigned long long>(honest_replaced), kSafetySeeds,
                   first.c_str());
    return o;
}

// --- 6 ------------------------------------------------------------------------

Outcome cross_shard() {
    std::vector<dc::SimConfig> cfgs;
    for (int s = 1; s <= kCrossSeeds; ++s) {
        auto c = small_world(static_cast<std::uint64_t>(s), 40);
        c.workload.cross_shard_ratio = 0.5;
        c.workload.duration = 30 * dc::kTick;
        const dc::Strategy st = dc::Strategy::Equivocator;
        c.attack.planted = {dc::PlantedShard{dc::PsId(0), 7, st, 0, true}, dc::PlantedShard{dc::PsId(1), 3, st, 0, true},
                            dc::PlantedShard{dc::PsId(2), 7, st, 0, true}, dc::PlantedShard{dc::PsId(3), 3, st, 0, true}};
        cfgs.push_back(c);
    }
    const auto rs = run_all(cfgs);
    Outcome o;
    int bad = 0;
    std::uint64_t credited = 0, debited = 0, in_flight = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        const bool ok = check_ok(r, "receipts_exactly_once") && check_ok(r, "supply_conserved") &&
                        r.facts.cross_credited <= r.facts.cross_debited && r.metrics.confirmed_cross > 0 &&
                        r.facts.final_supply + r.facts.in_flight == r.facts.initial_supply;
        if (!ok) {
            ++bad;
            if (o.detail.empty()) o.detail = fmt("seed %zu fails (%s); ", i + 1, failing_checks(r).c_str());
        }
        credited += r.facts.cross_credited;
        debited += r.facts.cross_debited;
        in_flight += r.facts.in_flight;
    }
    o.pass = bad == 0;
    o.detail += fmt("%d/%zu runs exactly-once and conserved; %llu cross txs debited, %llu credited, %llu units in flight at end",
                    static_cast<int>(rs.size()) - bad, rs.size(), static_cast<unsigned long long>(debited),
                    static_cast<unsigned long long>(credited), static_cast<unsigned long long>(in_flight));
    return o;
}

// --- 7 ------------------------------------------------------------------------

Outcome pipelining() {
    std::vector<dc::SimConfig> cfgs;
    for (int s = 1; s <= kPipelinePairs; ++s) {
        for (bool on : {true, false}) {
            auto c = small_world(static_cast<std::uint64_t>(s), 40);
            c.proto.block_capacity = 8;
            c.workload.rate = 60;
            c.proto.pipelining = on;
            cfgs.push_back(c);
        }
    }
    for (int s = 1; s <= kScaleSeeds; ++s) {
        for (std::uint32_t m : {64u, 16u}) {
            dc::SimConfig c;
            c.seed = static_cast<std::uint64_t>(s);
            c.params = sp::EpochParams::make(128, 0.0, 64, m);
            c.proto.block_capacity = 8;
            c.workload.rate = 100;
            c.workload.duration = 40 * dc::kTick;
            c.end_time = 40 * dc::kTick;
            cfgs.push_back(c);
        }
    }
    const auto rs = run_all(cfgs);
    int wins = 0;
    double on_sum = 0, off_sum = 0;
    for (int i = 0; i < kPipelinePairs; ++i) {
        const auto& on = rs[2 * i].metrics;
        const auto& off = rs[2 * i + 1].metrics;
        if (on.confirmed_txs > off.confirmed_txs) ++wins;
        on_sum += on.tps;
        off_sum += off.tps;
    }
    double worst_ratio = 1e9;
    std::string ratios;
    for (int i = 0; i < kScaleSeeds; ++i) {
        const auto& k1 = rs[2 * kPipelinePairs + 2 * i].metrics;
        const auto& k4 = rs[2 * kPipelinePairs + 2 * i + 1].metrics;
        const double ratio = k1.tps > 0 ? k4.tps / k1.tps : 0.0;
        worst_ratio = std::min(worst_ratio, ratio);
        ratios += fmt("%s%.2f", ratios.empty() ? "" : " ", ratio);
    }
    Outcome o;
    o.pass = wins >= kPipelineWins && worst_ratio >= kScaleRatio;
    o.detail = fmt("pipelining wins %d/%d pairs (mean TPS %.1f vs %.1f); K=4 over K=1 at N=128: %s", wins,
                   kPipelinePairs, on_sum / kPipelinePairs, off_sum / kPipelinePairs, ratios.c_str());
    return o;
}

// --- 8 ------------------------------------------------------------------------

Outcome stagnation() {
    const dc::SimTime T = 30 * dc::kTick;
    std::vector<dc::SimConfig> cfgs;
    for (int s = 1; s <= kStagnationSeeds; ++s) {
        auto c = small_world(static_cast<std::uint64_t>(s), 80);
        for (std::uint32_t p = 0; p < 4; ++p) c.attack.planted.push_back(dc::PlantedShard{dc::PsId(p), 3, dc::Strategy::Silent, 0, false});
        // Three more of 64 nodes (about 5%) fall silent at T.
        for (std::uint32_t p = 0; p < 3; ++p) c.attack.planted.push_back(dc::PlantedShard{dc::PsId(p), 1, dc::Strategy::Silent, T, false});
        cfgs.push_back(c);
    }
    const auto rs = run_all(cfgs);
    Outcome o;
    int bad = 0;
    double min_post = 1e9, pre_sum = 0, post_sum = 0;
    dc::SimTime worst = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const auto& r = rs[i];
        const auto& c = cfgs[i];
        std::uint64_t pre = 0, post = 0;
        for (const auto& cm : r.facts.commits) (cm.at >= T ? post : pre) += cm.txs;
        const double post_tps = static_cast<double>(post) / dc::to_ticks(c.end_time - T);
        pre_sum += static_cast<double>(pre) / dc::to_ticks(T);
        post_sum += post_tps;
        min_post = std::min(min_post, post_tps);
        worst = std::max(worst, r.metrics.longest_ps_gap);
        if (post_tps <= 0 || r.metrics.longest_ps_gap > kMaxStall * c.net.delta || !r.all_pass()) {
            ++bad;
            if (o.detail.empty()) o.detail = fmt("seed %zu fails (%s); ", i + 1, failing_checks(r).c_str());
        }
    }
    o.pass = bad == 0;
    o.detail += fmt("%d/%zu runs; mean committed tx/tick before T %.2f, after T %.2f (min %.2f); longest stall %.1f delta",
                    static_cast<int>(rs.size()) - bad, rs.size(), pre_sum / kStagnationSeeds, post_sum / kStagnationSeeds,
                    min_post, dc::to_ticks(worst));
    return o;
}

// --- 9 ------------------------------------------------------------------------

Outcome determinism() {
    const std::vector<std::pair<std::string, dc::SimConfig>> scenarios = {
        {"honest", small_world(11, 20)},
        {"equivocator", safety_config(12)},
    };
    std::ostringstream hashes;
    bool same = true;
    for (const auto& [name, cfg] : scenarios) {
        const auto a = dc::simulate(cfg);
        const auto b = dc::simulate(cfg);
        same = same && a.trace_hash == b.trace_hash;
        hashes << name << ' ' << a.trace_hash.hex() << '\n';
    }
    const std::string path = std::string(DUALCHAIN_GOLDEN_DIR) + "/acceptance_trace_hashes.txt";
    if (std::getenv("DUALCHAIN_UPDATE_GOLDEN") != nullptr) std::ofstream(path) << hashes.str();
    std::ifstream in(path);
    std::stringstream golden;
    golden << in.rdbuf();
    const bool matches = in.good() && golden.str() == hashes.str();
    Outcome o;
    o.pass = same && matches;
    o.detail = fmt("repeat runs %s; golden hashes %s", same ? "identical" : "DIFFER",
                   matches ? "match" : "do not match");
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"sizing table reproduction", table_reproduction},
        {"probability oracles", probability_oracles},
        {"safety under equivocation", safety},
        {"liveness under silent attack", silent_liveness},
        {"cross-layer view change", leader_replacement},
        {"cross-shard eventual atomicity", cross_shard},
        {"pipelining and shard scaling", pipelining},
        {"stagnation under added silence", stagnation},
        {"determinism", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto o = criteria[i].second();
        std::printf("criterion %d %-32s %s  %s\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
