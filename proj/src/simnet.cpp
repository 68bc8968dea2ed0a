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

#include "dualchain/simnet.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace dualchain {

namespace {

constexpr std::uint64_t kProbScale = 1ULL << 20;
constexpr SimTime kQuantum = kTick / 1000;

std::uint64_t scaled(double p) { return static_cast<std::uint64_t>(std::llround(p * static_cast<double>(kProbScale))); }

double to_ticks_d(SimTime t) { return to_ticks(t); }

}  // namespace

// --- network and workload -------------------------------------------------------

SimTime NetModel::sample(CounterRng& rng, SimTime now) const {
    const SimTime hi = now < gst ? pre_gst_max : delta;
    return rng.range(d_min, hi);
}

void NetModel::validate() const {
    if (d_min < 0 || delta < d_min || pre_gst_max < delta) throw Error("net model: need 0 <= d_min <= delta <= pre_gst_max");
    if (gst < 0) throw Error("net model: gst must be non-negative");
}

void WorkloadConfig::validate() const {
    if (rate < 0.0 || rate > 1000.0) throw Error("workload: rate must be in [0, 1000] per tick");
    if (cross_shard_ratio < 0.0 || cross_shard_ratio > 1.0) throw Error("workload: cross_shard_ratio must be in [0, 1]");
    if (start < 0 || duration < 0) throw Error("workload: start and duration must be non-negative");
    if (max_amount == 0) throw Error("workload: max_amount must be positive");
}

std::vector<Transaction> generate_workload(const World& world, const WorkloadConfig& w) {
    w.validate();
    std::vector<Transaction> out;
    const std::uint32_t shards = world.ps_count();
    if (w.rate == 0.0 || w.duration == 0 || world.accounts.empty() || world.accounts.front().empty()) return out;
    const std::uint64_t per_quantum = scaled(w.rate / 1000.0);
    const std::uint64_t cross = scaled(w.cross_shard_ratio);
    auto rng = world.rand.stream(Stream::Workload);
    std::uint64_t serial = 0;
    for (SimTime t = w.start; t < w.start + w.duration; t += kQuantum) {
        if (!rng.chance(per_quantum, kProbScale)) continue;
        const auto src = static_cast<std::uint32_t>(rng.uniform(shards));
        const auto& from_list = world.accounts[src];
        const Principal payer = from_list[rng.uniform(from_list.size())];
        std::uint32_t dst = src;
        if (shards > 1 && rng.chance(cross, kProbScale)) {
            dst = static_cast<std::uint32_t>(rng.uniform(shards - 1));
            if (dst >= src) ++dst;
        }
        const auto& to_list = world.accounts[dst];
        const Principal payee = to_list[rng.uniform(to_list.size())];
        const std::uint64_t amount = 1 + rng.uniform(w.max_amount);
        out.push_back(Transaction::make(world.keys.issue(payer), account_address_for(payer),
                                        account_address_for(payee), amount, t, serial++));
    }
    return out;
}

// --- oracle -----------------------------------------------------------------------

class Oracle {
  public:
    Oracle(const World& w, const SimConfig& cfg) : w_(w), cfg_(cfg) {
        for (std::uint32_t p = 0; p < w.ps_count(); ++p) {
            ledger_.push_back(w.genesis_state(PsId(p)));
            leaders_.push_back({{0, ps_initial_leader(w.assignment, PsId(p), w.rand)}});
        }
        ps_final_.resize(w.ps_count());
        fc_final_.resize(w.assignment.fc_count());
        fc_view_.resize(w.assignment.fc_count(), 0);
        facts_.initial_supply = w.initial_supply();
    }

    void issued(const Transaction& tx) { issue_time_[tx.id] = tx.issue_time; }
    void causality_violation() { ++causality_; }
    void complaint_sent(SimTime now, const Complaint& c) { complaint_sent_.try_emplace(c.digest(), now); }

    void observe(SimTime now, NodeId node, const Observation& obs) {
        const bool honest = !w_.is_malicious(node);
        std::visit([&](const auto& o) { on(now, node, honest, o); }, obs);
    }

    void finish(const std::vector<Node>& nodes, SimResult& out);

  private:
    void on(SimTime now, NodeId, bool, const ObsProposed& o) {
        if (first_proposed_.emplace(o.hash, now).second) facts_.proposals.emplace_back(now, o.ps);
    }
    void on(SimTime, NodeId node, bool honest, const ObsVoted& o) {
        if (!honest) return;
        auto [it, fresh] = votes_.try_emplace({node.value, o.view, o.height}, o.hash);
        if (!fresh && it->second != o.hash) ++double_votes_;
    }
    void on(SimTime now, NodeId, bool honest, const ObsPsQuorum& o) {
        if (honest) first_quorum_.emplace(o.hash, now);
    }
    void on(SimTime now, NodeId, bool honest, const ObsFcProposed& o) {
        if (!honest) return;
        for (const auto& seg : o.proposal->block.segments)
            for (const auto& h : seg.headers) first_fc_proposed_.emplace(h, now);
        fc_proposal_time_.emplace(std::make_pair(o.proposal->block.hash(), o.proposal->block.fc.value), now);
    }
    void on(SimTime now, NodeId, bool honest, const ObsTallyQuorum& o) {
        if (honest && tallied_.insert({o.ps.value, o.view}).second) facts_.tallies.push_back({o.ps, o.view, now});
    }
    void on(SimTime, NodeId, bool honest, const ObsFcViewEntered& o) {
        if (honest) fc_view_[o.fc.value] = std::max(fc_view_[o.fc.value], o.view);
    }
    void on(SimTime, NodeId, bool honest, const ObsStuck&) {
        if (honest) ++stuck_;
    }
    void on(SimTime now, NodeId, bool honest, const ObsPsCommitted& o);
    void on(SimTime now, NodeId, bool honest, const ObsFcFinalized& o);

    void replay(SimTime now, const ProposerBlock& b);

    const World& w_;
    const SimConfig& cfg_;
    RunFacts facts_;

    std::vector<std::map<std::uint64_t, Hash256>> ps_final_;
    std::vector<std::map<std::uint64_t, Hash256>> fc_final_;
    std::vector<std::uint64_t> fc_view_;
    std::vector<ShardState> ledger_;
    std::vector<std::map<std::uint64_t, NodeId>> leaders_;
    std::unordered_map<Hash256, std::shared_ptr<const ProposerBlock>, Hash256Hasher> blocks_;

    std::unordered_map<Hash256, SimTime, Hash256Hasher> issue_time_;
    std::unordered_map<Hash256, SimTime, Hash256Hasher> first_proposed_, first_quorum_, first_fc_proposed_;
    std::map<std::pair<Hash256, std::uint32_t>, SimTime> fc_proposal_time_;
    std::map<std::tuple<std::uint32_t, std::uint64_t, std::uint64_t>, Hash256> votes_;
    std::set<std::pair<std::uint32_t, std::uint64_t>> tallied_;
    std::unordered_map<Hash256, SimTime, Hash256Hasher> complaint_sent_;

    struct CrossTx {
        std::uint32_t debits = 0, credits = 0;
        std::uint64_t amount = 0;
    };
    std::unordered_map<Hash256, CrossTx, Hash256Hasher> cross_;
    std::vector<std::pair<SimTime, SimTime>> confirmations_;  // (issue, confirm)
    std::uint64_t confirmed_cross_ = 0;
    std::vector<double> phase_p_, phase_v_, phase_f_;

    std::uint64_t ps_conflicts_ = 0, fc_conflicts_ = 0, invalid_blocks_ = 0, unbacked_headers_ = 0,
                  unbacked_view_changes_ = 0, receipt_faults_ = 0, double_votes_ = 0, stuck_ = 0, causality_ = 0;
};

void Oracle::on(SimTime now, NodeId, bool honest, const ObsPsCommitted& o) {
    if (!honest) return;
    auto& chain = ps_final_[o.ps.value];
    auto [it, fresh] = chain.try_emplace(o.height, o.hash);
    if (!fresh) {
        if (it->second != o.hash) ++ps_conflicts_;
        return;
    }
    blocks_[o.hash] = o.block;
    facts_.commits.push_back({now, o.ps, o.height, o.block->load()});
    if (auto p = first_proposed_.find(o.hash); p != first_proposed_.end()) {
        auto q = first_quorum_.find(o.hash);
        auto f = first_fc_proposed_.find(o.hash);
        if (q != first_quorum_.end() && f != first_fc_proposed_.end() && p->second <= q->second && q->second <= f->second) {
            phase_p_.push_back(to_ticks_d(q->second - p->second));
            phase_v_.push_back(to_ticks_d(f->second - q->second));
            phase_f_.push_back(to_ticks_d(now - f->second));
        }
    }
    replay(now, *o.block);
}

void Oracle::replay(SimTime now, const ProposerBlock& b) {
    const std::uint32_t ps = b.header.ps.value;
    try {
        ledger_[ps] = apply_block(ledger_[ps], b, w_.ctx);
    } catch (const InvalidBlock&) {
        ++invalid_blocks_;
        return;
    }
    ledger_[ps].tip = b.header.hash();
    ledger_[ps].height = b.header.height;
    for (const auto& tx : b.txs) {
        if (home_shard(tx.payee, w_.ps_count()) == ps) {
            if (auto it = issue_time_.find(tx.id); it != issue_time_.end()) confirmations_.emplace_back(it->second, now);
            continue;
        }
        auto& c = cross_[tx.id];
        ++c.debits;
        c.amount = tx.amount;
        if (c.debits > 1) ++receipt_faults_;
    }
    for (const auto& r : b.deposits) {
        // The credited batch must be verbatim the finalized source outbox.
        const Hash256 src = r->proposer_header.hash();
        auto sb = blocks_.find(src);
        const auto& src_chain = ps_final_.at(r->source_ps.value);
        auto at = src_chain.find(r->proposer_header.height);
        const OutboxBatch* batch = sb != blocks_.end() ? sb->second->batch_for(b.header.ps) : nullptr;
        if (at == src_chain.end() || at->second != src || !batch || batch->txs.size() != r->batch.size() ||
            !std::equal(batch->txs.begin(), batch->txs.end(), r->batch.begin(),
                        [](const Transaction& x, const Transaction& y) { return x.id == y.id; }))
            ++receipt_faults_;
        for (const auto& tx : r->batch) {
            auto& c = cross_[tx.id];
            ++c.credits;
            if (c.credits > 1 || c.debits == 0) ++receipt_faults_;
            ++confirmed_cross_;
            if (auto it = issue_time_.find(tx.id); it != issue_time_.end()) confirmations_.emplace_back(it->second, now);
        }
    }
}

void Oracle::on(SimTime now, NodeId, bool honest, const ObsFcFinalized& o) {
    if (!honest) return;
    const auto& fin = *o.block;
    auto [it, fresh] = fc_final_[fin.fc.value].try_emplace(fin.height, fin.hash());
    if (!fresh) {
        if (it->second != fin.hash()) ++fc_conflicts_;
        return;
    }
    SimTime proposed = now;
    if (auto p = fc_proposal_time_.lower_bound({fin.hash(), 0}); p != fc_proposal_time_.end() && p->first.first == fin.hash())
        proposed = p->second;
    facts_.fc_finals.push_back({now, fin.fc, fin.height, proposed});
    for (const auto& h : o.proposal->headers) {
        if (h.votes.digest != h.hash() ||
            count_valid(h.votes, w_.assignment.ps_members(h.ps), w_.keys) < w_.ctx.quorum_ps)
            ++unbacked_headers_;
    }
    for (const auto& vc : fin.view_changes) {
        std::set<NodeId> signers;
        SimTime first_complaint = now;
        for (const auto& c : o.proposal->complaints) {
            if (c.ps != vc.ps) continue;
            const Hash256 d = c.digest();
            if (!std::binary_search(vc.complaint_digests.begin(), vc.complaint_digests.end(), d)) continue;
            if (member_position(w_.assignment.ps_members(c.ps), c.complainer) < 0) continue;
            if (!verify(w_.keys, c.sig, d, c.complainer)) continue;
            signers.insert(c.complainer);
            if (auto t = complaint_sent_.find(d); t != complaint_sent_.end()) first_complaint = std::min(first_complaint, t->second);
        }
        if (signers.size() < w_.ctx.quorum_ps) ++unbacked_view_changes_;
        auto& hist = leaders_[vc.ps.value];
        const NodeId suspect = hist.rbegin()->second;
        hist[vc.new_view] = vc.new_leader;
        facts_.view_changes.push_back(
            {vc.ps, vc.new_view, suspect, vc.new_leader, !w_.is_malicious(suspect), now, fin.height, first_complaint});
    }
}

void Oracle::finish(const std::vector<Node>& nodes, SimResult& out) {
    auto& m = out.metrics;
    const SimTime end = cfg_.end_time;
    const SimTime gst = cfg_.net.gst;

    // Confirmations and latency.
    std::vector<double> lat;
    m.tps_series.assign(static_cast<std::size_t>((end + cfg_.tps_bucket - 1) / cfg_.tps_bucket), 0);
    std::uint64_t in_window = 0;
    for (const auto& [issue, conf] : confirmations_) {
        lat.push_back(to_ticks_d(conf - issue));
        if (conf >= gst) ++in_window;
        const auto bucket = static_cast<std::size_t>(conf / cfg_.tps_bucket);
        if (bucket < m.tps_series.size()) ++m.tps_series[bucket];
    }
    m.confirmed_txs = confirmations_.size();
    m.confirmed_cross = confirmed_cross_;
    m.tps = end > gst ? static_cast<double>(in_window) / to_ticks_d(end - gst) : 0.0;
    if (!lat.empty()) {
        std::sort(lat.begin(), lat.end());
        double sum = 0;
        for (double x : lat) sum += x;
        m.latency_mean = sum / static_cast<double>(lat.size());
        m.latency_p50 = lat[lat.size() / 2];
        m.latency_p95 = lat[std::min(lat.size() - 1, lat.size() * 95 / 100)];
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    m.phase_proposal = mean(phase_p_);
    m.phase_verification = mean(phase_v_);
    m.phase_finalization = mean(phase_f_);

    // Heights, view changes, gaps.
    m.finalized_ps_blocks = facts_.commits.size();
    for (const auto& c : ps_final_) m.ps_heights.push_back(c.empty() ? 0 : c.rbegin()->first);
    for (const auto& c : fc_final_) m.fc_heights.push_back(c.empty() ? 0 : c.rbegin()->first);
    m.ps_view_changes = facts_.view_changes.size();
    for (auto v : fc_view_) m.fc_view_changes += v;

    auto gaps = [&](const std::vector<SimTime>& times, SimTime& longest, std::vector<Interval>* stag) {
        SimTime prev = gst;
        auto take = [&](SimTime t) {
            if (t < gst) return;
            longest = std::max(longest, t - prev);
            if (stag && t - prev > cfg_.stagnation_threshold) stag->push_back({prev, t});
            prev = t;
        };
        for (auto t : times) take(t);
        take(end);
    };
    std::vector<SimTime> all;
    std::vector<std::vector<SimTime>> per(ps_final_.size());
    for (const auto& c : facts_.commits) {
        all.push_back(c.at);
        per[c.ps.value].push_back(c.at);
    }
    gaps(all, m.longest_gap, nullptr);
    for (const auto& p : per) gaps(p, m.longest_ps_gap, &m.stagnation);
    std::sort(m.stagnation.begin(), m.stagnation.end(),
              [](const Interval& a, const Interval& b) { return std::tie(a.begin, a.end) < std::tie(b.begin, b.end); });

    // Supply: finalized balances plus debited-but-uncredited amounts.
    for (const auto& s : ledger_) facts_.final_supply += s.total();
    for (const auto& [id, c] : cross_) {
        if (c.debits > 0) ++facts_.cross_debited;
        if (c.credits > 0) ++facts_.cross_credited;
        if (c.debits == 1 && c.credits == 0) facts_.in_flight += c.amount;
    }

    std::uint64_t stale = 0;
    for (const auto& n : nodes) {
        if (w_.is_malicious(n.id())) continue;
        if (auto t = n.fc().oldest_candidate(); t && end - *t > cfg_.pending_horizon) ++stale;
    }

    std::uint64_t honest_replaced = 0;
    for (const auto& vc : facts_.view_changes) {
        // Complaints raised before GST settles may stem from pre-GST delays.
        if (vc.suspect_honest && vc.first_complaint >= gst + cfg_.stagnation_threshold) ++honest_replaced;
    }

    auto check = [&](std::string name, std::uint64_t bad, std::string detail = {}) {
        out.checks.push_back(CheckResult{std::move(name), bad == 0, bad, std::move(detail)});
    };
    check("ps_agreement", ps_conflicts_);
    check("fc_agreement", fc_conflicts_);
    check("finalized_headers_have_quorum", unbacked_headers_);
    check("finalized_blocks_valid", invalid_blocks_);
    check("receipts_exactly_once", receipt_faults_);
    const std::uint64_t supply = facts_.final_supply + facts_.in_flight;
    check("supply_conserved", supply == facts_.initial_supply ? 0 : 1,
          std::to_string(supply) + " vs " + std::to_string(facts_.initial_supply));
    check("honest_single_vote", double_votes_);
    check("view_changes_backed", unbacked_view_changes_);
    check("honest_leaders_kept", honest_replaced);
    check("blocks_retrievable", stuck_);
    check("candidates_resolved", stale);
    check("causality", causality_);
    out.facts = std::move(facts_);
}

// --- engine -------------------------------------------------------------------------

struct Simulation::Event {
    enum class Kind : std::uint8_t { Start, Deliver, Timer, ClientTx };
    SimTime at = 0;
    std::uint64_t seq = 0;
    Kind kind = Kind::Deliver;
    NodeId to, from;
    std::shared_ptr<const Message> msg;
    TimerRequest timer;
    std::size_t tx = 0;
};

bool Simulation::Later::operator()(const Event& a, const Event& b) const {
    return std::tie(a.at, a.seq) > std::tie(b.at, b.seq);
}

Simulation::Simulation(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.params.validate();
    cfg_.net.validate();
    cfg_.workload.validate();
    const EpochRandomness rand{cfg_.seed, 0};
    ProtocolConfig proto = cfg_.proto;
    proto.delta = cfg_.net.delta;
    world_ = std::make_unique<World>(cfg_.params, rand, proto, cfg_.accounts_per_shard, cfg_.genesis_balance);
    world_->behavior =
        realize_plan(cfg_.attack, assign_malicious(rand, cfg_.params), world_->assignment, world_->rand);
    nodes_.reserve(cfg_.params.network_size);
    for (std::uint32_t i = 0; i < cfg_.params.network_size; ++i) nodes_.emplace_back(NodeId(i), *world_);
    workload_ = generate_workload(*world_, cfg_.workload);
    oracle_ = std::make_unique<Oracle>(*world_, cfg_);
}

Simulation::~Simulation() = default;

void Simulation::push(Event e) {
    e.seq = seq_++;
    queue_.push_back(std::move(e));
    std::push_heap(queue_.begin(), queue_.end(), Later{});
}

CounterRng& Simulation::edge(NodeId from, NodeId to) {
    auto key = std::make_pair(from.value, to.value);
    auto it = edges_.find(key);
    if (it == edges_.end()) it = edges_.emplace(key, world_->rand.stream(Stream::Network, {from.value, to.value})).first;
    return it->second;
}

void Simulation::apply(NodeId owner, SimTime now, Effects& fx) {
    for (auto& s : fx.sends) {
        auto msg = std::make_shared<const Message>(std::move(s.msg));
        if (const auto* cm = std::get_if<ComplainMsg>(msg.get()); cm && cm->complaint)
            oracle_->complaint_sent(now, *cm->complaint);
        for (auto to : s.to) {
            const SimTime d = to == owner ? 0 : cfg_.net.sample(edge(owner, to), now);
            if (to != owner && d < cfg_.net.d_min) oracle_->causality_violation();
            Event e;
            e.at = now + d;
            e.kind = Event::Kind::Deliver;
            e.to = to;
            e.from = owner;
            e.msg = msg;
            push(std::move(e));
        }
    }
    for (auto& t : fx.timers) {
        Event e;
        e.at = std::max(t.at, now);
        e.kind = Event::Kind::Timer;
        e.to = owner;
        e.timer = std::move(t);
        push(std::move(e));
    }
    char buf[160];
    for (const auto& r : fx.trace) {
        const int n = std::snprintf(buf, sizeof buf, "%" PRId64 " %s %u %s\n", now, to_string(r.kind), owner.value,
                                    r.detail.hex().c_str());
        const std::string_view line(buf, static_cast<std::size_t>(n));
        trace_stream_.update(line);
        if (cfg_.keep_trace) trace_.emplace_back(line.substr(0, line.size() - 1));
    }
    for (const auto& o : fx.observations) oracle_->observe(now, owner, o);
}

SimResult Simulation::run() {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        Event e;
        e.kind = Event::Kind::Start;
        e.to = NodeId(i);
        push(std::move(e));
    }
    for (std::size_t i = 0; i < workload_.size(); ++i) {
        const auto& tx = workload_[i];
        oracle_->issued(tx);
        const PsId home(home_shard(tx.payer, world_->ps_count()));
        for (auto n : world_->assignment.ps_members(home)) {
            Event e;
            e.at = tx.issue_time + cfg_.net.d_min;
            e.kind = Event::Kind::ClientTx;
            e.to = n;
            e.tx = i;
            push(std::move(e));
        }
    }
    SimResult out;
    std::uint64_t events = 0;
    while (!queue_.empty()) {
        std::pop_heap(queue_.begin(), queue_.end(), Later{});
        Event e = std::move(queue_.back());
        queue_.pop_back();
        if (e.at > cfg_.end_time) break;
        if (++events > cfg_.max_events) throw LivelockGuard("event ceiling exceeded at t=" + std::to_string(e.at));
        Effects fx;
        Node& node = nodes_[e.to.value];
        switch (e.kind) {
            case Event::Kind::Start: node.start(e.at, fx); break;
            case Event::Kind::Deliver: node.on_message(e.at, e.from, *e.msg, fx); break;
            case Event::Kind::Timer: node.on_timer(e.at, e.timer, fx); break;
            case Event::Kind::ClientTx: node.on_client_tx(e.at, workload_[e.tx], fx); break;
        }
        apply(e.to, e.at, fx);
    }
    out.metrics.issued_txs = workload_.size();
    out.metrics.events = events;
    oracle_->finish(nodes_, out);
    out.trace_hash = trace_stream_.finish();
    out.trace = std::move(trace_);
    return out;
}

bool SimResult::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

SimResult simulate(const SimConfig& cfg) {
    Simulation sim(cfg);
    return sim.run();
}

Hash256 trace_hash_of(const std::vector<std::string>& lines) {
    Sha256Stream s;
    for (const auto& l : lines) {
        s.update(l);
        s.update(std::string_view("\n"));
    }
    return s.finish();
}

}  // namespace dualchain
