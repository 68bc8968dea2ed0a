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

#include "dualchain/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "dualchain/secparams.hpp"

namespace dualchain {

using nlohmann::json;

namespace {

SimTime from_ticks(double t) { return static_cast<SimTime>(std::llround(t * static_cast<double>(kTick))); }

/// Strict object reader: every key must be consumed by finish().
class Reader {
  public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    void number(const std::string& key, double& out) {
        if (const json* v = raw(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
            out = v->get<double>();
        }
    }

    template <class U>
    void count(const std::string& key, U& out) {
        if (const json* v = raw(key)) {
            // Documents built in code hold signed integers even when non-negative.
            if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<std::int64_t>() < 0))
                throw ConfigError(where(key) + ": expected a non-negative integer");
            const auto x = v->get<std::uint64_t>();
            if (x > static_cast<std::uint64_t>(std::numeric_limits<U>::max())) throw ConfigError(where(key) + ": too large");
            out = static_cast<U>(x);
        }
    }

    void flag(const std::string& key, bool& out) {
        if (const json* v = raw(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + ": expected true or false");
            out = v->get<bool>();
        }
    }

    void text(const std::string& key, std::string& out) {
        if (const json* v = raw(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
            out = v->get<std::string>();
        }
    }

    void time(const std::string& key, SimTime& out) {
        double t = to_ticks(out);
        number(key, t);
        if (!std::isfinite(t) || t < 0) throw ConfigError(where(key) + ": expected a non-negative time in ticks");
        out = from_ticks(t);
    }

    void strategy(const std::string& key, Strategy& out) {
        std::string s(to_string(out));
        text(key, s);
        try {
            out = strategy_from_string(s);
        } catch (const Error& e) {
            throw ConfigError(where(key) + ": " + e.what());
        }
    }

    std::optional<Reader> child(const std::string& key) {
        if (const json* v = raw(key)) return Reader(*v, where(key));
        return std::nullopt;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }

    std::string where(const std::string& key = {}) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_epoch(Reader r, ScenarioConfig& cfg) {
    auto& p = cfg.sim.params;
    r.count("N", p.network_size);
    r.number("f", p.malicious_fraction);
    r.count("n", p.fc_size);
    r.number("epsilon", p.target_epsilon);
    if (const json* m = r.raw("m")) {
        if (m->is_string() && m->get<std::string>() == "auto") {
            cfg.auto_ps_size = true;
        } else if (m->is_number_integer()) {
            r.count("m", p.ps_size);
        } else {
            throw ConfigError(r.where("m") + ": expected a positive integer or \"auto\"");
        }
    }
    r.finish();
}

void read_protocol(Reader r, ProtocolConfig& p) {
    r.time("ps_base_timeout", p.ps_base_timeout);
    r.time("fc_base_timeout", p.fc_base_timeout);
    r.time("fc_interval", p.fc_interval);
    r.time("complaint_grace", p.complaint_grace);
    r.count("block_capacity", p.block_capacity);
    r.flag("pipelining", p.pipelining);
    r.count("max_speculative_depth", p.max_speculative_depth);
    r.count("max_backoff_exponent", p.max_backoff_exponent);
    r.finish();
}

void read_network(Reader r, NetModel& n) {
    r.time("gst", n.gst);
    r.time("delta", n.delta);
    r.time("d_min", n.d_min);
    r.time("pre_gst_max", n.pre_gst_max);
    r.finish();
}

void read_workload(Reader r, WorkloadConfig& w) {
    r.number("rate", w.rate);
    r.number("cross_shard_ratio", w.cross_shard_ratio);
    r.time("start", w.start);
    r.time("duration", w.duration);
    r.count("max_amount", w.max_amount);
    r.finish();
}

template <class F>
void read_list(Reader& r, const std::string& key, F each) {
    const json* v = r.raw(key);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(r.where(key) + ": expected a list");
    for (std::size_t i = 0; i < v->size(); ++i) each(Reader((*v)[i], r.where(key) + "[" + std::to_string(i) + "]"));
}

void read_attack(Reader r, AttackPlan& a) {
    r.strategy("strategy", a.strategy);
    r.time("activation", a.activation);
    read_list(r, "planted", [&](Reader e) {
        PlantedShard p;
        e.count("ps", p.ps.value);
        e.count("count", p.count);
        e.strategy("strategy", p.strategy);
        e.time("activation", p.activation);
        e.flag("include_leader", p.include_leader);
        e.finish();
        a.planted.push_back(p);
    });
    read_list(r, "planted_fc_leaders", [&](Reader e) {
        PlantedFcLeaders p;
        e.count("fc", p.fc.value);
        e.count("count", p.count);
        e.strategy("strategy", p.strategy);
        e.time("activation", p.activation);
        e.finish();
        a.planted_fc_leaders.push_back(p);
    });
    r.finish();
}

void read_run(Reader r, SimConfig& s) {
    r.time("end_time", s.end_time);
    r.count("accounts_per_shard", s.accounts_per_shard);
    r.count("genesis_balance", s.genesis_balance);
    r.count("max_events", s.max_events);
    r.time("stagnation_threshold", s.stagnation_threshold);
    r.time("pending_horizon", s.pending_horizon);
    r.time("tps_bucket", s.tps_bucket);
    r.flag("keep_trace", s.keep_trace);
    r.finish();
}

void read_output(Reader r, ScenarioConfig& cfg) {
    std::string s;
    if (r.has("report")) {
        r.text("report", s);
        cfg.report_path = s;
    }
    if (r.has("trace")) {
        r.text("trace", s);
        cfg.trace_path = s;
    }
    r.finish();
}

}  // namespace

ScenarioConfig parse_scenario(const json& doc) {
    Reader r(doc, "");
    const json* version = r.raw("schema_version");
    if (!version) throw ConfigError("config: missing schema_version");
    if (!version->is_number_integer() || version->get<std::int64_t>() != kScenarioSchemaVersion)
        throw ConfigError("config: unsupported schema_version (expected " + std::to_string(kScenarioSchemaVersion) + ")");

    ScenarioConfig cfg;
    cfg.sim.params = secparams::EpochParams::make(64, 0.0, 32, 16);
    r.count("seed", cfg.sim.seed);
    if (auto c = r.child("epoch")) read_epoch(*c, cfg);
    if (auto c = r.child("protocol")) read_protocol(*c, cfg.sim.proto);
    if (auto c = r.child("network")) read_network(*c, cfg.sim.net);
    if (auto c = r.child("workload")) read_workload(*c, cfg.sim.workload);
    if (auto c = r.child("attack")) read_attack(*c, cfg.sim.attack);
    if (auto c = r.child("run")) read_run(*c, cfg.sim);
    if (auto c = r.child("output")) read_output(*c, cfg);
    r.finish();

    // Without an explicit duration the workload runs until the end of the run.
    auto& w = cfg.sim.workload;
    if (!(doc.contains("workload") && doc["workload"].contains("duration")))
        w.duration = std::max<SimTime>(0, cfg.sim.end_time - w.start);

    auto& p = cfg.sim.params;
    if (cfg.auto_ps_size) {
        if (p.fc_size == 0 || p.network_size % p.fc_size != 0) throw ConfigError("epoch: n must divide N");
        p.ps_size = secparams::solve_min_ps_size(p.network_size, p.malicious_fraction, p.fc_size, p.target_epsilon);
    }
    try {
        p.validate();
        cfg.sim.net.validate();
        cfg.sim.workload.validate();
    } catch (const secparams::NoFeasibleSize&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (cfg.sim.proto.block_capacity == 0) throw ConfigError("protocol.block_capacity: must be positive");
    if (cfg.sim.accounts_per_shard == 0) throw ConfigError("run.accounts_per_shard: must be positive");
    if (cfg.sim.tps_bucket <= 0) throw ConfigError("run.tps_bucket: must be positive");
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_scenario(doc);
}

json scenario_to_json(const ScenarioConfig& cfg) {
    const auto& s = cfg.sim;
    json planted = json::array();
    for (const auto& p : s.attack.planted)
        planted.push_back({{"ps", p.ps.value},
                           {"count", p.count},
                           {"strategy", to_string(p.strategy)},
                           {"activation", to_ticks(p.activation)},
                           {"include_leader", p.include_leader}});
    json fc_leaders = json::array();
    for (const auto& p : s.attack.planted_fc_leaders)
        fc_leaders.push_back({{"fc", p.fc.value},
                              {"count", p.count},
                              {"strategy", to_string(p.strategy)},
                              {"activation", to_ticks(p.activation)}});
    json out = {
        {"schema_version", kScenarioSchemaVersion},
        {"seed", s.seed},
        {"epoch",
         {{"N", s.params.network_size},
          {"f", s.params.malicious_fraction},
          {"n", s.params.fc_size},
          {"m", s.params.ps_size},
          {"epsilon", s.params.target_epsilon}}},
        {"protocol",
         {{"ps_base_timeout", to_ticks(s.proto.ps_base_timeout)},
          {"fc_base_timeout", to_ticks(s.proto.fc_base_timeout)},
          {"fc_interval", to_ticks(s.proto.fc_interval)},
          {"complaint_grace", to_ticks(s.proto.complaint_grace)},
          {"block_capacity", s.proto.block_capacity},
          {"pipelining", s.proto.pipelining},
          {"max_speculative_depth", s.proto.max_speculative_depth},
          {"max_backoff_exponent", s.proto.max_backoff_exponent}}},
        {"network",
         {{"gst", to_ticks(s.net.gst)},
          {"delta", to_ticks(s.net.delta)},
          {"d_min", to_ticks(s.net.d_min)},
          {"pre_gst_max", to_ticks(s.net.pre_gst_max)}}},
        {"workload",
         {{"rate", s.workload.rate},
          {"cross_shard_ratio", s.workload.cross_shard_ratio},
          {"start", to_ticks(s.workload.start)},
          {"duration", to_ticks(s.workload.duration)},
          {"max_amount", s.workload.max_amount}}},
        {"attack",
         {{"strategy", to_string(s.attack.strategy)},
          {"activation", to_ticks(s.attack.activation)},
          {"planted", planted},
          {"planted_fc_leaders", fc_leaders}}},
        {"run",
         {{"end_time", to_ticks(s.end_time)},
          {"accounts_per_shard", s.accounts_per_shard},
          {"genesis_balance", s.genesis_balance},
          {"max_events", s.max_events},
          {"stagnation_threshold", to_ticks(s.stagnation_threshold)},
          {"pending_horizon", to_ticks(s.pending_horizon)},
          {"tps_bucket", to_ticks(s.tps_bucket)},
          {"keep_trace", s.keep_trace}}},
    };
    json output = json::object();
    if (cfg.report_path) output["report"] = *cfg.report_path;
    if (cfg.trace_path) output["trace"] = *cfg.trace_path;
    out["output"] = output;
    return out;
}

double effective_malicious_fraction(const SimConfig& cfg) {
    const double f = cfg.params.malicious_fraction;
    if (!cfg.attack.is_planted()) return f;
    std::uint64_t planted = 0;
    for (const auto& p : cfg.attack.planted) planted += p.count;
    for (const auto& p : cfg.attack.planted_fc_leaders) planted += p.count;
    const double share = static_cast<double>(planted) / static_cast<double>(cfg.params.network_size);
    return std::max(f, std::min(1.0, share));
}

SafetyVerdict assess_safety(const SimConfig& cfg) {
    auto p = cfg.params;
    p.malicious_fraction = effective_malicious_fraction(cfg);
    SafetyVerdict v;
    v.epsilon = p.target_epsilon;
    v.bound = secparams::system_failure_upper(p);
    v.safe = v.bound <= v.epsilon;
    return v;
}

SafetyVerdict validate_scenario(const ScenarioConfig& cfg, bool unsafe) {
    try {
        cfg.sim.params.validate();
        const EpochRandomness rand{cfg.sim.seed, 0};
        (void)realize_plan(cfg.sim.attack, {}, derive_assignment(rand, cfg.sim.params), rand);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    const auto v = assess_safety(cfg.sim);
    if (!v.safe && !unsafe) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "failure bound %.3g exceeds epsilon %.3g; pass --unsafe to run anyway", v.bound,
                      v.epsilon);
        throw ConfigError(buf);
    }
    return v;
}

Report make_report(const ScenarioConfig& cfg, bool unsafe_flag, const SafetyVerdict& v, SimResult result) {
    return Report{scenario_to_json(cfg), unsafe_flag, v, std::move(result)};
}

json report_json(const Report& r) {
    const auto& m = r.result.metrics;
    json stagnation = json::array();
    for (const auto& s : m.stagnation) stagnation.push_back({{"begin", to_ticks(s.begin)}, {"end", to_ticks(s.end)}});
    json checks = json::array();
    for (const auto& c : r.result.checks)
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"violations", c.violations}, {"detail", c.detail}});
    return {
        {"schema_version", kScenarioSchemaVersion},
        {"seed", r.config.at("seed")},
        {"unsafe", r.unsafe_flag},
        {"config", r.config},
        {"safety", {{"bound", r.safety.bound}, {"epsilon", r.safety.epsilon}, {"within_epsilon", r.safety.safe}}},
        {"metrics",
         {{"issued_txs", m.issued_txs},
          {"confirmed_txs", m.confirmed_txs},
          {"confirmed_cross", m.confirmed_cross},
          {"tps", m.tps},
          {"tps_series", m.tps_series},
          {"latency", {{"mean", m.latency_mean}, {"p50", m.latency_p50}, {"p95", m.latency_p95}}},
          {"block_latency",
           {{"proposal", m.phase_proposal}, {"verification", m.phase_verification}, {"finalization", m.phase_finalization}}},
          {"finalized_ps_blocks", m.finalized_ps_blocks},
          {"ps_heights", m.ps_heights},
          {"fc_heights", m.fc_heights},
          {"ps_view_changes", m.ps_view_changes},
          {"fc_view_changes", m.fc_view_changes},
          {"longest_gap", to_ticks(m.longest_gap)},
          {"longest_ps_gap", to_ticks(m.longest_ps_gap)},
          {"stagnation", stagnation},
          {"events", m.events}}},
        {"checks", checks},
        {"all_checks_pass", r.result.all_pass()},
        {"trace_hash", r.result.trace_hash.hex()},
    };
}

std::string report_table(const Report& r) {
    const auto& m = r.result.metrics;
    const auto& e = r.config.at("epoch");
    std::ostringstream o;
    char buf[200];
    auto row = [&](const char* key, const std::string& value) {
        std::snprintf(buf, sizeof buf, "%-24s %s\n", key, value.c_str());
        o << buf;
    };
    auto num = [&](double x, const char* f = "%.3f") {
        std::snprintf(buf, sizeof buf, f, x);
        return std::string(buf);
    };
    auto join = [](const std::vector<std::uint64_t>& v) {
        std::string s;
        for (auto x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
        return s;
    };
    row("seed", std::to_string(r.config.at("seed").get<std::uint64_t>()));
    row("epoch", "N=" + e.at("N").dump() + " f=" + e.at("f").dump() + " n=" + e.at("n").dump() + " m=" + e.at("m").dump());
    row("failure bound", num(r.safety.bound, "%.3g") + (r.safety.safe ? " (within epsilon)" : " (exceeds epsilon)"));
    row("unsafe override", r.unsafe_flag ? "yes" : "no");
    row("issued txs", std::to_string(m.issued_txs));
    row("confirmed txs", std::to_string(m.confirmed_txs) + " (" + std::to_string(m.confirmed_cross) + " cross-shard)");
    row("tps", num(m.tps));
    row("tps series", join(m.tps_series));
    row("latency mean/p50/p95", num(m.latency_mean) + " / " + num(m.latency_p50) + " / " + num(m.latency_p95));
    row("block latency",
        "proposal " + num(m.phase_proposal) + ", verification " + num(m.phase_verification) + ", finalization " +
            num(m.phase_finalization));
    row("finalized PS blocks", std::to_string(m.finalized_ps_blocks));
    row("PS heights", join(m.ps_heights));
    row("FC heights", join(m.fc_heights));
    row("view changes", "PS " + std::to_string(m.ps_view_changes) + ", FC " + std::to_string(m.fc_view_changes));
    row("longest gap", num(to_ticks(m.longest_gap)) + " (per PS " + num(to_ticks(m.longest_ps_gap)) + ")");
    std::string stag;
    for (const auto& s : m.stagnation) stag += (stag.empty() ? "" : ", ") + num(to_ticks(s.begin), "%.2f") + "-" + num(to_ticks(s.end), "%.2f");
    row("stagnation intervals", stag.empty() ? "none" : stag);
    row("events", std::to_string(m.events));
    o << "checks\n";
    for (const auto& c : r.result.checks) {
        std::snprintf(buf, sizeof buf, "  %-30s %s", c.name.c_str(), c.pass ? "PASS" : "FAIL");
        o << buf;
        if (!c.pass) o << " (" << c.violations << (c.detail.empty() ? "" : ", " + c.detail) << ")";
        o << '\n';
    }
    row("trace hash", r.result.trace_hash.hex());
    return o.str();
}

}  // namespace dualchain
