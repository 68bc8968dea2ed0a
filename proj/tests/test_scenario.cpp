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

#include "dualchain/scenario.hpp"
#include "dualchain/secparams.hpp"
#include "fixtures.hpp"

namespace dualchain {
namespace {

using nlohmann::json;

json minimal() {
    return json{{"schema_version", 1},
                {"seed", 4},
                {"epoch", {{"N", 64}, {"f", 0.0}, {"n", 32}, {"m", 16}}},
                {"workload", {{"rate", 5}, {"cross_shard_ratio", 0.5}}},
                {"run", {{"end_time", 12}}}};
}

std::string error_of(const json& doc) {
    try {
        parse_scenario(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(Scenario, MinimalConfigFillsDefaults) {
    const auto cfg = parse_scenario(minimal());
    EXPECT_EQ(cfg.sim.seed, 4u);
    EXPECT_EQ(cfg.sim.params.ps_count(), 4u);
    EXPECT_EQ(cfg.sim.end_time, 12 * kTick);
    EXPECT_EQ(cfg.sim.workload.rate, 5.0);
    // Without a duration, arrivals continue to the end of the run.
    EXPECT_EQ(cfg.sim.workload.duration, 12 * kTick);
    EXPECT_EQ(cfg.sim.proto.block_capacity, ProtocolConfig{}.block_capacity);
    EXPECT_FALSE(cfg.report_path.has_value());
}

TEST(Scenario, FractionalTicksBecomeMicroTicks) {
    auto doc = minimal();
    doc["network"] = {{"delta", 0.5}, {"d_min", 0.125}, {"pre_gst_max", 3}};
    const auto cfg = parse_scenario(doc);
    EXPECT_EQ(cfg.sim.net.delta, kTick / 2);
    EXPECT_EQ(cfg.sim.net.d_min, kTick / 8);
}

TEST(Scenario, ResolvedConfigRoundTrips) {
    auto doc = minimal();
    doc["attack"] = {{"planted", {{{"ps", 1}, {"count", 3}, {"strategy", "Silent"}, {"include_leader", true}}}}};
    doc["output"] = {{"report", "r.json"}};
    const auto once = scenario_to_json(parse_scenario(doc));
    const auto twice = scenario_to_json(parse_scenario(once));
    EXPECT_EQ(once, twice);
    EXPECT_EQ(once["attack"]["planted"][0]["count"], 3);
}

TEST(Scenario, UnknownKeysAreRejectedWithTheirPath) {
    auto top = minimal();
    top["sed"] = 1;
    EXPECT_NE(error_of(top).find("sed"), std::string::npos);
    auto nested = minimal();
    nested["workload"]["rte"] = 1;
    EXPECT_NE(error_of(nested).find("workload.rte"), std::string::npos);
    auto planted = minimal();
    planted["attack"] = {{"planted", {{{"ps", 0}, {"count", 1}, {"leader", true}}}}};
    EXPECT_NE(error_of(planted).find("attack.planted[0].leader"), std::string::npos);
}

TEST(Scenario, SchemaVersionIsRequired) {
    auto none = minimal();
    none.erase("schema_version");
    EXPECT_NE(error_of(none), "");
    auto future = minimal();
    future["schema_version"] = 2;
    EXPECT_NE(error_of(future), "");
}

TEST(Scenario, TypeAndRangeErrors) {
    auto s = minimal();
    s["epoch"]["N"] = "64";
    EXPECT_NE(error_of(s), "");
    auto neg = minimal();
    neg["epoch"]["n"] = -32;
    EXPECT_NE(error_of(neg), "");
    auto indivisible = minimal();
    indivisible["epoch"]["m"] = 12;
    EXPECT_NE(error_of(indivisible), "");
    auto rate = minimal();
    rate["workload"]["cross_shard_ratio"] = 1.5;
    EXPECT_NE(error_of(rate), "");
    auto strategy = minimal();
    strategy["attack"] = {{"strategy", "Sneaky"}};
    EXPECT_NE(error_of(strategy), "");
    EXPECT_THROW(parse_scenario(json::array()), ConfigError);
}

TEST(Scenario, AutoPsSizeIsSolvedFromEpsilon) {
    auto doc = minimal();
    doc["epoch"] = {{"N", 640}, {"f", 0.25}, {"n", 320}, {"m", "auto"}};
    const auto cfg = parse_scenario(doc);
    EXPECT_TRUE(cfg.auto_ps_size);
    EXPECT_EQ(cfg.sim.params.ps_size, 80u);
    EXPECT_TRUE(assess_safety(cfg.sim).safe);
}

TEST(Scenario, InfeasibleAutoSizeReportsTheBestBound) {
    auto doc = minimal();
    doc["epoch"] = {{"N", 100}, {"f", 0.45}, {"n", 100}, {"m", "auto"}, {"epsilon", 1e-9}};
    try {
        parse_scenario(doc);
        FAIL() << "expected NoFeasibleSize";
    } catch (const secparams::NoFeasibleSize& e) {
        EXPECT_GT(e.best_bound, 1e-9);
    }
}

TEST(Scenario, UnsafeConfigsNeedTheOverride) {
    auto doc = minimal();
    doc["epoch"]["f"] = 0.25;
    const auto cfg = parse_scenario(doc);
    EXPECT_THROW(validate_scenario(cfg, false), ConfigError);
    const auto v = validate_scenario(cfg, true);
    EXPECT_FALSE(v.safe);
    EXPECT_GT(v.bound, v.epsilon);
}

TEST(Scenario, PlantedShareCountsTowardTheBound) {
    auto doc = minimal();
    doc["attack"] = {{"planted",
                      {{{"ps", 0}, {"count", 8}, {"strategy", "Silent"}},
                       {{"ps", 1}, {"count", 8}, {"strategy", "Silent"}}}}};
    const auto cfg = parse_scenario(doc);
    EXPECT_DOUBLE_EQ(effective_malicious_fraction(cfg.sim), 0.25);
    EXPECT_FALSE(assess_safety(cfg.sim).safe);
}

TEST(Scenario, ImpossiblePlanIsAConfigError) {
    auto doc = minimal();
    doc["attack"] = {{"planted", {{{"ps", 9}, {"count", 1}}}}};
    const auto cfg = parse_scenario(doc);
    EXPECT_THROW(validate_scenario(cfg, true), ConfigError);
}

TEST(Scenario, ReportGolden) {
    const auto cfg = parse_scenario(minimal());
    const auto v = validate_scenario(cfg, false);
    const auto report = make_report(cfg, false, v, simulate(cfg.sim));
    const auto doc = report_json(report);
    EXPECT_EQ(doc["unsafe"], false);
    EXPECT_EQ(doc["all_checks_pass"], true);
    EXPECT_EQ(doc["checks"].size(), report.result.checks.size());
    testing::expect_golden("report_minimal.json", doc.dump(2) + "\n");
    const std::string table = report_table(report);
    EXPECT_NE(table.find(report.result.trace_hash.hex()), std::string::npos);
}

}  // namespace
}  // namespace dualchain
