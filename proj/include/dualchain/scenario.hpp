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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "dualchain/simnet.hpp"

namespace dualchain {

inline constexpr int kScenarioSchemaVersion = 1;

/// Config rejected before any run.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A run request: the simulator config plus epoch sizing inputs and outputs.
struct ScenarioConfig {
    SimConfig sim;
    /// PS size solved from epsilon when the config says "auto".
    bool auto_ps_size = false;
    std::optional<std::string> report_path;
    std::optional<std::string> trace_path;
};

/// Parses a schema-versioned JSON document. Unknown keys are errors; times are
/// in ticks. Fills defaults and resolves an "auto" PS size.
ScenarioConfig parse_scenario(const nlohmann::json& doc);
ScenarioConfig load_scenario(const std::string& path);

/// The fully resolved config, suitable for parse_scenario.
nlohmann::json scenario_to_json(const ScenarioConfig& cfg);

/// Malicious fraction used for the safety bound: the sampled fraction or the
/// planted share, whichever is larger.
double effective_malicious_fraction(const SimConfig& cfg);

struct SafetyVerdict {
    double bound = 0.0;
    double epsilon = 0.0;
    bool safe = true;
};
SafetyVerdict assess_safety(const SimConfig& cfg);

/// Throws ConfigError for structurally invalid configs, and for unsafe ones
/// unless `unsafe` is set.
SafetyVerdict validate_scenario(const ScenarioConfig& cfg, bool unsafe);

struct Report {
    nlohmann::json config;
    bool unsafe_flag = false;
    SafetyVerdict safety;
    SimResult result;
};

Report make_report(const ScenarioConfig& cfg, bool unsafe_flag, const SafetyVerdict& v, SimResult result);
nlohmann::json report_json(const Report& r);
std::string report_table(const Report& r);

}  // namespace dualchain
