/*
 * Copyright 2026 The FedSim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDSIM_TOOLS_CONFIG_IO_H_
#define FEDSIM_TOOLS_CONFIG_IO_H_

#include <filesystem>
#include <string>

#include "fedsim/experiment.h"
#include "fedsim/json_io.h"

namespace fedsim::cli {

inline constexpr int kSchemaVersion = 1;

Json dataset_to_json(const DatasetSpec& spec);
DatasetSpec dataset_from_json(const ObjectReader& reader);

// Every key is optional and defaults to the FederationConfig default; unknown
// keys and type mismatches are rejected with the offending key path.
Json config_to_json(const FederationConfig& cfg);
FederationConfig config_from_json(const Json& doc, const std::string& path = "");
FederationConfig load_config(const std::filesystem::path& path);

Json scenario_to_json(const ScenarioConfig& scenario);
ScenarioConfig scenario_from_json(const Json& doc);
ScenarioConfig load_scenario(const std::filesystem::path& path);

StrategyKind strategy_from_string(const ObjectReader& reader, std::string_view key,
                                  const std::string& name);

}  // namespace fedsim::cli

#endif  // FEDSIM_TOOLS_CONFIG_IO_H_
