// Copyright 2026 The zsql Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ZSQL_CONFIG_H_
#define ZSQL_CONFIG_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "zsql/model.h"
#include "zsql/training.h"

namespace zsql {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

// Sets one field by key (e.g. "lstm_hidden", "lambda"). Throws
// std::invalid_argument for unknown keys or unparsable values.
void SetConfigValue(RunConfig& config, const std::string& key, const std::string& value);

// "key = value" lines; '#' starts a comment.
RunConfig LoadConfigFile(const std::filesystem::path& path);

nlohmann::json ConfigToJson(const RunConfig& config);
RunConfig ConfigFromJson(const nlohmann::json& j);

nlohmann::json ModelConfigToJson(const ModelConfig& config);
ModelConfig ModelConfigFromJson(const nlohmann::json& j);

}  // namespace zsql

#endif  // ZSQL_CONFIG_H_
