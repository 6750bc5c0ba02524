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

#include "zsql/config.h"

#include <charconv>
#include <fstream>
#include <stdexcept>

namespace zsql {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
}

}  // namespace

void SetConfigValue(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = Trim(raw);
  auto& m = c.model;
  auto& t = c.train;
  if (key == "embedding_dim") m.embedding_dim = ParseNumber<int>(key, value);
  else if (key == "lstm_hidden") m.lstm_hidden = ParseNumber<int>(key, value);
  else if (key == "attention_dim") m.attention_dim = ParseNumber<int>(key, value);
  else if (key == "dropout") m.dropout = ParseNumber<double>(key, value);
  else if (key == "share_encoder") m.share_encoder = ParseBool(key, value);
  else if (key == "decoder_keys_raw") m.decoder_keys_raw = ParseBool(key, value);
  else if (key == "init_scale") m.init_scale = ParseNumber<double>(key, value);
  else if (key == "lambda") t.lambda = ParseNumber<double>(key, value);
  else if (key == "learning_rate") t.learning_rate = ParseNumber<double>(key, value);
  else if (key == "clip_norm") t.clip_norm = ParseNumber<double>(key, value);
  else if (key == "weight_decay") t.weight_decay = ParseNumber<double>(key, value);
  else if (key == "batch_size") t.batch_size = ParseNumber<int>(key, value);
  else if (key == "max_epochs") t.max_epochs = ParseNumber<int>(key, value);
  else if (key == "patience") t.patience = ParseNumber<int>(key, value);
  else if (key == "seed") t.seed = ParseNumber<uint64_t>(key, value);
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

RunConfig LoadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    SetConfigValue(config, Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  config.model.Validate();
  config.train.Validate();
  return config;
}

nlohmann::json ModelConfigToJson(const ModelConfig& m) {
  return {{"embedding_dim", m.embedding_dim}, {"lstm_hidden", m.lstm_hidden},
          {"attention_dim", m.attention_dim}, {"dropout", m.dropout},
          {"share_encoder", m.share_encoder}, {"decoder_keys_raw", m.decoder_keys_raw},
          {"init_scale", m.init_scale}};
}

ModelConfig ModelConfigFromJson(const nlohmann::json& j) {
  ModelConfig m;
  m.embedding_dim = j.at("embedding_dim").get<int>();
  m.lstm_hidden = j.at("lstm_hidden").get<int>();
  m.attention_dim = j.at("attention_dim").get<int>();
  m.dropout = j.at("dropout").get<double>();
  m.share_encoder = j.at("share_encoder").get<bool>();
  m.decoder_keys_raw = j.at("decoder_keys_raw").get<bool>();
  m.init_scale = j.at("init_scale").get<double>();
  return m;
}

nlohmann::json ConfigToJson(const RunConfig& c) {
  const auto& t = c.train;
  nlohmann::json j = ModelConfigToJson(c.model);
  j["lambda"] = t.lambda;
  j["learning_rate"] = t.learning_rate;
  j["clip_norm"] = t.clip_norm;
  j["weight_decay"] = t.weight_decay;
  j["batch_size"] = t.batch_size;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience;
  j["seed"] = t.seed;
  return j;
}

RunConfig ConfigFromJson(const nlohmann::json& j) {
  RunConfig c;
  c.model = ModelConfigFromJson(j);
  auto& t = c.train;
  t.lambda = j.at("lambda").get<double>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.clip_norm = j.at("clip_norm").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.batch_size = j.at("batch_size").get<int>();
  t.max_epochs = j.at("max_epochs").get<int>();
  t.patience = j.at("patience").get<int>();
  t.seed = j.at("seed").get<uint64_t>();
  return c;
}

}  // namespace zsql
