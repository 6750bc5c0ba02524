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

#ifndef ZSQL_MANIFEST_H_
#define ZSQL_MANIFEST_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace zsql {

// Lowercase hex SHA-256 of a file's bytes.
std::string Sha256File(const std::filesystem::path& path);

// Provenance record written next to every command's outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void SetConfig(nlohmann::json config) { config_ = std::move(config); }
  void SetSeed(uint64_t seed) { seed_ = seed; }
  void AddInput(const std::string& role, const std::filesystem::path& path);
  void AddOutput(const std::string& role, const std::filesystem::path& path);

  // Stamps the elapsed time and writes the JSON document.
  void Write(const std::filesystem::path& path) const;
  nlohmann::json ToJson() const;

 private:
  std::string command_;
  nlohmann::json config_ = nlohmann::json::object();
  uint64_t seed_ = 0;
  nlohmann::json inputs_ = nlohmann::json::array();
  nlohmann::json outputs_ = nlohmann::json::array();
  std::chrono::steady_clock::time_point start_;
};

}  // namespace zsql

#endif  // ZSQL_MANIFEST_H_
