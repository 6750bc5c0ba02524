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

#ifndef ZSQL_CHECKPOINT_H_
#define ZSQL_CHECKPOINT_H_

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "zsql/config.h"
#include "zsql/model.h"

namespace zsql {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File layout:
//   "ZSQLCKPT" | u32 version | u32 header length | JSON header | buffers
// The header holds the run config, the vocabularies and, per parameter, its
// name, shape, trainable flag and byte offset. Buffers are row-major
// little-endian float32. Values are rounded to float32 on save, so
// save(load(f)) reproduces f byte for byte.
void SaveCheckpoint(const std::filesystem::path& path, const Model& model,
                    const RunConfig& config);

struct LoadedCheckpoint {
  RunConfig config;
  std::unique_ptr<Model> model;
};

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path);

// Rounds every parameter to the nearest float32, matching what a checkpoint
// stores.
void RoundToFloat(ParameterStore& params);

}  // namespace zsql

#endif  // ZSQL_CHECKPOINT_H_
