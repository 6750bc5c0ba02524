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

#include "zsql/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

namespace zsql {
namespace {

constexpr char kMagic[8] = {'Z', 'S', 'Q', 'L', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void WriteU32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

uint32_t ReadU32(std::istream& in) {
  uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw CheckpointError("truncated header");
  return v;
}

nlohmann::json VocabToJson(const ModelVocab& v) {
  nlohmann::json sketches = nlohmann::json::array();
  for (const auto& s : v.sketches.sketches()) sketches.push_back(s);
  return {{"pretrained_words", v.pretrained_words},
          {"trainable_words", v.trainable_words},
          {"agg_ops", v.ops.agg_names},
          {"cond_ops", v.ops.op_names},
          {"sketches", sketches}};
}

ModelVocab VocabFromJson(const nlohmann::json& j) {
  ModelVocab v;
  v.pretrained_words = j.at("pretrained_words").get<std::vector<std::string>>();
  v.trainable_words = j.at("trainable_words").get<std::vector<std::string>>();
  v.ops.agg_names = j.at("agg_ops").get<std::vector<std::string>>();
  v.ops.op_names = j.at("cond_ops").get<std::vector<std::string>>();
  v.sketches = SketchVocabulary(j.at("sketches").get<std::vector<Sketch>>());
  return v;
}

}  // namespace

void RoundToFloat(ParameterStore& params) {
  for (size_t i = 0; i < params.size(); ++i) {
    auto& m = params[i].value;
    m = m.unaryExpr([](double x) { return static_cast<double>(static_cast<float>(x)); });
  }
}

void SaveCheckpoint(const std::filesystem::path& path, const Model& model,
                    const RunConfig& config) {
  const auto& params = model.params();
  nlohmann::json entries = nlohmann::json::array();
  uint64_t offset = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    entries.push_back({{"name", p.name},
                       {"rows", p.value.rows()},
                       {"cols", p.value.cols()},
                       {"trainable", p.trainable},
                       {"offset", offset}});
    offset += static_cast<uint64_t>(p.value.size()) * sizeof(float);
  }
  RunConfig resolved = config;
  resolved.model = model.config();
  const nlohmann::json header = {{"config", ConfigToJson(resolved)},
                                 {"vocab", VocabToJson(model.vocab())},
                                 {"params", entries}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  WriteU32(out, kVersion);
  WriteU32(out, static_cast<uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  std::vector<float> buf;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& m = params[i].value;
    buf.resize(static_cast<size_t>(m.size()));
    size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) buf[k++] = static_cast<float>(m(r, c));
    }
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw CheckpointError("write failed for " + path.string());
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  if (const uint32_t v = ReadU32(in); v != kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(v));
  }
  std::string text(ReadU32(in), '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(text.size()))) {
    throw CheckpointError("truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }

  LoadedCheckpoint result;
  ParameterStore store;
  try {
    result.config = ConfigFromJson(header.at("config"));
    ModelVocab vocab = VocabFromJson(header.at("vocab"));
    const std::streamoff base = in.tellg();
    std::vector<float> buf;
    for (const auto& e : header.at("params")) {
      auto& p = store.Create(e.at("name").get<std::string>(), e.at("rows").get<Eigen::Index>(),
                             e.at("cols").get<Eigen::Index>(), e.at("trainable").get<bool>());
      buf.resize(static_cast<size_t>(p.value.size()));
      in.seekg(base + static_cast<std::streamoff>(e.at("offset").get<uint64_t>()));
      if (!in.read(reinterpret_cast<char*>(buf.data()),
                   static_cast<std::streamsize>(buf.size() * sizeof(float)))) {
        throw CheckpointError("truncated buffer for " + p.name);
      }
      size_t k = 0;
      for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
        for (Eigen::Index c = 0; c < p.value.cols(); ++c) p.value(r, c) = buf[k++];
      }
    }
    result.model = std::make_unique<Model>(result.config.model, std::move(vocab),
                                           std::move(store));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint header: ") + e.what());
  }
  return result;
}

}  // namespace zsql
