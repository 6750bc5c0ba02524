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

#ifndef ZSQL_LABELS_H_
#define ZSQL_LABELS_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsql/dataset.h"

namespace zsql {

// Token tags of the mapping task.
enum class Tag : int { kO = 0, kBc = 1, kIc = 2, kBv = 3, kIv = 4 };
inline constexpr int kTagCount = 5;

std::string_view TagName(Tag tag);
Tag TagFromName(std::string_view name);

inline bool IsValueTag(Tag t) { return t == Tag::kBv || t == Tag::kIv; }

// No I_v without a preceding B_v/I_v, likewise for I_c.
bool IsWellFormed(std::span<const Tag> tags);

using Sketch = std::vector<int>;  // condition operator ids in order

Sketch DeriveSketch(const SQLQuery& query);

class SketchVocabulary {
 public:
  SketchVocabulary() = default;
  // Sorted by length, then lexicographically by operator id.
  explicit SketchVocabulary(std::vector<Sketch> sketches);

  int size() const { return static_cast<int>(sketches_.size()); }
  const Sketch& at(int id) const { return sketches_.at(id); }
  const std::vector<Sketch>& sketches() const { return sketches_; }
  // Class id, or nullopt for a sketch never seen in training.
  std::optional<int> Find(const Sketch& sketch) const;

 private:
  std::vector<Sketch> sketches_;
  std::map<Sketch, int> index_;
};

SketchVocabulary BuildSketchVocabulary(const std::vector<Example>& train);

struct Span {
  int left = 0;   // inclusive
  int right = 0;  // inclusive

  bool operator==(const Span&) const = default;
};

// Leftmost token interval equal to the tokenized target; nullopt if absent.
std::optional<Span> LocateSpan(std::span<const std::string> question_tokens,
                               std::string_view target_text);

struct SupervisionLabels {
  int sketch_id = 0;
  std::vector<Tag> tags;
  std::vector<Span> value_spans;  // one per condition, in condition order
  // Gold column for each B_v/I_v token, -1 elsewhere.
  std::vector<int> mapping_targets;

  int value_token_count() const;
};

struct LabelResult {
  std::optional<SupervisionLabels> labels;  // empty when skipped
  std::string skip_reason;

  bool skipped() const { return !labels.has_value(); }
};

LabelResult DeriveLabels(const Example& example, const SketchVocabulary& vocab);

// One record of the derive-labels output file.
nlohmann::json LabelRecordToJson(size_t index, const LabelResult& result);

}  // namespace zsql

#endif  // ZSQL_LABELS_H_
