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

#include "zsql/labels.h"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "zsql/text.h"

namespace zsql {

std::string_view TagName(Tag tag) {
  switch (tag) {
    case Tag::kO: return "O";
    case Tag::kBc: return "B_c";
    case Tag::kIc: return "I_c";
    case Tag::kBv: return "B_v";
    case Tag::kIv: return "I_v";
  }
  return "?";
}

Tag TagFromName(std::string_view name) {
  for (int i = 0; i < kTagCount; ++i) {
    if (TagName(static_cast<Tag>(i)) == name) return static_cast<Tag>(i);
  }
  throw std::invalid_argument("unknown tag '" + std::string(name) + "'");
}

bool IsWellFormed(std::span<const Tag> tags) {
  Tag prev = Tag::kO;
  for (Tag t : tags) {
    if (t == Tag::kIv && prev != Tag::kBv && prev != Tag::kIv) return false;
    if (t == Tag::kIc && prev != Tag::kBc && prev != Tag::kIc) return false;
    prev = t;
  }
  return true;
}

Sketch DeriveSketch(const SQLQuery& query) {
  Sketch s;
  s.reserve(query.conditions.size());
  for (const auto& c : query.conditions) s.push_back(c.op);
  return s;
}

SketchVocabulary::SketchVocabulary(std::vector<Sketch> sketches) {
  std::sort(sketches.begin(), sketches.end(), [](const Sketch& a, const Sketch& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  sketches.erase(std::unique(sketches.begin(), sketches.end()), sketches.end());
  sketches_ = std::move(sketches);
  for (size_t i = 0; i < sketches_.size(); ++i) {
    index_.emplace(sketches_[i], static_cast<int>(i));
  }
}

std::optional<int> SketchVocabulary::Find(const Sketch& sketch) const {
  auto it = index_.find(sketch);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SketchVocabulary BuildSketchVocabulary(const std::vector<Example>& train) {
  std::set<Sketch> seen;
  for (const auto& e : train) seen.insert(DeriveSketch(e.gold));
  return SketchVocabulary({seen.begin(), seen.end()});
}

namespace {

// Leftmost occurrence of `needle` in `hay` whose positions are all free.
std::optional<Span> FindFree(std::span<const std::string> hay,
                             std::span<const std::string> needle,
                             const std::vector<Tag>* taken) {
  if (needle.empty() || needle.size() > hay.size()) return std::nullopt;
  for (size_t l = 0; l + needle.size() <= hay.size(); ++l) {
    bool match = true;
    for (size_t k = 0; k < needle.size() && match; ++k) {
      match = hay[l + k] == needle[k];
      if (match && taken != nullptr && (*taken)[l + k] != Tag::kO) match = false;
    }
    if (match) {
      return Span{static_cast<int>(l), static_cast<int>(l + needle.size() - 1)};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Span> LocateSpan(std::span<const std::string> question_tokens,
                               std::string_view target_text) {
  const auto target = Tokenize(target_text);
  return FindFree(question_tokens, target, nullptr);
}

int SupervisionLabels::value_token_count() const {
  return static_cast<int>(std::count_if(tags.begin(), tags.end(), IsValueTag));
}

LabelResult DeriveLabels(const Example& example, const SketchVocabulary& vocab) {
  LabelResult result;
  const auto sketch_id = vocab.Find(DeriveSketch(example.gold));
  if (!sketch_id) {
    result.skip_reason = "unknown_sketch";
    return result;
  }
  const auto& tokens = example.question_tokens;
  SupervisionLabels labels;
  labels.sketch_id = *sketch_id;
  labels.tags.assign(tokens.size(), Tag::kO);
  labels.mapping_targets.assign(tokens.size(), -1);

  const auto& conds = example.gold.conditions;
  for (size_t ci = 0; ci < conds.size(); ++ci) {
    const auto target = Tokenize(conds[ci].value);
    if (target.empty() || !FindFree(tokens, target, nullptr)) {
      result.skip_reason = "value_not_found:" + std::to_string(ci);
      return result;
    }
    const auto span = FindFree(tokens, target, &labels.tags);
    if (!span) {
      result.skip_reason = "value_span_conflict:" + std::to_string(ci);
      return result;
    }
    for (int p = span->left; p <= span->right; ++p) {
      labels.tags[p] = p == span->left ? Tag::kBv : Tag::kIv;
      labels.mapping_targets[p] = conds[ci].column;
    }
    labels.value_spans.push_back(*span);
  }
  // Condition column names, only where no value tag sits.
  for (const auto& c : conds) {
    const auto& name = example.schema.column_names.at(c.column);
    const auto span = FindFree(tokens, name, &labels.tags);
    if (!span) continue;
    for (int p = span->left; p <= span->right; ++p) {
      labels.tags[p] = p == span->left ? Tag::kBc : Tag::kIc;
    }
  }
  result.labels = std::move(labels);
  return result;
}

nlohmann::json LabelRecordToJson(size_t index, const LabelResult& result) {
  nlohmann::json j;
  j["index"] = index;
  j["skip"] = result.skipped();
  if (result.skipped()) {
    j["reason"] = result.skip_reason;
    return j;
  }
  const auto& l = *result.labels;
  j["sketch_id"] = l.sketch_id;
  auto tags = nlohmann::json::array();
  for (Tag t : l.tags) tags.push_back(std::string(TagName(t)));
  j["tags"] = tags;
  auto spans = nlohmann::json::array();
  for (const auto& s : l.value_spans) spans.push_back({s.left, s.right});
  j["value_spans"] = spans;
  j["mapping_targets"] = l.mapping_targets;
  return j;
}

}  // namespace zsql
