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

#include <doctest.h>

#include <random>

#include "zsql/labels.h"
#include "zsql/text.h"

namespace zsql {
namespace {

Example Make(const std::string& question, const std::vector<std::string>& headers,
             std::vector<Condition> conds, int sel = 0) {
  Example e;
  e.question = question;
  e.question_tokens = Tokenize(question);
  e.schema = MakeSchema("t", headers);
  e.gold.sel = sel;
  e.gold.conditions = std::move(conds);
  return e;
}

// Every interval, scanned left to right; the first match wins.
std::optional<Span> BruteForceSpan(const std::vector<std::string>& tokens,
                                   const std::string& target) {
  const std::string want = NormalizeText(target);
  for (int l = 0; l < static_cast<int>(tokens.size()); ++l) {
    for (int r = l; r < static_cast<int>(tokens.size()); ++r) {
      std::vector<std::string> piece(tokens.begin() + l, tokens.begin() + r + 1);
      if (Join(piece) == want) return Span{l, r};
    }
  }
  return std::nullopt;
}

TEST_CASE("derive_sketch") {
  SQLQuery q;
  q.conditions = {{0, 0, "a"}, {1, 1, "b"}};
  CHECK(DeriveSketch(q) == Sketch{0, 1});
  CHECK(DeriveSketch(SQLQuery{}).empty());
  q.conditions = {{2, 0, "x"}, {0, 0, "y"}, {1, 2, "z"}};
  CHECK(DeriveSketch(q) == Sketch{0, 0, 2});

  // Columns and values do not matter.
  SQLQuery r = q;
  r.conditions[0].column = 5;
  r.conditions[1].value = "other";
  CHECK(DeriveSketch(r) == DeriveSketch(q));
}

TEST_CASE("build_sketch_vocabulary") {
  auto e0 = Make("a", {"x"}, {});
  auto e1 = Make("a b", {"x", "y"}, {{0, 0, "a"}});
  auto e2 = Make("a b", {"x", "y"}, {{0, 0, "a"}, {1, 1, "b"}});
  const auto vocab = BuildSketchVocabulary({e2, e1, e0, e1});
  CHECK(vocab.size() == 3);
  CHECK(vocab.at(0).empty());
  CHECK(vocab.at(1) == Sketch{0});
  CHECK(vocab.at(2) == Sketch{0, 1});
  CHECK(vocab.Find(Sketch{0, 1}) == 2);
  CHECK_FALSE(vocab.Find(Sketch{2}));

  CHECK(BuildSketchVocabulary({e1, e1}).size() == 1);
}

TEST_CASE("locate_span") {
  const auto q = Tokenize("what 's in third place that 's going 1-0 ?");
  CHECK(LocateSpan(q, "1-0") == Span{8, 8});
  CHECK(LocateSpan(q, "what 's in third place that 's going 1-0 ?") ==
        Span{0, static_cast<int>(q.size()) - 1});
  CHECK_FALSE(LocateSpan(q, "2-0"));

  const auto dup = Tokenize("red team or red team");
  CHECK(LocateSpan(dup, "Red Team") == Span{0, 1});
}

TEST_CASE("locate_span agrees with an exhaustive interval scan") {
  std::mt19937 gen(3);
  const std::vector<std::string> words{"a", "b", "c", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> tokens(1 + gen() % 8);
    for (auto& t : tokens) t = words[gen() % words.size()];
    std::string target;
    const int len = 1 + gen() % 3;
    for (int k = 0; k < len; ++k) target += (k ? " " : "") + words[gen() % words.size()];
    CHECK(LocateSpan(tokens, target) == BruteForceSpan(tokens, target));
  }
}

TEST_CASE("derive_labels single value token") {
  auto e = Make("which team is from paris ?", {"team", "city"}, {{1, 0, "Paris"}});
  const auto vocab = BuildSketchVocabulary({e});
  const auto r = DeriveLabels(e, vocab);
  REQUIRE_FALSE(r.skipped());
  const auto& l = *r.labels;
  CHECK(l.tags[4] == Tag::kBv);
  CHECK(l.value_token_count() == 1);
  CHECK(l.mapping_targets[4] == 1);
  for (size_t i = 0; i < l.tags.size(); ++i) {
    if (i != 4) CHECK(l.mapping_targets[i] == -1);
  }
  // The select column name is not tagged.
  CHECK(l.tags[1] == Tag::kO);
}

TEST_CASE("derive_labels zero conditions") {
  auto e = Make("list every team", {"team"}, {});
  const auto r = DeriveLabels(e, BuildSketchVocabulary({e}));
  REQUIRE_FALSE(r.skipped());
  for (Tag t : r.labels->tags) CHECK(t == Tag::kO);
  CHECK(r.labels->value_spans.empty());
  CHECK(r.labels->value_token_count() == 0);
}

TEST_CASE("derive_labels two-condition drama example") {
  auto e = Make("what drama role does she play in 1973 ?", {"year", "title", "role", "genre"},
                {{3, 0, "drama"}, {0, 0, "1973"}}, 2);
  const auto r = DeriveLabels(e, BuildSketchVocabulary({e}));
  REQUIRE_FALSE(r.skipped());
  const auto& l = *r.labels;
  CHECK(l.tags[1] == Tag::kBv);
  CHECK(l.mapping_targets[1] == 3);
  CHECK(l.tags[7] == Tag::kBv);
  CHECK(l.mapping_targets[7] == 0);
  CHECK(l.value_spans == std::vector<Span>{{1, 1}, {7, 7}});
}

TEST_CASE("derive_labels column names and multi-token values") {
  auto e = Make("what is the score when home team is new york city ?",
                {"score", "home team"}, {{1, 0, "New York City"}});
  const auto r = DeriveLabels(e, BuildSketchVocabulary({e}));
  REQUIRE_FALSE(r.skipped());
  const auto& t = r.labels->tags;
  CHECK(t[5] == Tag::kBc);
  CHECK(t[6] == Tag::kIc);
  CHECK(t[8] == Tag::kBv);
  CHECK(t[9] == Tag::kIv);
  CHECK(t[10] == Tag::kIv);
  CHECK(IsWellFormed(t));
}

TEST_CASE("value tags win over column-name tags") {
  auto e = Make("games in the city of city", {"games", "city"}, {{1, 0, "city"}});
  const auto r = DeriveLabels(e, BuildSketchVocabulary({e}));
  REQUIRE_FALSE(r.skipped());
  const auto& t = r.labels->tags;
  CHECK(t[3] == Tag::kBv);
  CHECK(t[5] == Tag::kBc);
}

TEST_CASE("derive_labels skips") {
  auto e = Make("who won ?", {"winner", "year"}, {{1, 0, "1999"}});
  auto r = DeriveLabels(e, BuildSketchVocabulary({e}));
  CHECK(r.skipped());
  CHECK(r.skip_reason == "value_not_found:0");
  CHECK(LabelRecordToJson(4, r)["reason"] == "value_not_found:0");

  auto unseen = Make("who won in 1999", {"winner", "year"}, {{1, 1, "1999"}});
  r = DeriveLabels(unseen, BuildSketchVocabulary({Make("x", {"winner"}, {})}));
  CHECK(r.skip_reason == "unknown_sketch");
}

TEST_CASE("label record fields") {
  auto e = Make("team from paris", {"team", "city"}, {{1, 0, "paris"}});
  const auto j = LabelRecordToJson(0, DeriveLabels(e, BuildSketchVocabulary({e})));
  CHECK(j["skip"] == false);
  CHECK(j["tags"] == nlohmann::json::array({"O", "O", "B_v"}));
  CHECK(j["value_spans"] == nlohmann::json::array({nlohmann::json::array({2, 2})}));
  CHECK(j["mapping_targets"] == nlohmann::json::array({-1, -1, 1}));
  CHECK(j["sketch_id"] == 0);
}

TEST_CASE("tag well-formedness") {
  using enum Tag;
  CHECK(IsWellFormed(std::vector<Tag>{kO, kBv, kIv, kIv, kBc, kIc}));
  CHECK_FALSE(IsWellFormed(std::vector<Tag>{kO, kIv}));
  CHECK_FALSE(IsWellFormed(std::vector<Tag>{kBc, kIv}));
  CHECK_FALSE(IsWellFormed(std::vector<Tag>{kIc}));
  for (int i = 0; i < kTagCount; ++i) {
    CHECK(TagFromName(TagName(static_cast<Tag>(i))) == static_cast<Tag>(i));
  }
}

TEST_CASE("round trip on random templated examples") {
  std::mt19937 gen(5);
  const std::vector<std::string> words{"red", "blue", "lima", "oslo", "1986", "new", "york"};
  std::vector<Example> examples;
  for (int trial = 0; trial < 200; ++trial) {
    std::string q = "show the name";
    std::vector<Condition> conds;
    const int n = gen() % 3;
    for (int c = 0; c < n; ++c) {
      std::string value = words[gen() % words.size()];
      if (gen() % 2) value += " " + words[gen() % words.size()];
      q += " where col" + std::to_string(c) + " is " + value;
      conds.push_back({c + 1, static_cast<int>(gen() % 3), value});
    }
    examples.push_back(Make(q, {"name", "col0", "col1"}, conds));
  }
  const auto vocab = BuildSketchVocabulary(examples);
  for (const auto& e : examples) {
    const auto r = DeriveLabels(e, vocab);
    if (r.skipped()) continue;
    const auto& l = *r.labels;
    CHECK(IsWellFormed(l.tags));
    CHECK(vocab.Find(DeriveSketch(e.gold)) == l.sketch_id);
    for (size_t c = 0; c < l.value_spans.size(); ++c) {
      const auto s = l.value_spans[c];
      std::vector<std::string> piece(e.question_tokens.begin() + s.left,
                                     e.question_tokens.begin() + s.right + 1);
      CHECK(Join(piece) == NormalizeText(e.gold.conditions[c].value));
      CHECK(l.tags[s.left] == Tag::kBv);
      for (int p = s.left; p <= s.right; ++p) {
        CHECK(l.mapping_targets[p] == e.gold.conditions[c].column);
      }
    }
    for (size_t i = 0; i < l.tags.size(); ++i) {
      CHECK((l.mapping_targets[i] >= 0) == IsValueTag(l.tags[i]));
    }
  }
}

}  // namespace
}  // namespace zsql
