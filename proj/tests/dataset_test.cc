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

#include <algorithm>
#include <random>

#include "support/synthetic.h"
#include "zsql/dataset.h"
#include "zsql/text.h"

namespace zsql {
namespace {

using testing::MakeTempDir;
using testing::WriteLines;

Example WithSchema(const std::vector<std::string>& headers, const std::string& id = "x") {
  Example e;
  e.question = "q";
  e.question_tokens = {"q"};
  e.schema = MakeSchema(id, headers);
  return e;
}

TEST_CASE("tokenize separates punctuation and lowercases") {
  CHECK(Tokenize("What's in 3rd Place, going 1-0?") ==
        std::vector<std::string>{"what's", "in", "3rd", "place", ",", "going", "1-0", "?"});
  CHECK(Tokenize("  ") .empty());
  CHECK(Tokenize("Ends with a period.") ==
        std::vector<std::string>{"ends", "with", "a", "period", "."});
  CHECK(Tokenize("value 3.5") == std::vector<std::string>{"value", "3.5"});
  CHECK(Tokenize("(hello)") == std::vector<std::string>{"(", "hello", ")"});
}

TEST_CASE("real parsing") {
  CHECK(ParseReal("1,986").value() == 1986.0);
  CHECK(ParseReal(" 2.5 ").value() == 2.5);
  CHECK(ParseReal("+3").value() == 3.0);
  CHECK_FALSE(ParseReal("1-0"));
  CHECK_FALSE(ParseReal("abc"));
  CHECK_FALSE(ParseReal(""));
  CHECK(FormatReal(1973.0) == "1973");
  CHECK(FormatReal(2.5) == "2.5");
}

TEST_CASE("load_tables reads a six-column header") {
  auto dir = MakeTempDir("tables");
  auto path = WriteLines(
      dir / "t.jsonl",
      {R"({"id":"1-10","header":["Year","Winners","Score","Runners Up","Venue","3rd Place"],)"
       R"("types":["real","text","text","text","text","text"],"rows":[[1986,"a","1-0","b","c","d"]]})"});
  const auto tables = LoadTables(path);
  REQUIRE(tables.size() == 1);
  const auto& t = tables.at("1-10");
  CHECK(t.schema.column_count() == 6);
  CHECK(t.schema.column_names[5] == std::vector<std::string>{"3rd", "place"});
  CHECK(t.content.rows.size() == 1);
}

TEST_CASE("load_tables edge cases") {
  auto dir = MakeTempDir("tables2");
  CHECK(LoadTables(WriteLines(dir / "empty.jsonl", {})).empty());

  auto twins = WriteLines(dir / "twins.jsonl",
                          {R"({"id":"a","header":["Name","Age"],"types":[],"rows":[]})",
                           R"({"id":"b","header":["name","  age "],"types":[],"rows":[]})"});
  const auto t = LoadTables(twins);
  REQUIRE(t.size() == 2);
  CHECK(t.at("a").schema.schema_key == t.at("b").schema.schema_key);

  auto dup = WriteLines(dir / "dup.jsonl",
                        {R"({"id":"a","header":["x"],"rows":[]})",
                         R"({"id":"a","header":["y"],"rows":[]})"});
  CHECK_THROWS_AS(LoadTables(dup), DataError);

  auto wide = WriteLines(dir / "wide.jsonl",
                         {R"({"id":"a","header":["x","y"],"rows":[["1","2"],["1"]]})"});
  try {
    LoadTables(wide);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("load_examples") {
  auto dir = MakeTempDir("examples");
  auto tables_path = WriteLines(dir / "t.jsonl", {R"({"id":"a","header":["x","y"],"rows":[]})"});
  const auto tables = LoadTables(tables_path);

  CHECK(LoadExamples(WriteLines(dir / "e0.jsonl", {}), tables).empty());

  auto three = WriteLines(
      dir / "e3.jsonl",
      {R"({"table_id":"a","question":"first one","sql":{"sel":0,"agg":0,"conds":[]}})",
       R"({"table_id":"a","question":"second","sql":{"sel":1,"agg":3,"conds":[[0,0,"v"]]}})",
       R"({"table_id":"a","question":"third","sql":{"sel":0,"agg":0,"conds":[[1,1,5]]}})"});
  const auto ex = LoadExamples(three, tables);
  REQUIRE(ex.size() == 3);
  CHECK(ex[0].question_tokens == std::vector<std::string>{"first", "one"});
  CHECK(ex[1].gold.agg == 3);
  CHECK(ex[2].gold.conditions[0].value == "5");

  auto missing = WriteLines(
      dir / "bad.jsonl",
      {R"({"table_id":"a","question":"ok","sql":{"sel":0,"agg":0,"conds":[]}})",
       R"({"table_id":"a","question":"no sel","sql":{"agg":0,"conds":[]}})"});
  try {
    LoadExamples(missing, tables);
    FAIL("expected an error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("record 1") != std::string::npos);
    CHECK(msg.find("sql.sel") != std::string::npos);
  }

  auto unknown = WriteLines(
      dir / "unk.jsonl",
      {R"({"table_id":"zz","question":"q","sql":{"sel":0,"agg":0,"conds":[]}})"});
  try {
    LoadExamples(unknown, tables);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
  }
}

TEST_CASE("schema key depends on column names only") {
  const auto a = MakeSchema("t1", {"Year", "Venue"});
  const auto b = MakeSchema("t2", {"year", "venue"});
  const auto c = MakeSchema("t1", {"Venue", "Year"});
  CHECK(a.schema_key == b.schema_key);
  CHECK(a.schema_key != c.schema_key);
  CHECK_THROWS_AS(MakeSchema("t", {}), DataError);
}

TEST_CASE("count_shots") {
  std::vector<Example> train(5, WithSchema({"a"}));
  std::vector<Example> test{WithSchema({"a"}), WithSchema({"b"})};
  const auto counts = CountShots(train, test);
  CHECK(counts.at(test[0].schema.schema_key) == 5);
  CHECK(counts.at(test[1].schema.schema_key) == 0);

  // Invariant under training order.
  std::vector<Example> mixed{WithSchema({"a"}), WithSchema({"c"}), WithSchema({"a"}),
                             WithSchema({"b"})};
  auto shuffled = mixed;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(CountShots(mixed, test) == CountShots(shuffled, test));
}

TEST_CASE("split_by_shots boundaries") {
  std::vector<Example> train;
  for (int i = 0; i < 1; ++i) train.push_back(WithSchema({"a"}));
  for (int i = 0; i < 6; ++i) train.push_back(WithSchema({"b"}));
  std::vector<Example> test{WithSchema({"a"}), WithSchema({"b"}), WithSchema({"new"})};
  const auto split = SplitByShots(test, CountShots(train, test));
  REQUIRE(split.buckets.size() == 7);
  CHECK(split.buckets[0].indices == std::vector<size_t>{2});
  CHECK(split.buckets[1].indices == std::vector<size_t>{0});
  CHECK(split.buckets[2].indices == std::vector<size_t>{1});
  for (size_t b = 0; b < 7; ++b) {
    CHECK(split.buckets[b].name == kShotRanges[b].name);
    CHECK(split.buckets[b].min_shots == kShotRanges[b].min_shots);
    CHECK(split.buckets[b].max_shots == kShotRanges[b].max_shots);
  }
}

TEST_CASE("split_by_shots overflow goes to the last bucket") {
  std::vector<Example> test{WithSchema({"a"})};
  ShotCounts counts{{test[0].schema.schema_key, 5000}};
  const auto split = SplitByShots(test, counts);
  CHECK(split.buckets[6].indices == std::vector<size_t>{0});
  CHECK(split.overflow == std::vector<size_t>{0});
  CHECK_THROWS_AS(SplitByShots(test, ShotCounts{}), std::invalid_argument);
}

TEST_CASE("empty and all-unseen test sets") {
  const auto empty = SplitByShots({}, {});
  CHECK(empty.buckets.size() == 7);
  for (const auto& b : empty.buckets) CHECK(b.indices.empty());

  std::vector<Example> test{WithSchema({"p"}), WithSchema({"q"}), WithSchema({"r"})};
  const auto split = SplitByShots(test, CountShots({}, test));
  CHECK(split.buckets[0].indices.size() == 3);
}

TEST_CASE("bucket partition and determinism on random schemas") {
  std::mt19937 gen(11);
  std::vector<Example> train, test;
  for (int i = 0; i < 3000; ++i) {
    train.push_back(WithSchema({"c" + std::to_string(gen() % 40)}));
  }
  for (int i = 0; i < 500; ++i) test.push_back(WithSchema({"c" + std::to_string(gen() % 60)}));
  const auto counts = CountShots(train, test);
  const auto split = SplitByShots(test, counts);
  std::vector<int> seen(test.size(), 0);
  size_t total = 0;
  for (const auto& b : split.buckets) {
    total += b.indices.size();
    CHECK(std::is_sorted(b.indices.begin(), b.indices.end()));
    for (size_t i : b.indices) {
      ++seen[i];
      const int n = counts.at(test[i].schema.schema_key);
      CHECK(n >= b.min_shots);
      CHECK(n <= b.max_shots);
    }
  }
  CHECK(total == test.size());
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n == 1; }));

  const auto again = SplitByShots(test, CountShots(train, test));
  CHECK(BucketManifestToJson(split).dump() == BucketManifestToJson(again).dump());
  const auto round = BucketManifestFromJson(BucketManifestToJson(split));
  for (size_t b = 0; b < 7; ++b) CHECK(round.buckets[b].indices == split.buckets[b].indices);
}

TEST_CASE("operator vocabulary") {
  OperatorVocabulary ops;
  CHECK(ops.agg_count() == 6);
  CHECK(ops.op_count() == 3);
  CHECK(ops.AggIndex("COUNT") == 3);
  auto dir = MakeTempDir("ops");
  auto custom = LoadOperatorVocabulary(
      WriteLines(dir / "ops.json", {R"({"agg_ops":["","MAX"],"cond_ops":["=","<"]})"}));
  CHECK(custom.agg_count() == 2);
  CHECK(custom.op_names[1] == "<");

  Example e = WithSchema({"a", "b"});
  e.gold.agg = 4;
  CHECK_THROWS_AS(ValidateOperatorIds({e}, custom), DataError);
  CHECK_NOTHROW(ValidateOperatorIds({e}, ops));
}

}  // namespace
}  // namespace zsql
