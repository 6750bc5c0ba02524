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

#ifndef ZSQL_DATASET_H_
#define ZSQL_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace zsql {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A table cell is either text or a real number, as typed in the source file.
using Cell = std::variant<std::string, double>;

std::string CellText(const Cell& cell);

struct TableSchema {
  std::string table_id;
  std::vector<std::string> headers;                   // as written
  std::vector<std::vector<std::string>> column_names;  // tokenized
  std::string schema_key;

  size_t column_count() const { return column_names.size(); }
};

// Builds a schema; the key depends on the ordered header list only.
TableSchema MakeSchema(std::string table_id, std::vector<std::string> headers);

// Lowercased, whitespace-normalized, order-preserving join of column names.
std::string SchemaKey(const std::vector<std::string>& headers);

struct TableContent {
  std::string table_id;
  std::vector<std::vector<Cell>> rows;
};

struct Table {
  TableSchema schema;
  TableContent content;
};

using TableMap = std::map<std::string, Table>;

struct Condition {
  int column = 0;
  int op = 0;
  std::string value;

  bool operator==(const Condition&) const = default;
};

struct SQLQuery {
  int agg = 0;
  int sel = 0;
  std::vector<Condition> conditions;

  bool operator==(const SQLQuery&) const = default;
};

struct Example {
  std::string question;
  std::vector<std::string> question_tokens;
  TableSchema schema;
  SQLQuery gold;
};

// Operator names. WikiSQL files only carry integer ids; names default to the
// ones its reference tooling uses.
struct OperatorVocabulary {
  std::vector<std::string> agg_names{"", "MAX", "MIN", "COUNT", "SUM", "AVG"};
  std::vector<std::string> op_names{"=", ">", "<"};

  int agg_count() const { return static_cast<int>(agg_names.size()); }
  int op_count() const { return static_cast<int>(op_names.size()); }

  // Index of an aggregation by name, or -1.
  int AggIndex(std::string_view name) const;
};

OperatorVocabulary LoadOperatorVocabulary(const std::filesystem::path& path);

// Checks that every agg/op id used by `examples` exists in `vocab`; throws
// DataError naming the first offending example otherwise.
void ValidateOperatorIds(const std::vector<Example>& examples,
                         const OperatorVocabulary& vocab);

// Ids that actually occur in the data, sorted.
std::vector<int> ObservedAggIds(const std::vector<Example>& examples);
std::vector<int> ObservedOpIds(const std::vector<Example>& examples);

// Parses a WikiSQL `sql` object ({sel, agg, conds}).
SQLQuery ParseQuery(const nlohmann::json& sql);
nlohmann::json QueryToJson(const SQLQuery& query);

TableMap LoadTables(const std::filesystem::path& path);
// Merges `more` into `tables`; duplicate ids are an error.
void MergeTables(TableMap& tables, TableMap more);

std::vector<Example> LoadExamples(const std::filesystem::path& path,
                                  const TableMap& tables);

using ShotCounts = std::map<std::string, int>;

// For every schema key in `test`, the number of training examples sharing it.
ShotCounts CountShots(const std::vector<Example>& train,
                      const std::vector<Example>& test);

struct ShotBucket {
  std::string name;
  int min_shots = 0;
  int max_shots = 0;
  std::vector<size_t> indices;  // into the test list, ascending
};

struct BucketSplit {
  std::vector<ShotBucket> buckets;
  // Test indices whose count exceeded the last range; they are in W-6.
  std::vector<size_t> overflow;
};

struct ShotRange {
  const char* name;
  int min_shots;
  int max_shots;
};

inline constexpr ShotRange kShotRanges[] = {
    {"W-0", 0, 0},       {"W-1", 1, 5},       {"W-2", 6, 15},
    {"W-3", 16, 40},     {"W-4", 41, 100},    {"W-5", 101, 500},
    {"W-6", 501, 2045},
};

BucketSplit SplitByShots(const std::vector<Example>& test,
                         const ShotCounts& counts);

// Materializes the examples of one bucket.
std::vector<Example> BucketExamples(const std::vector<Example>& test,
                                    const ShotBucket& bucket);

nlohmann::json BucketManifestToJson(const BucketSplit& split);
BucketSplit BucketManifestFromJson(const nlohmann::json& manifest);

// Reads a file of one JSON object per line; blank lines are skipped.
std::vector<nlohmann::json> ReadJsonLines(const std::filesystem::path& path);

}  // namespace zsql

#endif  // ZSQL_DATASET_H_
