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

#ifndef ZSQL_EVALUATION_H_
#define ZSQL_EVALUATION_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zsql/dataset.h"
#include "zsql/labels.h"

namespace zsql {

// Value form used when comparing conditions: canonical number if the text
// parses as a real, else the normalized text.
std::string CanonicalValue(std::string_view value);

// Agg, sel and the condition multiset agree (condition order ignored).
bool QueryMatch(const SQLQuery& pred, const SQLQuery& gold);
bool WhereMatch(const SQLQuery& pred, const SQLQuery& gold);

enum class ErrorCategory { kWrongCondColumn = 0, kWrongCondValue, kExtraOrMissing, kOthers };
inline constexpr int kErrorCategoryCount = 4;

std::string_view ErrorCategoryName(ErrorCategory c);

// Categories of a wrong WHERE clause; empty when the clause is right.
std::vector<ErrorCategory> CategorizeErrors(const SQLQuery& pred, const SQLQuery& gold);

// Normalized column names seen in training tables.
using ColumnInventory = std::set<std::string>;
ColumnInventory BuildColumnInventory(const std::vector<Example>& train);

struct AccuracyBlock {
  size_t total = 0;
  size_t qm = 0, ex = 0, agg = 0, sel = 0, where = 0;

  double acc_qm() const { return Fraction(qm); }
  double acc_ex() const { return Fraction(ex); }
  double acc_agg() const { return Fraction(agg); }
  double acc_sel() const { return Fraction(sel); }
  double acc_where() const { return Fraction(where); }
  double Fraction(size_t n) const { return total == 0 ? 0.0 : static_cast<double>(n) / total; }
};

struct EvalReport {
  AccuracyBlock overall;
  std::vector<std::pair<std::string, AccuracyBlock>> buckets;
  // Gold conditions whose column name does / does not occur in training.
  size_t seen_conditions = 0, seen_correct = 0;
  size_t unseen_conditions = 0, unseen_correct = 0;
  // The same split restricted to the zero-shot bucket.
  size_t zero_shot_conditions = 0, zero_shot_unseen_conditions = 0;
  size_t unseen_sketch_count = 0;  // gold sketch absent from the vocabulary
  size_t skipped_count = 0;        // gold value not locatable in the question
  std::array<size_t, kErrorCategoryCount> error_tallies{};
  size_t wrong_where = 0;

  double seen_accuracy() const;
  double unseen_accuracy() const;
  double zero_shot_unseen_fraction() const;
};

struct EvalInputs {
  const std::vector<Example>* test = nullptr;
  const TableMap* tables = nullptr;  // for execution accuracy
  const OperatorVocabulary* ops = nullptr;
  const BucketSplit* buckets = nullptr;        // optional
  const ColumnInventory* inventory = nullptr;  // optional
  const SketchVocabulary* sketches = nullptr;  // optional
};

// Predictions must align one-to-one with the test list.
EvalReport Evaluate(const std::vector<SQLQuery>& predictions, const EvalInputs& inputs);

nlohmann::json ReportToJson(const EvalReport& report);
// Human-readable table with one row per bucket.
std::string ReportToText(const EvalReport& report);

// Prediction file: one {"index": i, "sql": {...}} record per line.
void WritePredictions(const std::filesystem::path& path, const std::vector<SQLQuery>& preds);
std::vector<SQLQuery> ReadPredictions(const std::filesystem::path& path, size_t expected);

}  // namespace zsql

#endif  // ZSQL_EVALUATION_H_
