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

#ifndef ZSQL_EXECUTOR_H_
#define ZSQL_EXECUTOR_H_

#include <string>
#include <vector>

#include "zsql/dataset.h"

namespace zsql {

// Result of running a query against one table.
//   kEmpty   aggregation over no rows (COUNT gives 0 instead)
//   kScalar  aggregated value
//   kCells   projected column, as an order-insensitive multiset
struct ExecutionResult {
  enum class Kind { kEmpty, kScalar, kCells };
  Kind kind = Kind::kEmpty;
  Cell scalar;
  std::vector<Cell> cells;  // sorted canonically

  bool operator==(const ExecutionResult& other) const;
  std::string DebugString() const;
};

class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cell/value comparison helpers shared with the evaluator. Numeric when both
// sides parse as reals, else on normalized text.
bool ValuesEqual(const std::string& a, const std::string& b);
// Negative, zero or positive like strcmp.
int CompareValues(const std::string& a, const std::string& b);

ExecutionResult Execute(const SQLQuery& query, const TableSchema& schema,
                        const TableContent& content, const OperatorVocabulary& ops);

}  // namespace zsql

#endif  // ZSQL_EXECUTOR_H_
