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

#include "zsql/executor.h"

#include <algorithm>
#include <sstream>

#include "zsql/text.h"

namespace zsql {
namespace {

// Canonical key of a cell: numbers by value, text normalized.
struct CellKey {
  bool numeric = false;
  double number = 0.0;
  std::string text;

  auto operator<=>(const CellKey&) const = default;
};

CellKey KeyOf(const Cell& cell) {
  if (const double* d = std::get_if<double>(&cell)) return {true, *d, {}};
  const auto& s = std::get<std::string>(cell);
  if (auto v = ParseReal(s)) return {true, *v, {}};
  return {false, 0.0, NormalizeText(s)};
}

bool CellsEqual(const Cell& a, const Cell& b) { return KeyOf(a) == KeyOf(b); }

enum class Agg { kNone, kMax, kMin, kCount, kSum, kAvg };
enum class Op { kEq, kGt, kLt };

Agg AggOf(const OperatorVocabulary& ops, int id) {
  if (id < 0 || id >= ops.agg_count()) throw ExecutionError("aggregation id out of range");
  const auto& n = ops.agg_names[id];
  if (n.empty()) return Agg::kNone;
  if (n == "MAX") return Agg::kMax;
  if (n == "MIN") return Agg::kMin;
  if (n == "COUNT") return Agg::kCount;
  if (n == "SUM") return Agg::kSum;
  if (n == "AVG") return Agg::kAvg;
  throw ExecutionError("unsupported aggregation '" + n + "'");
}

Op OpOf(const OperatorVocabulary& ops, int id) {
  if (id < 0 || id >= ops.op_count()) throw ExecutionError("operator id out of range");
  const auto& n = ops.op_names[id];
  if (n == "=") return Op::kEq;
  if (n == ">") return Op::kGt;
  if (n == "<") return Op::kLt;
  throw ExecutionError("unsupported operator '" + n + "'");
}

}  // namespace

bool ValuesEqual(const std::string& a, const std::string& b) {
  return CompareValues(a, b) == 0;
}

int CompareValues(const std::string& a, const std::string& b) {
  const auto x = ParseReal(a), y = ParseReal(b);
  if (x && y) return *x < *y ? -1 : (*x > *y ? 1 : 0);
  return NormalizeText(a).compare(NormalizeText(b));
}

bool ExecutionResult::operator==(const ExecutionResult& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::kEmpty:
      return true;
    case Kind::kScalar:
      return CellsEqual(scalar, other.scalar);
    case Kind::kCells:
      if (cells.size() != other.cells.size()) return false;
      for (size_t i = 0; i < cells.size(); ++i) {
        if (!CellsEqual(cells[i], other.cells[i])) return false;
      }
      return true;
  }
  return false;
}

std::string ExecutionResult::DebugString() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kEmpty:
      return "EMPTY";
    case Kind::kScalar:
      return "SCALAR(" + CellText(scalar) + ")";
    case Kind::kCells:
      out << "CELLS[";
      for (size_t i = 0; i < cells.size(); ++i) out << (i ? ", " : "") << CellText(cells[i]);
      out << "]";
      return out.str();
  }
  return "?";
}

ExecutionResult Execute(const SQLQuery& query, const TableSchema& schema,
                        const TableContent& content, const OperatorVocabulary& ops) {
  const int ncols = static_cast<int>(schema.column_count());
  if (query.sel < 0 || query.sel >= ncols) throw ExecutionError("select column out of range");
  const Agg agg = AggOf(ops, query.agg);
  std::vector<Op> cond_ops;
  for (const auto& c : query.conditions) {
    if (c.column < 0 || c.column >= ncols) throw ExecutionError("condition column out of range");
    cond_ops.push_back(OpOf(ops, c.op));
  }

  std::vector<Cell> selected;
  for (const auto& row : content.rows) {
    bool keep = true;
    for (size_t k = 0; k < query.conditions.size() && keep; ++k) {
      const int cmp = CompareValues(CellText(row[query.conditions[k].column]),
                                    query.conditions[k].value);
      switch (cond_ops[k]) {
        case Op::kEq: keep = cmp == 0; break;
        case Op::kGt: keep = cmp > 0; break;
        case Op::kLt: keep = cmp < 0; break;
      }
    }
    if (keep) selected.push_back(row[query.sel]);
  }

  ExecutionResult r;
  if (agg == Agg::kNone) {
    r.kind = ExecutionResult::Kind::kCells;
    std::sort(selected.begin(), selected.end(),
              [](const Cell& a, const Cell& b) { return KeyOf(a) < KeyOf(b); });
    r.cells = std::move(selected);
    return r;
  }
  if (agg == Agg::kCount) {
    r.kind = ExecutionResult::Kind::kScalar;
    r.scalar = static_cast<double>(selected.size());
    return r;
  }
  std::vector<double> numbers;
  for (const auto& c : selected) {
    const CellKey k = KeyOf(c);
    if (k.numeric) numbers.push_back(k.number);
  }
  if (agg == Agg::kSum || agg == Agg::kAvg) {
    if (numbers.empty()) return r;
    double total = 0.0;
    for (double x : numbers) total += x;
    r.kind = ExecutionResult::Kind::kScalar;
    r.scalar = agg == Agg::kSum ? total : total / static_cast<double>(numbers.size());
    return r;
  }
  // MAX / MIN
  if (selected.empty()) return r;
  r.kind = ExecutionResult::Kind::kScalar;
  if (numbers.size() == selected.size()) {
    r.scalar = agg == Agg::kMax ? *std::max_element(numbers.begin(), numbers.end())
                                : *std::min_element(numbers.begin(), numbers.end());
  } else {
    std::vector<std::string> texts;
    for (const auto& c : selected) texts.push_back(NormalizeText(CellText(c)));
    r.scalar = agg == Agg::kMax ? *std::max_element(texts.begin(), texts.end())
                                : *std::min_element(texts.begin(), texts.end());
  }
  return r;
}

}  // namespace zsql
