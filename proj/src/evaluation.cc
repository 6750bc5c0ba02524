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

#include "zsql/evaluation.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "zsql/executor.h"
#include "zsql/text.h"

namespace zsql {

using nlohmann::json;

std::string CanonicalValue(std::string_view value) {
  if (auto v = ParseReal(value)) return "#" + FormatReal(*v);
  return NormalizeText(value);
}

namespace {

using CondKey = std::tuple<int, int, std::string>;

std::vector<CondKey> SortedConditions(const SQLQuery& q) {
  std::vector<CondKey> keys;
  keys.reserve(q.conditions.size());
  for (const auto& c : q.conditions) keys.emplace_back(c.column, c.op, CanonicalValue(c.value));
  std::sort(keys.begin(), keys.end());
  return keys;
}

}  // namespace

bool WhereMatch(const SQLQuery& pred, const SQLQuery& gold) {
  if (pred.conditions.size() != gold.conditions.size()) return false;
  return SortedConditions(pred) == SortedConditions(gold);
}

bool QueryMatch(const SQLQuery& pred, const SQLQuery& gold) {
  return pred.agg == gold.agg && pred.sel == gold.sel && WhereMatch(pred, gold);
}

std::string_view ErrorCategoryName(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kWrongCondColumn: return "A_wrong_cond_col";
    case ErrorCategory::kWrongCondValue: return "B_wrong_cond_val";
    case ErrorCategory::kExtraOrMissing: return "C_extra_or_missing_conditions";
    case ErrorCategory::kOthers: return "OTHERS";
  }
  return "?";
}

std::vector<ErrorCategory> CategorizeErrors(const SQLQuery& pred, const SQLQuery& gold) {
  if (WhereMatch(pred, gold)) return {};
  const auto& gc = gold.conditions;
  const auto& pc = pred.conditions;
  struct Candidate {
    int agreement;
    size_t g, p;
  };
  std::vector<Candidate> candidates;
  for (size_t g = 0; g < gc.size(); ++g) {
    for (size_t p = 0; p < pc.size(); ++p) {
      const int a = (gc[g].column == pc[p].column) + (gc[g].op == pc[p].op) +
                    (CanonicalValue(gc[g].value) == CanonicalValue(pc[p].value));
      if (a > 0) candidates.push_back({a, g, p});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.agreement != y.agreement) return x.agreement > y.agreement;
    if (x.g != y.g) return x.g < y.g;
    return x.p < y.p;
  });
  std::vector<char> g_used(gc.size(), 0), p_used(pc.size(), 0);
  bool col_only = false, value_wrong = false;
  size_t aligned = 0;
  for (const auto& c : candidates) {
    if (g_used[c.g] || p_used[c.p]) continue;
    g_used[c.g] = p_used[c.p] = 1;
    ++aligned;
    const auto& a = gc[c.g];
    const auto& b = pc[c.p];
    const bool same_value = CanonicalValue(a.value) == CanonicalValue(b.value);
    if (a.column != b.column && a.op == b.op && same_value) col_only = true;
    if (!same_value) value_wrong = true;
  }
  std::vector<ErrorCategory> out;
  if (col_only) out.push_back(ErrorCategory::kWrongCondColumn);
  if (value_wrong) out.push_back(ErrorCategory::kWrongCondValue);
  if (gc.size() != pc.size() || aligned < gc.size() || aligned < pc.size()) {
    out.push_back(ErrorCategory::kExtraOrMissing);
  }
  if (out.empty()) out.push_back(ErrorCategory::kOthers);
  return out;
}

ColumnInventory BuildColumnInventory(const std::vector<Example>& train) {
  ColumnInventory inv;
  std::set<std::string> seen_keys;
  for (const auto& e : train) {
    if (!seen_keys.insert(e.schema.schema_key).second) continue;
    for (const auto& h : e.schema.headers) inv.insert(NormalizeText(h));
  }
  return inv;
}

double EvalReport::seen_accuracy() const {
  return seen_conditions == 0 ? 0.0 : static_cast<double>(seen_correct) / seen_conditions;
}

double EvalReport::unseen_accuracy() const {
  return unseen_conditions == 0 ? 0.0 : static_cast<double>(unseen_correct) / unseen_conditions;
}

double EvalReport::zero_shot_unseen_fraction() const {
  return zero_shot_conditions == 0
             ? 0.0
             : static_cast<double>(zero_shot_unseen_conditions) / zero_shot_conditions;
}

namespace {

struct ExampleOutcome {
  bool qm, ex, agg, sel, where;
};

ExampleOutcome Score(const SQLQuery& pred, const Example& ex, const EvalInputs& in) {
  ExampleOutcome o{};
  o.agg = pred.agg == ex.gold.agg;
  o.sel = pred.sel == ex.gold.sel;
  o.where = WhereMatch(pred, ex.gold);
  o.qm = o.agg && o.sel && o.where;
  o.ex = false;
  if (in.tables != nullptr && in.ops != nullptr) {
    auto it = in.tables->find(ex.schema.table_id);
    if (it == in.tables->end()) {
      throw DataError("no table content for '" + ex.schema.table_id + "'");
    }
    const auto gold_result = Execute(ex.gold, it->second.schema, it->second.content, *in.ops);
    try {
      o.ex = Execute(pred, it->second.schema, it->second.content, *in.ops) == gold_result;
    } catch (const ExecutionError&) {
      o.ex = false;
    }
  }
  return o;
}

void Tally(AccuracyBlock& b, const ExampleOutcome& o) {
  ++b.total;
  b.qm += o.qm;
  b.ex += o.ex;
  b.agg += o.agg;
  b.sel += o.sel;
  b.where += o.where;
}

}  // namespace

EvalReport Evaluate(const std::vector<SQLQuery>& predictions, const EvalInputs& in) {
  if (in.test == nullptr) throw std::invalid_argument("no test set");
  const auto& test = *in.test;
  if (predictions.size() != test.size()) {
    throw DataError("prediction/test misalignment: " + std::to_string(predictions.size()) +
                    " predictions for " + std::to_string(test.size()) + " examples");
  }
  EvalReport report;
  std::vector<ExampleOutcome> outcomes;
  outcomes.reserve(test.size());
  for (size_t i = 0; i < test.size(); ++i) {
    const auto o = Score(predictions[i], test[i], in);
    outcomes.push_back(o);
    Tally(report.overall, o);
    if (!o.where) {
      ++report.wrong_where;
      for (auto c : CategorizeErrors(predictions[i], test[i].gold)) {
        ++report.error_tallies[static_cast<int>(c)];
      }
    }
    if (in.sketches != nullptr && !in.sketches->Find(DeriveSketch(test[i].gold))) {
      ++report.unseen_sketch_count;
    }
    for (const auto& c : test[i].gold.conditions) {
      if (!LocateSpan(test[i].question_tokens, c.value)) {
        ++report.skipped_count;
        break;
      }
    }
    if (in.inventory != nullptr) {
      const auto pred_keys = SortedConditions(predictions[i]);
      for (const auto& c : test[i].gold.conditions) {
        const bool seen = in.inventory->count(NormalizeText(test[i].schema.headers.at(c.column)));
        const bool correct = std::binary_search(pred_keys.begin(), pred_keys.end(),
                                                CondKey{c.column, c.op, CanonicalValue(c.value)});
        if (seen) {
          ++report.seen_conditions;
          report.seen_correct += correct;
        } else {
          ++report.unseen_conditions;
          report.unseen_correct += correct;
        }
      }
    }
  }
  if (in.buckets != nullptr) {
    for (const auto& b : in.buckets->buckets) {
      AccuracyBlock block;
      for (size_t i : b.indices) {
        if (i >= test.size()) throw DataError("bucket index outside the test set");
        Tally(block, outcomes[i]);
        if (b.name == "W-0" && in.inventory != nullptr) {
          for (const auto& c : test[i].gold.conditions) {
            ++report.zero_shot_conditions;
            if (!in.inventory->count(NormalizeText(test[i].schema.headers.at(c.column)))) {
              ++report.zero_shot_unseen_conditions;
            }
          }
        }
      }
      report.buckets.emplace_back(b.name, block);
    }
  }
  return report;
}

namespace {

json BlockToJson(const AccuracyBlock& b) {
  return json{{"examples", b.total},      {"acc_qm", b.acc_qm()},   {"acc_ex", b.acc_ex()},
              {"acc_agg", b.acc_agg()},   {"acc_sel", b.acc_sel()}, {"acc_where", b.acc_where()}};
}

}  // namespace

json ReportToJson(const EvalReport& r) {
  json j;
  j["where_metric"] = "clause-level condition multiset match";
  j["overall"] = BlockToJson(r.overall);
  json buckets = json::array();
  for (const auto& [name, b] : r.buckets) {
    json e = BlockToJson(b);
    e["bucket"] = name;
    buckets.push_back(e);
  }
  j["buckets"] = buckets;
  j["columns"] = {{"seen_conditions", r.seen_conditions},
                  {"seen_accuracy", r.seen_accuracy()},
                  {"unseen_conditions", r.unseen_conditions},
                  {"unseen_accuracy", r.unseen_accuracy()},
                  {"zero_shot_conditions", r.zero_shot_conditions},
                  {"zero_shot_unseen_fraction", r.zero_shot_unseen_fraction()}};
  j["unseen_sketch_count"] = r.unseen_sketch_count;
  j["skipped_count"] = r.skipped_count;
  json errors;
  for (int c = 0; c < kErrorCategoryCount; ++c) {
    errors[std::string(ErrorCategoryName(static_cast<ErrorCategory>(c)))] = r.error_tallies[c];
  }
  j["errors"] = errors;
  j["wrong_where"] = r.wrong_where;
  return j;
}

std::string ReportToText(const EvalReport& r) {
  std::ostringstream out;
  char line[160];
  out << "# acc_where: clause-level condition multiset match\n";
  std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %8s %8s %9s\n", "subset", "#q", "qm",
                "ex", "agg", "sel", "where");
  out << line;
  auto row = [&](const std::string& name, const AccuracyBlock& b) {
    std::snprintf(line, sizeof(line), "%-8s %8zu %7.1f%% %7.1f%% %7.1f%% %7.1f%% %8.1f%%\n",
                  name.c_str(), b.total, 100 * b.acc_qm(), 100 * b.acc_ex(), 100 * b.acc_agg(),
                  100 * b.acc_sel(), 100 * b.acc_where());
    out << line;
  };
  row("W-full", r.overall);
  for (const auto& [name, b] : r.buckets) row(name, b);
  if (r.seen_conditions + r.unseen_conditions > 0) {
    std::snprintf(line, sizeof(line),
                  "conditions: seen-column %.1f%% (%zu), unseen-column %.1f%% (%zu)\n",
                  100 * r.seen_accuracy(), r.seen_conditions, 100 * r.unseen_accuracy(),
                  r.unseen_conditions);
    out << line;
  }
  out << "unseen sketches: " << r.unseen_sketch_count << ", unlocatable values: "
      << r.skipped_count << "\n";
  return out.str();
}

void WritePredictions(const std::filesystem::path& path, const std::vector<SQLQuery>& preds) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (size_t i = 0; i < preds.size(); ++i) {
    out << json{{"index", i}, {"sql", QueryToJson(preds[i])}}.dump() << "\n";
  }
}

std::vector<SQLQuery> ReadPredictions(const std::filesystem::path& path, size_t expected) {
  const auto records = ReadJsonLines(path);
  std::vector<SQLQuery> preds(records.size());
  std::vector<char> seen(records.size(), 0);
  for (size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    try {
      const size_t i = rec.at("index").get<size_t>();
      if (i >= records.size() || seen[i]) {
        throw DataError("prediction record " + std::to_string(r) + ": bad or repeated index " +
                        std::to_string(i));
      }
      seen[i] = 1;
      preds[i] = ParseQuery(rec.contains("sql") ? rec.at("sql") : rec);
    } catch (const json::exception& e) {
      throw DataError("prediction record " + std::to_string(r) + ": " + e.what());
    }
  }
  if (preds.size() != expected) {
    throw DataError("prediction/test misalignment: " + std::to_string(preds.size()) +
                    " predictions for " + std::to_string(expected) + " examples");
  }
  return preds;
}

}  // namespace zsql
