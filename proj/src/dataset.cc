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

#include "zsql/dataset.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "zsql/text.h"

namespace zsql {

using nlohmann::json;

std::string CellText(const Cell& cell) {
  if (const auto* s = std::get_if<std::string>(&cell)) return *s;
  return FormatReal(std::get<double>(cell));
}

std::string SchemaKey(const std::vector<std::string>& headers) {
  std::string key;
  for (size_t i = 0; i < headers.size(); ++i) {
    if (i > 0) key.push_back('\x1f');
    key += NormalizeText(headers[i]);
  }
  return key;
}

TableSchema MakeSchema(std::string table_id, std::vector<std::string> headers) {
  if (headers.empty()) {
    throw DataError("table '" + table_id + "' has no columns");
  }
  TableSchema schema;
  schema.table_id = std::move(table_id);
  schema.column_names.reserve(headers.size());
  for (const auto& h : headers) schema.column_names.push_back(Tokenize(h));
  schema.schema_key = SchemaKey(headers);
  schema.headers = std::move(headers);
  return schema;
}

int OperatorVocabulary::AggIndex(std::string_view name) const {
  for (size_t i = 0; i < agg_names.size(); ++i) {
    if (agg_names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

OperatorVocabulary LoadOperatorVocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("malformed vocabulary file " + path.string() + ": " + e.what());
  }
  OperatorVocabulary vocab;
  if (j.contains("agg_ops")) vocab.agg_names = j.at("agg_ops").get<std::vector<std::string>>();
  if (j.contains("cond_ops")) vocab.op_names = j.at("cond_ops").get<std::vector<std::string>>();
  if (vocab.agg_names.empty() || vocab.op_names.empty()) {
    throw DataError("vocabulary file " + path.string() + " has an empty operator list");
  }
  return vocab;
}

void ValidateOperatorIds(const std::vector<Example>& examples,
                         const OperatorVocabulary& vocab) {
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto& q = examples[i].gold;
    if (q.agg < 0 || q.agg >= vocab.agg_count()) {
      throw DataError("example " + std::to_string(i) + ": aggregation id " +
                      std::to_string(q.agg) + " outside the vocabulary");
    }
    for (const auto& c : q.conditions) {
      if (c.op < 0 || c.op >= vocab.op_count()) {
        throw DataError("example " + std::to_string(i) + ": operator id " +
                        std::to_string(c.op) + " outside the vocabulary");
      }
    }
  }
}

std::vector<int> ObservedAggIds(const std::vector<Example>& examples) {
  std::set<int> ids;
  for (const auto& e : examples) ids.insert(e.gold.agg);
  return {ids.begin(), ids.end()};
}

std::vector<int> ObservedOpIds(const std::vector<Example>& examples) {
  std::set<int> ids;
  for (const auto& e : examples) {
    for (const auto& c : e.gold.conditions) ids.insert(c.op);
  }
  return {ids.begin(), ids.end()};
}

namespace {

std::string ValueToText(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return FormatReal(v.get<double>());
  return v.dump();
}

const json& Field(const json& record, const char* name, size_t index,
                  const std::string& what) {
  if (!record.is_object() || !record.contains(name)) {
    throw DataError(what + " record " + std::to_string(index) +
                    ": missing field '" + name + "'");
  }
  return record.at(name);
}

}  // namespace

SQLQuery ParseQuery(const json& sql) {
  SQLQuery q;
  q.sel = sql.at("sel").get<int>();
  q.agg = sql.at("agg").get<int>();
  for (const auto& c : sql.at("conds")) {
    if (!c.is_array() || c.size() != 3) {
      throw DataError("condition must be a [col, op, value] triplet");
    }
    q.conditions.push_back({c[0].get<int>(), c[1].get<int>(), ValueToText(c[2])});
  }
  return q;
}

json QueryToJson(const SQLQuery& query) {
  json conds = json::array();
  for (const auto& c : query.conditions) {
    conds.push_back(json::array({c.column, c.op, c.value}));
  }
  return json{{"sel", query.sel}, {"agg", query.agg}, {"conds", conds}};
}

std::vector<json> ReadJsonLines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<json> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed JSON: " + e.what());
    }
  }
  return records;
}

TableMap LoadTables(const std::filesystem::path& path) {
  TableMap tables;
  const auto records = ReadJsonLines(path);
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const auto id = Field(r, "id", i, "table").get<std::string>();
    auto headers = Field(r, "header", i, "table").get<std::vector<std::string>>();
    Table table;
    table.schema = MakeSchema(id, std::move(headers));
    table.content.table_id = id;
    if (r.contains("rows")) {
      const auto& rows = r.at("rows");
      for (size_t row = 0; row < rows.size(); ++row) {
        const auto& cells = rows[row];
        if (!cells.is_array() || cells.size() != table.schema.column_count()) {
          throw DataError("table '" + id + "' row " + std::to_string(row) +
                          ": expected " +
                          std::to_string(table.schema.column_count()) +
                          " cells, got " + std::to_string(cells.size()));
        }
        std::vector<Cell> out;
        out.reserve(cells.size());
        for (const auto& c : cells) {
          if (c.is_number()) {
            out.emplace_back(c.get<double>());
          } else {
            out.emplace_back(ValueToText(c));
          }
        }
        table.content.rows.push_back(std::move(out));
      }
    }
    if (!tables.emplace(id, std::move(table)).second) {
      throw DataError("duplicate table id '" + id + "' at record " + std::to_string(i));
    }
  }
  return tables;
}

void MergeTables(TableMap& tables, TableMap more) {
  for (auto& [id, table] : more) {
    if (!tables.emplace(id, std::move(table)).second) {
      throw DataError("duplicate table id '" + id + "'");
    }
  }
}

std::vector<Example> LoadExamples(const std::filesystem::path& path,
                                  const TableMap& tables) {
  std::vector<Example> examples;
  const auto records = ReadJsonLines(path);
  examples.reserve(records.size());
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    Example ex;
    ex.question = Field(r, "question", i, "example").get<std::string>();
    const auto table_id = Field(r, "table_id", i, "example").get<std::string>();
    const auto& sql = Field(r, "sql", i, "example");
    for (const char* f : {"sel", "agg", "conds"}) {
      if (!sql.is_object() || !sql.contains(f)) {
        throw DataError("example record " + std::to_string(i) +
                        ": missing field 'sql." + f + "'");
      }
    }
    auto it = tables.find(table_id);
    if (it == tables.end()) {
      throw DataError("example record " + std::to_string(i) +
                      ": unknown table_id '" + table_id + "'");
    }
    ex.schema = it->second.schema;
    ex.question_tokens = Tokenize(ex.question);
    if (ex.question_tokens.empty()) {
      throw DataError("example record " + std::to_string(i) + ": empty question");
    }
    try {
      ex.gold = ParseQuery(sql);
    } catch (const json::exception& e) {
      throw DataError("example record " + std::to_string(i) + ": bad sql: " + e.what());
    } catch (const DataError& e) {
      throw DataError("example record " + std::to_string(i) + ": " + e.what());
    }
    const int ncols = static_cast<int>(ex.schema.column_count());
    auto bad_column = [&](int c) { return c < 0 || c >= ncols; };
    if (bad_column(ex.gold.sel)) {
      throw DataError("example record " + std::to_string(i) +
                      ": select column out of range");
    }
    for (const auto& c : ex.gold.conditions) {
      if (bad_column(c.column)) {
        throw DataError("example record " + std::to_string(i) +
                        ": condition column out of range");
      }
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

ShotCounts CountShots(const std::vector<Example>& train,
                      const std::vector<Example>& test) {
  std::map<std::string, int> train_counts;
  for (const auto& e : train) ++train_counts[e.schema.schema_key];
  ShotCounts counts;
  for (const auto& e : test) {
    auto it = train_counts.find(e.schema.schema_key);
    counts[e.schema.schema_key] = it == train_counts.end() ? 0 : it->second;
  }
  return counts;
}

BucketSplit SplitByShots(const std::vector<Example>& test,
                         const ShotCounts& counts) {
  BucketSplit split;
  for (const auto& r : kShotRanges) {
    split.buckets.push_back({r.name, r.min_shots, r.max_shots, {}});
  }
  const int last_max = kShotRanges[std::size(kShotRanges) - 1].max_shots;
  for (size_t i = 0; i < test.size(); ++i) {
    auto it = counts.find(test[i].schema.schema_key);
    if (it == counts.end()) {
      throw std::invalid_argument("no shot count for test example " + std::to_string(i));
    }
    const int n = it->second;
    if (n < 0) throw std::invalid_argument("negative shot count");
    if (n > last_max) {
      split.overflow.push_back(i);
      split.buckets.back().indices.push_back(i);
      continue;
    }
    for (auto& b : split.buckets) {
      if (n >= b.min_shots && n <= b.max_shots) {
        b.indices.push_back(i);
        break;
      }
    }
  }
  if (!split.overflow.empty()) {
    std::cerr << "warning: " << split.overflow.size()
              << " test examples exceed " << last_max
              << " shots; placed in W-6\n";
  }
  return split;
}

std::vector<Example> BucketExamples(const std::vector<Example>& test,
                                    const ShotBucket& bucket) {
  std::vector<Example> out;
  out.reserve(bucket.indices.size());
  for (size_t i : bucket.indices) out.push_back(test.at(i));
  return out;
}

json BucketManifestToJson(const BucketSplit& split) {
  json buckets = json::array();
  size_t total = 0;
  for (const auto& b : split.buckets) {
    total += b.indices.size();
    buckets.push_back({{"name", b.name},
                       {"shots", {b.min_shots, b.max_shots}},
                       {"size", b.indices.size()},
                       {"indices", b.indices}});
  }
  return json{{"total", total}, {"buckets", buckets}, {"overflow", split.overflow}};
}

BucketSplit BucketManifestFromJson(const json& manifest) {
  BucketSplit split;
  try {
    for (const auto& b : manifest.at("buckets")) {
      ShotBucket bucket;
      bucket.name = b.at("name").get<std::string>();
      bucket.min_shots = b.at("shots").at(0).get<int>();
      bucket.max_shots = b.at("shots").at(1).get<int>();
      bucket.indices = b.at("indices").get<std::vector<size_t>>();
      split.buckets.push_back(std::move(bucket));
    }
    if (manifest.contains("overflow")) {
      split.overflow = manifest.at("overflow").get<std::vector<size_t>>();
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed bucket manifest: ") + e.what());
  }
  return split;
}

}  // namespace zsql
