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

// Structured values cross the boundary as JSON text; the Python package
// decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "zsql/checkpoint.h"
#include "zsql/config.h"
#include "zsql/evaluation.h"
#include "zsql/executor.h"
#include "zsql/labels.h"
#include "zsql/text.h"
#include "zsql/training.h"

namespace py = pybind11;
using json = nlohmann::json;

namespace zsql {
namespace {

TableMap LoadAll(const std::vector<std::string>& paths) {
  TableMap tables;
  for (const auto& p : paths) MergeTables(tables, LoadTables(p));
  return tables;
}

Example MakeExample(const std::string& question, const std::vector<std::string>& headers,
                    const std::string& sql) {
  Example e;
  e.question = question;
  e.question_tokens = Tokenize(question);
  e.schema = MakeSchema("query", headers);
  if (!sql.empty()) e.gold = ParseQuery(json::parse(sql));
  return e;
}

std::string ResultToJson(const ExecutionResult& r) {
  auto cell = [](const Cell& c) -> json {
    if (const double* d = std::get_if<double>(&c)) return *d;
    return std::get<std::string>(c);
  };
  switch (r.kind) {
    case ExecutionResult::Kind::kEmpty:
      return json{{"kind", "empty"}}.dump();
    case ExecutionResult::Kind::kScalar:
      return json{{"kind", "scalar"}, {"value", cell(r.scalar)}}.dump();
    case ExecutionResult::Kind::kCells: {
      json cells = json::array();
      for (const auto& c : r.cells) cells.push_back(cell(c));
      return json{{"kind", "cells"}, {"cells", cells}}.dump();
    }
  }
  return "{}";
}

std::string ExecuteRows(const std::string& sql, const std::vector<std::string>& headers,
                        const std::string& rows) {
  Table t;
  t.schema = MakeSchema("query", headers);
  for (const auto& row : json::parse(rows)) {
    if (row.size() != headers.size()) throw DataError("row width differs from the header");
    std::vector<Cell> cells;
    for (const auto& c : row) {
      if (c.is_number()) {
        cells.emplace_back(c.get<double>());
      } else {
        cells.emplace_back(c.is_string() ? c.get<std::string>() : c.dump());
      }
    }
    t.content.rows.push_back(std::move(cells));
  }
  return ResultToJson(Execute(ParseQuery(json::parse(sql)), t.schema, t.content, {}));
}

std::string DeriveExampleLabels(const std::string& question,
                                const std::vector<std::string>& headers, const std::string& sql) {
  const std::vector<Example> one{MakeExample(question, headers, sql)};
  return LabelRecordToJson(0, DeriveLabels(one[0], BuildSketchVocabulary(one))).dump();
}

std::string SplitByShotsFiles(const std::string& train, const std::string& test,
                              const std::vector<std::string>& tables) {
  const auto t = LoadAll(tables);
  const auto tr = LoadExamples(train, t);
  const auto te = LoadExamples(test, t);
  return BucketManifestToJson(SplitByShots(te, CountShots(tr, te))).dump();
}

std::vector<std::string> Categorize(const std::string& pred, const std::string& gold) {
  std::vector<std::string> out;
  for (auto c : CategorizeErrors(ParseQuery(json::parse(pred)), ParseQuery(json::parse(gold)))) {
    out.emplace_back(ErrorCategoryName(c));
  }
  return out;
}

class PyModel {
 public:
  explicit PyModel(LoadedCheckpoint loaded)
      : config_(loaded.config), model_(std::move(loaded.model)) {}

  static PyModel Load(const std::string& path) { return PyModel(LoadCheckpoint(path)); }

  void Save(const std::string& path) const { SaveCheckpoint(path, *model_, config_); }

  std::string Predict(const std::string& question, const std::vector<std::string>& headers) const {
    const Example e = MakeExample(question, headers, "");
    return QueryToJson(PredictionToQuery(model_->Predict(e), e.question_tokens)).dump();
  }

  std::string PredictFile(const std::string& test, const std::vector<std::string>& tables) const {
    const auto t = LoadAll(tables);
    json out = json::array();
    for (const auto& e : LoadExamples(test, t)) {
      out.push_back(QueryToJson(PredictionToQuery(model_->Predict(e), e.question_tokens)));
    }
    return out.dump();
  }

  std::string Config() const { return ConfigToJson(config_).dump(); }
  int64_t ParameterCount() const { return model_->params().ScalarCount(); }

 private:
  RunConfig config_;
  std::shared_ptr<Model> model_;
};

std::pair<PyModel, std::string> TrainFiles(const std::string& train,
                                           const std::vector<std::string>& tables,
                                           const std::map<std::string, std::string>& settings,
                                           const std::string& dev) {
  RunConfig config;
  for (const auto& [k, v] : settings) SetConfigValue(config, k, v);
  config.model.Validate();
  config.train.Validate();
  const auto t = LoadAll(tables);
  const auto tr = LoadExamples(train, t);
  const auto dv = dev.empty() ? std::vector<Example>{} : LoadExamples(dev, t);
  auto model = std::make_unique<Model>(
      config.model,
      BuildModelVocab(tr, {}, nullptr, OperatorVocabulary{}, BuildSketchVocabulary(tr)),
      config.train.seed);
  TrainResult result;
  {
    py::gil_scoped_release release;
    result = Train(*model, tr, dv, config.train);
  }
  // Same float32 rounding a checkpoint applies, so saving is lossless.
  RoundToFloat(model->params());
  json log = json::array();
  for (const auto& e : result.log) {
    log.push_back({{"epoch", e.epoch}, {"L_gen", e.gen}, {"L_map", e.map},
                   {"L_total", e.total}, {"dev_acc_qm", e.dev_acc_qm}});
  }
  return {PyModel(LoadedCheckpoint{config, std::move(model)}),
          json{{"log", log}, {"best_epoch", result.best_epoch}}.dump()};
}

std::string EvaluateFiles(const std::string& predictions, const std::string& test,
                          const std::vector<std::string>& tables, const std::string& train) {
  const auto t = LoadAll(tables);
  const auto te = LoadExamples(test, t);
  std::vector<SQLQuery> preds;
  for (const auto& q : json::parse(predictions)) preds.push_back(ParseQuery(q));
  const OperatorVocabulary ops;
  EvalInputs in;
  in.test = &te;
  in.tables = &t;
  in.ops = &ops;
  std::vector<Example> tr;
  BucketSplit split;
  ColumnInventory inventory;
  SketchVocabulary sketches;
  if (!train.empty()) {
    tr = LoadExamples(train, t);
    split = SplitByShots(te, CountShots(tr, te));
    inventory = BuildColumnInventory(tr);
    sketches = BuildSketchVocabulary(tr);
    in.buckets = &split;
    in.inventory = &inventory;
    in.sketches = &sketches;
  }
  return ReportToJson(Evaluate(preds, in)).dump();
}

}  // namespace
}  // namespace zsql

PYBIND11_MODULE(_zsql, m) {
  using namespace zsql;
  m.doc() = "Text-to-SQL core: splits, labels, model, execution and metrics";

  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<ExecutionError>(m, "ExecutionError", PyExc_ValueError);

  m.def("tokenize", &Tokenize, py::arg("text"));
  m.def("normalize_text", &NormalizeText, py::arg("text"));
  m.def("schema_key", &SchemaKey, py::arg("headers"));
  m.def("split_by_shots", &SplitByShotsFiles, py::arg("train"), py::arg("test"),
        py::arg("tables"));
  m.def("derive_labels", &DeriveExampleLabels, py::arg("question"), py::arg("headers"),
        py::arg("sql"));
  m.def("execute", &ExecuteRows, py::arg("sql"), py::arg("headers"), py::arg("rows"));
  m.def(
      "query_match",
      [](const std::string& pred, const std::string& gold) {
        return QueryMatch(ParseQuery(json::parse(pred)), ParseQuery(json::parse(gold)));
      },
      py::arg("pred"), py::arg("gold"));
  m.def("categorize_errors", &Categorize, py::arg("pred"), py::arg("gold"));
  m.def("evaluate", &EvaluateFiles, py::arg("predictions"), py::arg("test"), py::arg("tables"),
        py::arg("train") = "");
  m.def("train", &TrainFiles, py::arg("train"), py::arg("tables"), py::arg("settings"),
        py::arg("dev") = "");

  py::class_<PyModel>(m, "Model")
      .def_static("load", &PyModel::Load, py::arg("path"))
      .def("save", &PyModel::Save, py::arg("path"))
      .def("predict", &PyModel::Predict, py::arg("question"), py::arg("headers"))
      .def("predict_file", &PyModel::PredictFile, py::arg("test"), py::arg("tables"))
      .def("config", &PyModel::Config)
      .def_property_readonly("parameter_count", &PyModel::ParameterCount);
}
