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

// zsql: command-line pipelines for splitting, labeling, training,
// prediction, evaluation and error analysis.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "zsql/checkpoint.h"
#include "zsql/config.h"
#include "zsql/dataset.h"
#include "zsql/evaluation.h"
#include "zsql/labels.h"
#include "zsql/manifest.h"
#include "zsql/model.h"
#include "zsql/training.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace zsql {
namespace {

constexpr uint64_t kDefaultSeed = 20190901;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string train, dev, test, out, config, checkpoint, predictions, embeddings, ops,
      bucket, examples;
  std::vector<std::string> tables;
  std::vector<std::string> overrides;  // key=value
  uint64_t seed = kDefaultSeed;
  std::optional<double> lambda;
  int sample = 0;
};

void Require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string("missing required flag ") + flag);
}

TableMap LoadAllTables(const Options& o, RunManifest& manifest) {
  if (o.tables.empty()) throw UsageError("missing required flag --tables");
  TableMap tables;
  for (const auto& path : o.tables) {
    MergeTables(tables, LoadTables(path));
    manifest.AddInput("tables", path);
  }
  return tables;
}

std::vector<Example> LoadInput(const std::string& path, const char* role, const TableMap& tables,
                               RunManifest& manifest) {
  auto examples = LoadExamples(path, tables);
  manifest.AddInput(role, path);
  return examples;
}

OperatorVocabulary LoadOps(const Options& o, RunManifest& manifest) {
  if (o.ops.empty()) return {};
  manifest.AddInput("ops", o.ops);
  return LoadOperatorVocabulary(o.ops);
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

fs::path ManifestPath(const fs::path& out) {
  if (fs::is_directory(out)) return out / "manifest.json";
  return fs::path(out.string() + ".manifest.json");
}

void EnsureDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
}

// Restricts `test` to one bucket of the split when --bucket is given.
std::vector<size_t> SelectIndices(const Options& o, const std::vector<Example>& test,
                                  const BucketSplit* split) {
  std::vector<size_t> idx(test.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (o.bucket.empty()) return idx;
  if (!split) throw UsageError("--bucket needs --train to compute shot counts");
  for (const auto& b : split->buckets) {
    if (b.name == o.bucket) return b.indices;
  }
  throw UsageError("unknown bucket '" + o.bucket + "'");
}

// ---------------------------------------------------------------------------

int PrepareSplits(const Options& o) {
  Require(o.train, "--train");
  Require(o.test, "--test");
  Require(o.out, "--out");
  RunManifest manifest("prepare-splits");
  manifest.SetSeed(o.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto train = LoadInput(o.train, "train", tables, manifest);
  const auto test = LoadInput(o.test, "test", tables, manifest);
  const auto counts = CountShots(train, test);
  const auto split = SplitByShots(test, counts);

  std::map<int, size_t> histogram;
  for (const auto& e : test) ++histogram[counts.at(e.schema.schema_key)];
  json hist = json::array();
  for (const auto& [shots, n] : histogram) hist.push_back({{"shots", shots}, {"examples", n}});

  EnsureDir(o.out);
  const fs::path buckets_path = fs::path(o.out) / "buckets.json";
  const fs::path hist_path = fs::path(o.out) / "shot_histogram.json";
  WriteJsonFile(buckets_path, BucketManifestToJson(split));
  WriteJsonFile(hist_path, hist);
  manifest.AddOutput("buckets", buckets_path);
  manifest.AddOutput("histogram", hist_path);
  manifest.Write(ManifestPath(o.out));

  for (const auto& b : split.buckets) std::cout << b.name << "\t" << b.indices.size() << "\n";
  std::cout << "total\t" << test.size() << "\n";
  return 0;
}

int DeriveLabelsCmd(const Options& o) {
  Require(o.train, "--train");
  Require(o.out, "--out");
  RunManifest manifest("derive-labels");
  manifest.SetSeed(o.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto train = LoadInput(o.train, "train", tables, manifest);
  const auto examples =
      o.examples.empty() ? train : LoadInput(o.examples, "examples", tables, manifest);
  const auto vocab = BuildSketchVocabulary(train);

  std::ofstream out(o.out, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + o.out);
  size_t labeled = 0;
  std::map<std::string, size_t> reasons;
  for (size_t i = 0; i < examples.size(); ++i) {
    const auto r = DeriveLabels(examples[i], vocab);
    out << LabelRecordToJson(i, r).dump() << "\n";
    if (r.skipped()) {
      ++reasons[r.skip_reason.substr(0, r.skip_reason.find(':'))];
    } else {
      ++labeled;
    }
  }
  out.close();
  const json report = {{"labeled", labeled},
                       {"skipped", examples.size() - labeled},
                       {"skip_reasons", reasons},
                       {"sketch_classes", vocab.size()}};
  const fs::path report_path = o.out + ".skips.json";
  WriteJsonFile(report_path, report);
  manifest.AddOutput("labels", o.out);
  manifest.AddOutput("skip_report", report_path);
  manifest.Write(ManifestPath(o.out));
  std::cout << report.dump() << "\n";
  return 0;
}

RunConfig ResolveConfig(const Options& o) {
  RunConfig config = o.config.empty() ? RunConfig{} : LoadConfigFile(o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    SetConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  config.train.seed = o.seed;
  if (o.lambda) config.train.lambda = *o.lambda;
  config.model.Validate();
  config.train.Validate();
  return config;
}

std::vector<std::string> QuestionAndColumnTokens(const std::vector<Example>& examples) {
  std::vector<std::string> tokens;
  for (const auto& e : examples) {
    tokens.insert(tokens.end(), e.question_tokens.begin(), e.question_tokens.end());
    for (const auto& col : e.schema.column_names) tokens.insert(tokens.end(), col.begin(), col.end());
  }
  return tokens;
}

int TrainCmd(const Options& o) {
  Require(o.train, "--train");
  Require(o.out, "--out");
  RunManifest manifest("train");
  const RunConfig config = ResolveConfig(o);
  manifest.SetConfig(ConfigToJson(config));
  manifest.SetSeed(config.train.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto train = LoadInput(o.train, "train", tables, manifest);
  const auto dev = o.dev.empty() ? std::vector<Example>{}
                                 : LoadInput(o.dev, "dev", tables, manifest);
  auto ops = LoadOps(o, manifest);
  ValidateOperatorIds(train, ops);

  std::optional<PretrainedEmbeddings> pretrained;
  if (!o.embeddings.empty()) {
    const auto tokens = QuestionAndColumnTokens(train);
    const std::unordered_set<std::string> keep(tokens.begin(), tokens.end());
    pretrained = LoadPretrainedEmbeddings(o.embeddings, config.model.embedding_dim, &keep);
    manifest.AddInput("embeddings", o.embeddings);
  }
  auto vocab = BuildModelVocab(train, {}, pretrained ? &*pretrained : nullptr, std::move(ops),
                               BuildSketchVocabulary(train));
  Model model(config.model, std::move(vocab), config.train.seed,
              pretrained ? &*pretrained : nullptr);

  EnsureDir(o.out);
  const fs::path log_path = fs::path(o.out) / "train_log.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  const auto result = Train(model, train, dev, config.train, [&](const EpochLog& e) {
    const json rec = {{"epoch", e.epoch}, {"L_gen", e.gen},           {"L_map", e.map},
                      {"L_total", e.total}, {"dev_acc_qm", e.dev_acc_qm}};
    log << rec.dump() << "\n";
    log.flush();
    std::cerr << rec.dump() << "\n";
  });
  log.close();

  const fs::path ckpt = fs::path(o.out) / "model.ckpt";
  SaveCheckpoint(ckpt, model, config);
  manifest.AddOutput("checkpoint", ckpt);
  manifest.AddOutput("log", log_path);
  manifest.Write(ManifestPath(o.out));
  std::cout << json{{"best_epoch", result.best_epoch},
                    {"best_dev_acc_qm", result.best_dev_acc_qm},
                    {"skipped_examples", result.skipped_examples},
                    {"checkpoint", ckpt.string()}}
                   .dump()
            << "\n";
  return 0;
}

std::vector<SQLQuery> PredictAll(const Model& model, const std::vector<Example>& test) {
  std::vector<SQLQuery> preds;
  preds.reserve(test.size());
  for (const auto& e : test) preds.push_back(PredictionToQuery(model.Predict(e), e.question_tokens));
  return preds;
}

LoadedCheckpoint LoadModel(const Options& o, RunManifest& manifest) {
  auto loaded = LoadCheckpoint(o.checkpoint);
  manifest.AddInput("checkpoint", o.checkpoint);
  manifest.SetConfig(ConfigToJson(loaded.config));
  if (!o.embeddings.empty()) {
    loaded.model->SetFallbackEmbeddings(
        LoadPretrainedEmbeddings(o.embeddings, loaded.config.model.embedding_dim, nullptr));
    manifest.AddInput("embeddings", o.embeddings);
  }
  return loaded;
}

int PredictCmd(const Options& o) {
  Require(o.checkpoint, "--checkpoint");
  Require(o.test, "--test");
  Require(o.out, "--out");
  RunManifest manifest("predict");
  manifest.SetSeed(o.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto test = LoadInput(o.test, "test", tables, manifest);
  const auto loaded = LoadModel(o, manifest);
  WritePredictions(o.out, PredictAll(*loaded.model, test));
  manifest.AddOutput("predictions", o.out);
  manifest.Write(ManifestPath(o.out));
  return 0;
}

int EvaluateCmd(const Options& o) {
  Require(o.test, "--test");
  Require(o.out, "--out");
  if (o.checkpoint.empty() == o.predictions.empty()) {
    throw UsageError("exactly one of --checkpoint or --predictions is required");
  }
  RunManifest manifest("evaluate");
  manifest.SetSeed(o.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto test = LoadInput(o.test, "test", tables, manifest);

  std::vector<SQLQuery> preds;
  OperatorVocabulary ops;
  std::optional<SketchVocabulary> model_sketches;
  if (!o.checkpoint.empty()) {
    const auto loaded = LoadModel(o, manifest);
    preds = PredictAll(*loaded.model, test);
    ops = loaded.model->vocab().ops;
    model_sketches = loaded.model->vocab().sketches;
  } else {
    preds = ReadPredictions(o.predictions, test.size());
    manifest.AddInput("predictions", o.predictions);
    ops = LoadOps(o, manifest);
  }

  std::optional<std::vector<Example>> train;
  std::optional<BucketSplit> split;
  std::optional<ColumnInventory> inventory;
  if (!o.train.empty()) {
    train = LoadInput(o.train, "train", tables, manifest);
    split = SplitByShots(test, CountShots(*train, test));
    inventory = BuildColumnInventory(*train);
    if (!model_sketches) model_sketches = BuildSketchVocabulary(*train);
  }

  const auto keep = SelectIndices(o, test, split ? &*split : nullptr);
  std::vector<Example> subset;
  std::vector<SQLQuery> sub_preds;
  for (size_t i : keep) {
    subset.push_back(test[i]);
    sub_preds.push_back(preds[i]);
  }
  std::optional<BucketSplit> sub_split;
  if (train) sub_split = SplitByShots(subset, CountShots(*train, subset));

  EvalInputs inputs;
  inputs.test = &subset;
  inputs.tables = &tables;
  inputs.ops = &ops;
  inputs.buckets = sub_split ? &*sub_split : nullptr;
  inputs.inventory = inventory ? &*inventory : nullptr;
  inputs.sketches = model_sketches ? &*model_sketches : nullptr;
  const auto report = Evaluate(sub_preds, inputs);

  json j = ReportToJson(report);
  if (!o.bucket.empty()) j["bucket"] = o.bucket;
  WriteJsonFile(o.out, j);
  const fs::path text_path = o.out + ".txt";
  {
    std::ofstream text(text_path, std::ios::trunc);
    text << ReportToText(report);
  }
  manifest.AddOutput("report", o.out);
  manifest.AddOutput("report_text", text_path);
  manifest.Write(ManifestPath(o.out));
  std::cout << ReportToText(report);
  return 0;
}

int AnalyzeErrorsCmd(const Options& o) {
  Require(o.test, "--test");
  Require(o.predictions, "--predictions");
  Require(o.out, "--out");
  RunManifest manifest("analyze-errors");
  manifest.SetSeed(o.seed);
  const auto tables = LoadAllTables(o, manifest);
  const auto test = LoadInput(o.test, "test", tables, manifest);
  const auto preds = ReadPredictions(o.predictions, test.size());
  manifest.AddInput("predictions", o.predictions);

  std::vector<size_t> wrong;
  for (size_t i = 0; i < test.size(); ++i) {
    if (!WhereMatch(preds[i], test[i].gold)) wrong.push_back(i);
  }
  // Seeded sample without replacement, reported in ascending order.
  if (o.sample > 0 && static_cast<size_t>(o.sample) < wrong.size()) {
    Rng rng(o.seed);
    for (size_t i = 0; i < static_cast<size_t>(o.sample); ++i) {
      std::swap(wrong[i], wrong[i + rng.Below(wrong.size() - i)]);
    }
    wrong.resize(static_cast<size_t>(o.sample));
    std::sort(wrong.begin(), wrong.end());
  }

  std::map<std::string, size_t> tallies;
  for (int c = 0; c < kErrorCategoryCount; ++c) {
    tallies[std::string(ErrorCategoryName(static_cast<ErrorCategory>(c)))] = 0;
  }
  json records = json::array();
  for (size_t i : wrong) {
    json cats = json::array();
    for (auto c : CategorizeErrors(preds[i], test[i].gold)) {
      ++tallies[std::string(ErrorCategoryName(c))];
      cats.push_back(ErrorCategoryName(c));
    }
    records.push_back({{"index", i}, {"categories", cats}});
  }
  const json result = {{"examined", wrong.size()}, {"tallies", tallies}, {"examples", records}};
  WriteJsonFile(o.out, result);
  manifest.AddOutput("errors", o.out);
  manifest.Write(ManifestPath(o.out));
  std::cout << json{{"examined", wrong.size()}, {"tallies", tallies}}.dump() << "\n";
  return 0;
}

std::string OneLine(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace
}  // namespace zsql

int main(int argc, char** argv) {
  using namespace zsql;
  CLI::App app{"Schema-aware text-to-SQL: splits, labels, training and evaluation"};
  app.require_subcommand(1);
  Options o;

  auto add_tables = [&](CLI::App* c) {
    c->add_option("--tables", o.tables, "Table file (repeatable)")->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* c) {
    c->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  };

  auto* prep = app.add_subcommand("prepare-splits", "Split the test set by shot count");
  prep->add_option("--train", o.train, "Training examples")->check(CLI::ExistingFile);
  prep->add_option("--test", o.test, "Test examples")->check(CLI::ExistingFile);
  prep->add_option("--out", o.out, "Output directory");
  add_tables(prep);
  add_seed(prep);

  auto* labels = app.add_subcommand("derive-labels", "Derive sketch, span and tag supervision");
  labels->add_option("--train", o.train, "Training examples (sketch vocabulary)")
      ->check(CLI::ExistingFile);
  labels->add_option("--examples", o.examples, "Examples to label (default: --train)")
      ->check(CLI::ExistingFile);
  labels->add_option("--out", o.out, "Label records (JSON lines)");
  add_tables(labels);
  add_seed(labels);

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--train", o.train, "Training examples")->check(CLI::ExistingFile);
  train->add_option("--dev", o.dev, "Validation examples")->check(CLI::ExistingFile);
  train->add_option("--config", o.config, "key = value config file")->check(CLI::ExistingFile);
  train->add_option("--set", o.overrides, "Config override key=value (repeatable)");
  train->add_option("--lambda", o.lambda, "Generation loss weight");
  train->add_option("--embeddings", o.embeddings, "Pretrained word vectors (text)")
      ->check(CLI::ExistingFile);
  train->add_option("--ops", o.ops, "Operator vocabulary JSON")->check(CLI::ExistingFile);
  train->add_option("--out", o.out, "Output directory");
  add_tables(train);
  add_seed(train);

  auto* predict = app.add_subcommand("predict", "Write predictions for a test file");
  predict->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  predict->add_option("--test", o.test, "Test examples")->check(CLI::ExistingFile);
  predict->add_option("--embeddings", o.embeddings, "Vectors for unseen words")
      ->check(CLI::ExistingFile);
  predict->add_option("--out", o.out, "Prediction file");
  add_tables(predict);
  add_seed(predict);

  auto* eval = app.add_subcommand("evaluate", "Score a checkpoint or a prediction file");
  eval->add_option("--checkpoint", o.checkpoint, "Model checkpoint")->check(CLI::ExistingFile);
  eval->add_option("--predictions", o.predictions, "Prediction file")->check(CLI::ExistingFile);
  eval->add_option("--test", o.test, "Test examples")->check(CLI::ExistingFile);
  eval->add_option("--train", o.train, "Training examples (buckets, seen columns)")
      ->check(CLI::ExistingFile);
  eval->add_option("--bucket", o.bucket, "Only score this bucket (e.g. W-0)");
  eval->add_option("--embeddings", o.embeddings, "Vectors for unseen words")
      ->check(CLI::ExistingFile);
  eval->add_option("--ops", o.ops, "Operator vocabulary JSON")->check(CLI::ExistingFile);
  eval->add_option("--out", o.out, "Report (JSON); text copy at <out>.txt");
  add_tables(eval);
  add_seed(eval);

  auto* errors = app.add_subcommand("analyze-errors", "Categorize wrong WHERE clauses");
  errors->add_option("--predictions", o.predictions, "Prediction file")->check(CLI::ExistingFile);
  errors->add_option("--test", o.test, "Gold examples")->check(CLI::ExistingFile);
  errors->add_option("--sample", o.sample, "Examine a seeded sample of this many errors");
  errors->add_option("--out", o.out, "Category report (JSON)");
  add_tables(errors);
  add_seed(errors);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", OneLine(e.what())}}.dump() << "\n";
    return 2;
  }

  try {
    if (*prep) return PrepareSplits(o);
    if (*labels) return DeriveLabelsCmd(o);
    if (*train) return TrainCmd(o);
    if (*predict) return PredictCmd(o);
    if (*eval) return EvaluateCmd(o);
    if (*errors) return AnalyzeErrorsCmd(o);
  } catch (const UsageError& e) {
    std::cerr << json{{"error", "usage"}, {"message", OneLine(e.what())}}.dump() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << json{{"error", "data"}, {"message", OneLine(e.what())}}.dump() << "\n";
    return 3;
  } catch (const TrainingError& e) {
    std::cerr << json{{"error", "training"}, {"message", OneLine(e.what())}}.dump() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "runtime"}, {"message", OneLine(e.what())}}.dump() << "\n";
    return 1;
  }
  return 1;
}
