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

#include "zsql/training.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "zsql/evaluation.h"

namespace zsql {

void TrainConfig::Validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size <= 0 || max_epochs <= 0 || patience <= 0) {
    throw std::invalid_argument("batch_size, max_epochs and patience must be positive");
  }
}

double CrossEntropy(std::span<const Vector> distributions, std::span<const int> labels) {
  if (distributions.size() != labels.size()) {
    throw std::invalid_argument("one label per distribution required");
  }
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= distributions[i].size()) {
      throw std::out_of_range("label " + std::to_string(labels[i]) + " outside a " +
                              std::to_string(distributions[i].size()) + "-way distribution");
    }
    total -= std::log(distributions[i](labels[i]));
  }
  return total;
}

namespace {

Var Nll(Var scores, int label) {
  return ad::Scale(ad::Pick(ad::LogSoftmaxCols(scores), label), -1.0);
}

}  // namespace

Var GenLoss(Graph& g, const ForwardOutput& out, const SQLQuery& gold,
            const SupervisionLabels& labels) {
  (void)g;
  std::vector<Var> terms;
  terms.push_back(Nll(out.agg_scores, gold.agg));
  terms.push_back(Nll(out.sel_scores, gold.sel));
  terms.push_back(Nll(out.sketch_scores, labels.sketch_id));
  if (out.conditions.size() != gold.conditions.size()) {
    throw std::invalid_argument("decoder ran for a different number of conditions");
  }
  for (size_t i = 0; i < out.conditions.size(); ++i) {
    const auto& c = out.conditions[i];
    terms.push_back(Nll(c.column_scores, gold.conditions[i].column));
    terms.push_back(Nll(c.left_scores, labels.value_spans.at(i).left));
    terms.push_back(Nll(c.right_scores, labels.value_spans.at(i).right));
  }
  return ad::SumAll(terms);
}

Var MapLoss(Graph& g, const ForwardOutput& out, const SupervisionLabels& labels) {
  (void)g;
  std::vector<Var> terms;
  Var log_tags = ad::LogSoftmaxCols(out.tag_scores);
  if (static_cast<size_t>(log_tags.cols()) != labels.tags.size()) {
    throw std::invalid_argument("tag sequence length mismatch");
  }
  for (size_t t = 0; t < labels.tags.size(); ++t) {
    terms.push_back(ad::Scale(
        ad::Pick(log_tags, static_cast<int>(labels.tags[t]), static_cast<Eigen::Index>(t)), -1.0));
  }
  for (const auto& [pos, scores] : out.mapping_scores) {
    const int target = labels.mapping_targets.at(pos);
    if (target < 0) continue;
    terms.push_back(Nll(scores, target));
  }
  return ad::SumAll(terms);
}

double TotalLoss(double gen, double map, double lambda) {
  return lambda * gen + (1.0 - lambda) * map;
}

Var TotalLoss(Var gen, Var map, double lambda) {
  return ad::Add(ad::Scale(gen, lambda), ad::Scale(map, 1.0 - lambda));
}

std::vector<TrainingItem> PrepareItems(const std::vector<Example>& examples,
                                       const SketchVocabulary& vocab,
                                       std::vector<size_t>* skipped) {
  std::vector<TrainingItem> items;
  items.reserve(examples.size());
  for (size_t i = 0; i < examples.size(); ++i) {
    auto r = DeriveLabels(examples[i], vocab);
    if (r.skipped()) {
      if (skipped) skipped->push_back(i);
      continue;
    }
    items.push_back({&examples[i], std::move(*r.labels)});
  }
  return items;
}

LossBreakdown AccumulateExample(Model& model, const TrainingItem& item, double lambda,
                                double weight, DropoutContext& drop) {
  Graph g;
  Teacher teacher{&item.example->gold, &item.labels};
  auto out = model.Forward(g, *item.example, &teacher, drop);
  Var gen = GenLoss(g, out, item.example->gold, item.labels);
  Var map = MapLoss(g, out, item.labels);
  Var total = TotalLoss(gen, map, lambda);
  LossBreakdown b{gen.scalar(), map.scalar(), total.scalar(), lambda};
  if (!std::isfinite(b.total)) return b;
  g.Backward(ad::Scale(total, weight));
  return b;
}

LossBreakdown TrainStep(Model& model, Adam& adam, std::span<const TrainingItem> batch,
                        const TrainConfig& config, Rng& rng) {
  LossBreakdown mean{0, 0, 0, config.lambda};
  if (batch.empty()) return mean;
  auto& params = model.params();
  params.ZeroGrad();
  DropoutContext drop{model.config().dropout, &rng};
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& item : batch) {
    const auto b = AccumulateExample(model, item, config.lambda, w, drop);
    mean.gen += w * b.gen;
    mean.map += w * b.map;
    mean.total += w * b.total;
  }
  if (!std::isfinite(mean.total)) return mean;
  const double norm = params.GradNorm();
  if (config.clip_norm > 0.0 && norm > config.clip_norm) {
    params.ScaleGrad(config.clip_norm / norm);
  }
  adam.Step(params);
  return mean;
}

LossBreakdown EvaluateLoss(const Model& model, std::span<const TrainingItem> items,
                           double lambda) {
  LossBreakdown mean{0, 0, 0, lambda};
  if (items.empty()) return mean;
  DropoutContext none;
  for (const auto& item : items) {
    Graph g(false);
    Teacher teacher{&item.example->gold, &item.labels};
    auto out = model.Forward(g, *item.example, &teacher, none);
    const double gen = GenLoss(g, out, item.example->gold, item.labels).scalar();
    const double map = MapLoss(g, out, item.labels).scalar();
    mean.gen += gen;
    mean.map += map;
    mean.total += TotalLoss(gen, map, lambda);
  }
  const double n = static_cast<double>(items.size());
  mean.gen /= n;
  mean.map /= n;
  mean.total /= n;
  return mean;
}

double QueryMatchAccuracy(const Model& model, const std::vector<Example>& examples) {
  if (examples.empty()) return 0.0;
  size_t correct = 0;
  for (const auto& e : examples) {
    const auto q = PredictionToQuery(model.Predict(e), e.question_tokens);
    correct += QueryMatch(q, e.gold);
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

TrainResult Train(Model& model, const std::vector<Example>& train,
                  const std::vector<Example>& dev, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  config.Validate();
  TrainResult result;
  std::vector<size_t> skipped;
  const auto items = PrepareItems(train, model.vocab().sketches, &skipped);
  result.skipped_examples = skipped.size();
  if (items.empty()) throw TrainingError("no trainable examples");
  const auto& selection = dev.empty() ? train : dev;

  Rng rng(config.seed);
  Adam adam({config.learning_rate, 0.9, 0.999, 1e-8, config.weight_decay});
  std::vector<size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Matrix> best = model.params().Snapshot();
  int stale = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
    EpochLog log;
    log.epoch = epoch;
    size_t batch_index = 0;
    for (size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<TrainingItem> batch;
      batch.reserve(end - start);
      for (size_t k = start; k < end; ++k) batch.push_back(items[order[k]]);
      const auto b = TrainStep(model, adam, batch, config, rng);
      if (!std::isfinite(b.total) || !std::isfinite(b.gen) || !std::isfinite(b.map)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " batch " << batch_index;
        throw TrainingError(msg.str());
      }
      const double share = static_cast<double>(end - start) / static_cast<double>(order.size());
      log.gen += share * b.gen;
      log.map += share * b.map;
      log.total += share * b.total;
    }
    log.dev_acc_qm = QueryMatchAccuracy(model, selection);
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (log.dev_acc_qm > result.best_dev_acc_qm) {
      result.best_dev_acc_qm = log.dev_acc_qm;
      result.best_epoch = epoch;
      best = model.params().Snapshot();
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  model.params().Restore(best);
  return result;
}

}  // namespace zsql
