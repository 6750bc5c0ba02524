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

#ifndef ZSQL_TRAINING_H_
#define ZSQL_TRAINING_H_

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "zsql/model.h"

namespace zsql {

struct TrainConfig {
  double lambda = 0.5;  // weight of the generation loss
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  double weight_decay = 0.0;
  int batch_size = 64;
  int max_epochs = 30;
  int patience = 5;  // non-improving dev epochs before stopping
  uint64_t seed = 20190901;

  void Validate() const;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sum of -log p[label] over independent decision slots. Throws
// std::out_of_range when a label is outside its distribution.
double CrossEntropy(std::span<const Vector> distributions, std::span<const int> labels);

// Generation loss of one teacher-forced pass: agg, sel, sketch and, per
// condition, column, left end and right end given the left end.
Var GenLoss(Graph& g, const ForwardOutput& out, const SQLQuery& gold,
            const SupervisionLabels& labels);

// Tag NLL over every question token plus mapping NLL over the gold value
// tokens.
Var MapLoss(Graph& g, const ForwardOutput& out, const SupervisionLabels& labels);

double TotalLoss(double gen, double map, double lambda);
Var TotalLoss(Var gen, Var map, double lambda);

struct LossBreakdown {
  double gen = 0.0;
  double map = 0.0;
  double total = 0.0;
  double lambda = 0.5;
};

// An example with its derived supervision.
struct TrainingItem {
  const Example* example = nullptr;
  SupervisionLabels labels;
};

// Items for every non-skipped example. `skipped` (optional) receives the
// indices that were left out.
std::vector<TrainingItem> PrepareItems(const std::vector<Example>& examples,
                                       const SketchVocabulary& vocab,
                                       std::vector<size_t>* skipped = nullptr);

// Forward + backward of one example; gradients are added to the model's
// parameters scaled by `weight`.
LossBreakdown AccumulateExample(Model& model, const TrainingItem& item, double lambda,
                                double weight, DropoutContext& drop);

// Zeroes gradients, accumulates the batch mean, clips and applies one Adam
// step. Returns the batch-mean losses.
LossBreakdown TrainStep(Model& model, Adam& adam, std::span<const TrainingItem> batch,
                        const TrainConfig& config, Rng& rng);

// Mean losses with dropout off and no parameter update.
LossBreakdown EvaluateLoss(const Model& model, std::span<const TrainingItem> items,
                           double lambda);

double QueryMatchAccuracy(const Model& model, const std::vector<Example>& examples);

struct EpochLog {
  int epoch = 0;
  double gen = 0.0;
  double map = 0.0;
  double total = 0.0;
  double dev_acc_qm = 0.0;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_dev_acc_qm = -1.0;
  size_t skipped_examples = 0;
};

// Trains in place. On return the model holds the parameters of the best dev
// epoch. `on_epoch` (optional) sees every log entry as it is produced.
TrainResult Train(Model& model, const std::vector<Example>& train,
                  const std::vector<Example>& dev, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace zsql

#endif  // ZSQL_TRAINING_H_
