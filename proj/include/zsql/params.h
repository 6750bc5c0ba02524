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

#ifndef ZSQL_PARAMS_H_
#define ZSQL_PARAMS_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "zsql/autodiff.h"

namespace zsql {

// Owns named parameters in creation order; addresses stay stable.
class ParameterStore {
 public:
  Parameter& Create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                    bool trainable = true);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  size_t size() const { return params_.size(); }
  Parameter& operator[](size_t i) { return *params_[i]; }
  const Parameter& operator[](size_t i) const { return *params_[i]; }

  // Total scalar count, frozen parameters included.
  int64_t ScalarCount() const;

  void ZeroGrad();
  // Global L2 norm of all gradients.
  double GradNorm() const;
  void ScaleGrad(double factor);

  std::vector<Matrix> Snapshot() const;
  void Restore(const std::vector<Matrix>& values);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, size_t> index_;
};

// Deterministic random source. Values are derived from the raw 64-bit stream
// so they do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  uint64_t Next();
  double Uniform();  // [0, 1)
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  uint64_t Below(uint64_t n);

 private:
  uint64_t state_;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

class Adam {
 public:
  explicit Adam(AdamOptions options) : options_(options) {}

  // Applies one update from the accumulated gradients. Parameters gathered by
  // row (embeddings) only update the rows that received gradient.
  void Step(ParameterStore& params);

 private:
  AdamOptions options_;
  int64_t step_ = 0;
  std::map<const Parameter*, std::pair<Matrix, Matrix>> moments_;
};

}  // namespace zsql

#endif  // ZSQL_PARAMS_H_
