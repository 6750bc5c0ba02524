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

#include "zsql/params.h"

#include <cmath>
#include <stdexcept>

namespace zsql {

Parameter& ParameterStore::Create(const std::string& name, Eigen::Index rows,
                                  Eigen::Index cols, bool trainable) {
  if (index_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->trainable = trainable;
  index_.emplace(name, params_.size());
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter " + name);
  return *params_[it->second];
}

int64_t ParameterStore::ScalarCount() const {
  int64_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void ParameterStore::ZeroGrad() {
  for (auto& p : params_) {
    if (p->trainable) p->ZeroGrad();
  }
}

double ParameterStore::GradNorm() const {
  double sq = 0.0;
  for (const auto& p : params_) {
    if (p->trainable && p->grad.size() > 0) sq += p->grad.squaredNorm();
  }
  return std::sqrt(sq);
}

void ParameterStore::ScaleGrad(double factor) {
  for (auto& p : params_) {
    if (p->trainable && p->grad.size() > 0) p->grad *= factor;
  }
}

std::vector<Matrix> ParameterStore::Snapshot() const {
  std::vector<Matrix> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p->value);
  return out;
}

void ParameterStore::Restore(const std::vector<Matrix>& values) {
  if (values.size() != params_.size()) throw std::invalid_argument("snapshot size mismatch");
  for (size_t i = 0; i < values.size(); ++i) params_[i]->value = values[i];
}

uint64_t Rng::Next() {
  // splitmix64
  uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

uint64_t Rng::Below(uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::Below(0)");
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = Next();
  } while (x >= limit);
  return x % n;
}

void Adam::Step(ParameterStore& params) {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  const double lr = options_.learning_rate;
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (!p.trainable || p.grad.size() == 0) continue;
    auto& [m, v] = moments_[&p];
    if (m.size() == 0) {
      m = Matrix::Zero(p.value.rows(), p.value.cols());
      v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    Matrix decayed;
    const Matrix* gp = &p.grad;
    if (options_.weight_decay > 0.0) {
      decayed = p.grad + options_.weight_decay * p.value;
      gp = &decayed;
    }
    const Matrix& g = *gp;
    auto update_rows = [&](Eigen::Index r0, Eigen::Index n) {
      m.middleRows(r0, n) = b1 * m.middleRows(r0, n) + (1.0 - b1) * g.middleRows(r0, n);
      v.middleRows(r0, n) =
          b2 * v.middleRows(r0, n) + (1.0 - b2) * g.middleRows(r0, n).cwiseAbs2();
      p.value.middleRows(r0, n).array() -=
          lr * (m.middleRows(r0, n).array() / c1) /
          ((v.middleRows(r0, n).array() / c2).sqrt() + options_.epsilon);
    };
    if (p.touched_rows.empty()) {
      update_rows(0, p.value.rows());
    } else {
      for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
        if (p.touched_rows[r]) update_rows(r, 1);
      }
    }
  }
}

}  // namespace zsql
