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

#include "zsql/autodiff.h"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace zsql {

void Parameter::ZeroGrad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad.setZero(value.rows(), value.cols());
  } else if (touched_rows.empty()) {
    grad.setZero();
  } else {
    for (size_t r = 0; r < touched_rows.size(); ++r) {
      if (touched_rows[r]) grad.row(static_cast<Eigen::Index>(r)).setZero();
    }
  }
  std::fill(touched_rows.begin(), touched_rows.end(), 0);
}

const Matrix& Var::value() const { return graph->value(id); }

Var Graph::Add(Matrix value, bool requires_grad, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Var Graph::Constant(Matrix value) { return Add(std::move(value), false, nullptr); }

Var Graph::Param(const Parameter& p) {
  for (const auto& [param, id] : param_nodes_) {
    if (param == &p) return Var{this, id};
  }
  Node n;
  n.external = &p.value;
  n.requires_grad = track_gradients_ && p.trainable;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size() - 1);
  // Written to only when gradients are tracked.
  param_nodes_.emplace_back(const_cast<Parameter*>(&p), id);
  return Var{this, id};
}

void Graph::Accumulate(int id, const Matrix& grad) { AccumulateExpr(id, grad); }

void Graph::Backward(Var loss) {
  if (loss.graph != this) throw std::invalid_argument("loss from another graph");
  if (value(loss.id).size() != 1) {
    throw std::invalid_argument("Backward needs a 1 x 1 loss");
  }
  if (!nodes_[loss.id].requires_grad) return;
  nodes_[loss.id].grad = Matrix::Ones(1, 1);
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, n.grad, n.external != nullptr ? *n.external : n.value);
  }
  for (auto& [param, id] : param_nodes_) {
    const Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (param->grad.size() == 0) param->grad.setZero(param->value.rows(), param->value.cols());
    param->grad += n.grad;
  }
}

namespace ad {
namespace {

Graph& G(Var a) { return *a.graph; }

bool AnyGrad(std::initializer_list<Var> vs) {
  for (Var v : vs) {
    if (v.graph->requires_grad(v.id)) return true;
  }
  return false;
}

}  // namespace

Var MatMul(Var a, Var b) {
  assert(a.cols() == b.rows());
  const int ia = a.id, ib = b.id;
  return G(a).Add(a.value() * b.value(), AnyGrad({a, b}),
                  [ia, ib](Graph& g, const Matrix& d, const Matrix&) {
                    if (g.requires_grad(ia)) g.AccumulateExpr(ia, d * g.value(ib).transpose());
                    if (g.requires_grad(ib)) g.AccumulateExpr(ib, g.value(ia).transpose() * d);
                  });
}

Var Add(Var a, Var b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  const int ia = a.id, ib = b.id;
  return G(a).Add(a.value() + b.value(), AnyGrad({a, b}),
                  [ia, ib](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(ia, d);
                    g.AccumulateExpr(ib, d);
                  });
}

Var Sub(Var a, Var b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  const int ia = a.id, ib = b.id;
  return G(a).Add(a.value() - b.value(), AnyGrad({a, b}),
                  [ia, ib](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(ia, d);
                    g.AccumulateExpr(ib, -d);
                  });
}

Var CMul(Var a, Var b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  const int ia = a.id, ib = b.id;
  return G(a).Add(a.value().cwiseProduct(b.value()), AnyGrad({a, b}),
                  [ia, ib](Graph& g, const Matrix& d, const Matrix&) {
                    if (g.requires_grad(ia)) g.AccumulateExpr(ia, d.cwiseProduct(g.value(ib)));
                    if (g.requires_grad(ib)) g.AccumulateExpr(ib, d.cwiseProduct(g.value(ia)));
                  });
}

Var Scale(Var a, double s) {
  const int ia = a.id;
  return G(a).Add(a.value() * s, AnyGrad({a}),
                  [ia, s](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(ia, d * s);
                  });
}

Var AddColumn(Var m, Var col) {
  assert(col.cols() == 1 && col.rows() == m.rows());
  const int im = m.id, ic = col.id;
  Matrix out = m.value().colwise() + col.value().col(0);
  return G(m).Add(std::move(out), AnyGrad({m, col}),
                  [im, ic](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(im, d);
                    if (g.requires_grad(ic)) g.AccumulateExpr(ic, d.rowwise().sum());
                  });
}

Var AddRow(Var m, Var row) {
  assert(row.rows() == 1 && row.cols() == m.cols());
  const int im = m.id, ir = row.id;
  Matrix out = m.value().rowwise() + row.value().row(0);
  return G(m).Add(std::move(out), AnyGrad({m, row}),
                  [im, ir](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(im, d);
                    if (g.requires_grad(ir)) g.AccumulateExpr(ir, d.colwise().sum());
                  });
}

Var MulColumn(Var m, Var col) {
  assert(col.cols() == 1 && col.rows() == m.rows());
  const int im = m.id, ic = col.id;
  Matrix out = m.value().array().colwise() * col.value().col(0).array();
  return G(m).Add(std::move(out), AnyGrad({m, col}),
                  [im, ic](Graph& g, const Matrix& d, const Matrix&) {
                    const Matrix& c = g.value(ic);
                    if (g.requires_grad(im)) {
                      g.AccumulateExpr(im, (d.array().colwise() * c.col(0).array()).matrix());
                    }
                    if (g.requires_grad(ic)) {
                      g.AccumulateExpr(ic, d.cwiseProduct(g.value(im)).rowwise().sum());
                    }
                  });
}

Var Tanh(Var a) {
  const int ia = a.id;
  return G(a).Add(a.value().array().tanh().matrix(), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix& y) {
                    g.AccumulateExpr(ia, (d.array() * (1.0 - y.array().square())).matrix());
                  });
}

Var Sigmoid(Var a) {
  const int ia = a.id;
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return G(a).Add(std::move(y), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix& y) {
                    g.AccumulateExpr(ia, (d.array() * y.array() * (1.0 - y.array())).matrix());
                  });
}

Var Transpose(Var a) {
  const int ia = a.id;
  return G(a).Add(a.value().transpose(), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix&) {
                    g.AccumulateExpr(ia, d.transpose());
                  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatRows of nothing");
  Graph& g = G(parts[0]);
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts[0].cols();
  bool grad = false;
  std::vector<int> ids;
  for (Var p : parts) {
    assert(p.cols() == cols);
    rows += p.rows();
    grad = grad || g.requires_grad(p.id);
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return g.Add(std::move(out), grad, [ids](Graph& g, const Matrix& d, const Matrix&) {
    Eigen::Index r = 0;
    for (int id : ids) {
      const Eigen::Index n = g.value(id).rows();
      g.AccumulateExpr(id, d.middleRows(r, n));
      r += n;
    }
  });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("ConcatCols of nothing");
  Graph& g = G(parts[0]);
  Eigen::Index cols = 0;
  const Eigen::Index rows = parts[0].rows();
  bool grad = false;
  std::vector<int> ids;
  for (Var p : parts) {
    assert(p.rows() == rows);
    cols += p.cols();
    grad = grad || g.requires_grad(p.id);
    ids.push_back(p.id);
  }
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, p.cols()) = p.value();
    c += p.cols();
  }
  return g.Add(std::move(out), grad, [ids](Graph& g, const Matrix& d, const Matrix&) {
    Eigen::Index c = 0;
    for (int id : ids) {
      const Eigen::Index n = g.value(id).cols();
      g.AccumulateExpr(id, d.middleCols(c, n));
      c += n;
    }
  });
}

Var SliceRows(Var a, Eigen::Index start, Eigen::Index len) {
  assert(start >= 0 && start + len <= a.rows());
  const int ia = a.id;
  return G(a).Add(a.value().middleRows(start, len), AnyGrad({a}),
                  [ia, start, len](Graph& g, const Matrix& d, const Matrix&) {
                    const Matrix& x = g.value(ia);
                    Matrix full = Matrix::Zero(x.rows(), x.cols());
                    full.middleRows(start, len) = d;
                    g.AccumulateExpr(ia, full);
                  });
}

Var SliceCols(Var a, Eigen::Index start, Eigen::Index len) {
  assert(start >= 0 && start + len <= a.cols());
  const int ia = a.id;
  return G(a).Add(a.value().middleCols(start, len), AnyGrad({a}),
                  [ia, start, len](Graph& g, const Matrix& d, const Matrix&) {
                    const Matrix& x = g.value(ia);
                    Matrix full = Matrix::Zero(x.rows(), x.cols());
                    full.middleCols(start, len) = d;
                    g.AccumulateExpr(ia, full);
                  });
}

Var Column(Var a, Eigen::Index c) { return SliceCols(a, c, 1); }

namespace {

Matrix SoftmaxColumns(const Matrix& x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).maxCoeff();
    y.col(c) = (x.col(c).array() - m).exp().matrix();
    y.col(c) /= y.col(c).sum();
  }
  return y;
}

}  // namespace

Var SoftmaxCols(Var a) {
  const int ia = a.id;
  return G(a).Add(SoftmaxColumns(a.value()), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix& y) {
                    Matrix dx(y.rows(), y.cols());
                    for (Eigen::Index c = 0; c < y.cols(); ++c) {
                      const double dot = d.col(c).dot(y.col(c));
                      dx.col(c) = (y.col(c).array() * (d.col(c).array() - dot)).matrix();
                    }
                    g.AccumulateExpr(ia, dx);
                  });
}

Var LogSoftmaxCols(Var a) {
  const int ia = a.id;
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double m = x.col(c).maxCoeff();
    const double lse = m + std::log((x.col(c).array() - m).exp().sum());
    y.col(c) = (x.col(c).array() - lse).matrix();
  }
  return G(a).Add(std::move(y), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix& y) {
                    Matrix dx(y.rows(), y.cols());
                    for (Eigen::Index c = 0; c < y.cols(); ++c) {
                      const double s = d.col(c).sum();
                      dx.col(c) = d.col(c) - (y.col(c).array().exp() * s).matrix();
                    }
                    g.AccumulateExpr(ia, dx);
                  });
}

Var Pick(Var a, Eigen::Index r, Eigen::Index c) {
  if (r < 0 || r >= a.rows() || c < 0 || c >= a.cols()) {
    throw std::out_of_range("Pick index outside the distribution");
  }
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value()(r, c);
  return G(a).Add(std::move(out), AnyGrad({a}),
                  [ia, r, c](Graph& g, const Matrix& d, const Matrix&) {
                    const Matrix& x = g.value(ia);
                    Matrix full = Matrix::Zero(x.rows(), x.cols());
                    full(r, c) = d(0, 0);
                    g.AccumulateExpr(ia, full);
                  });
}

Var Sum(Var a) {
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return G(a).Add(std::move(out), AnyGrad({a}),
                  [ia](Graph& g, const Matrix& d, const Matrix&) {
                    const Matrix& x = g.value(ia);
                    g.AccumulateExpr(ia, Matrix::Constant(x.rows(), x.cols(), d(0, 0)));
                  });
}

Var SumAll(std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("SumAll of nothing");
  Graph& g = G(scalars[0]);
  double total = 0.0;
  bool grad = false;
  std::vector<int> ids;
  for (Var s : scalars) {
    total += s.scalar();
    grad = grad || g.requires_grad(s.id);
    ids.push_back(s.id);
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return g.Add(std::move(out), grad, [ids](Graph& g, const Matrix& d, const Matrix&) {
    for (int id : ids) g.AccumulateExpr(id, d);
  });
}

Var GatherRows(Graph& g, const Parameter& p, std::span<const int> ids) {
  Matrix out(p.value.cols(), static_cast<Eigen::Index>(ids.size()));
  for (size_t i = 0; i < ids.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = p.value.row(ids[i]).transpose();
  }
  std::vector<int> rows(ids.begin(), ids.end());
  auto* param = const_cast<Parameter*>(&p);
  return g.Add(std::move(out), g.tracks_gradients() && p.trainable,
               [param, rows](Graph&, const Matrix& d, const Matrix&) {
                 if (param->grad.size() == 0) {
                   param->grad.setZero(param->value.rows(), param->value.cols());
                 }
                 if (param->touched_rows.size() != static_cast<size_t>(param->value.rows())) {
                   param->touched_rows.assign(param->value.rows(), 0);
                 }
                 for (size_t i = 0; i < rows.size(); ++i) {
                   param->grad.row(rows[i]) += d.col(static_cast<Eigen::Index>(i)).transpose();
                   param->touched_rows[rows[i]] = 1;
                 }
               });
}

}  // namespace ad
}  // namespace zsql
