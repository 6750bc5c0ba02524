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

#ifndef ZSQL_AUTODIFF_H_
#define ZSQL_AUTODIFF_H_

// Tape-based reverse-mode differentiation over dense Eigen matrices.
//
// A Graph records every operation of one forward pass. Vectors are n x 1
// matrices; sequences are stored one item per column. Calling Backward()
// on a 1 x 1 node accumulates gradients into the Parameters that took part.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace zsql {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
  // Row-gathered parameters (embeddings) record which rows received gradient.
  std::vector<char> touched_rows;

  Eigen::Index size() const { return value.size(); }
  void ZeroGrad();
};

class Graph;

// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // With track_gradients false no parameter is ever written to, so one
  // frozen parameter set may serve concurrent inference graphs.
  explicit Graph(bool track_gradients) : track_gradients_(track_gradients) {}

  bool tracks_gradients() const { return track_gradients_; }

  Var Constant(Matrix value);
  // One node per parameter per graph. The node refers to the parameter's
  // storage, which must outlive the graph.
  Var Param(const Parameter& p);

  // Runs reverse accumulation from `loss` (must be 1 x 1).
  void Backward(Var loss);

  const Matrix& value(int id) const {
    const Node& n = nodes_[id];
    return n.external != nullptr ? *n.external : n.value;
  }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  size_t size() const { return nodes_.size(); }

  // Internal: used by the operation implementations.
  using BackwardFn =
      std::function<void(Graph&, const Matrix& grad, const Matrix& out)>;
  Var Add(Matrix value, bool requires_grad, BackwardFn backward);
  void Accumulate(int id, const Matrix& grad);
  template <typename Expr>
  void AccumulateExpr(int id, const Expr& grad) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = grad;
    } else {
      n.grad += grad;
    }
  }

 private:
  struct Node {
    Matrix value;
    const Matrix* external = nullptr;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  bool track_gradients_ = true;
  std::vector<Node> nodes_;
  std::vector<std::pair<Parameter*, int>> param_nodes_;
};

namespace ad {

Var MatMul(Var a, Var b);
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var CMul(Var a, Var b);
Var Scale(Var a, double s);
// m x n plus an m x 1 column broadcast across columns.
Var AddColumn(Var m, Var col);
// m x n plus a 1 x n row broadcast across rows.
Var AddRow(Var m, Var row);
// Each column of m multiplied elementwise by col (m x 1).
Var MulColumn(Var m, Var col);
Var Tanh(Var a);
Var Sigmoid(Var a);
Var Transpose(Var a);
Var ConcatRows(std::span<const Var> parts);
Var ConcatCols(std::span<const Var> parts);
Var SliceRows(Var a, Eigen::Index start, Eigen::Index len);
Var SliceCols(Var a, Eigen::Index start, Eigen::Index len);
Var Column(Var a, Eigen::Index c);
// Softmax of every column independently, with max subtraction.
Var SoftmaxCols(Var a);
Var LogSoftmaxCols(Var a);
// 1 x 1 node holding a(r, c).
Var Pick(Var a, Eigen::Index r, Eigen::Index c = 0);
Var Sum(Var a);
Var SumAll(std::span<const Var> scalars);
// Gathers rows of an embedding-style parameter into columns: out.col(i) =
// p.value.row(ids[i]).transpose(). Gradient is scattered row-wise.
Var GatherRows(Graph& g, const Parameter& p, std::span<const int> ids);

}  // namespace ad
}  // namespace zsql

#endif  // ZSQL_AUTODIFF_H_
