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

#include "zsql/model.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zsql/text.h"

namespace zsql {

void ModelConfig::Validate() const {
  if (embedding_dim <= 0 || lstm_hidden <= 0 || attention_dim <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("dropout must be in [0, 1)");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
}

PretrainedEmbeddings LoadPretrainedEmbeddings(const std::filesystem::path& path, int dim,
                                              const std::unordered_set<std::string>* keep) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  PretrainedEmbeddings out;
  out.dim = dim;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    ss >> token;
    if (keep != nullptr && !keep->count(token)) continue;
    Vector v(dim);
    int k = 0;
    double x;
    while (ss >> x) {
      if (k == dim) break;
      v(k++) = x;
    }
    if (k != dim || (ss >> x)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values");
    }
    out.vectors.emplace(token, std::move(v));
  }
  return out;
}

ModelVocab BuildModelVocab(const std::vector<Example>& train,
                           const std::vector<std::string>& extra_tokens,
                           const PretrainedEmbeddings* pretrained, OperatorVocabulary ops,
                           SketchVocabulary sketches) {
  std::set<std::string> tokens;
  for (const auto& e : train) {
    tokens.insert(e.question_tokens.begin(), e.question_tokens.end());
    for (const auto& col : e.schema.column_names) tokens.insert(col.begin(), col.end());
  }
  ModelVocab vocab;
  vocab.ops = std::move(ops);
  vocab.sketches = std::move(sketches);
  if (pretrained != nullptr) {
    std::set<std::string> covered;
    for (const auto& t : tokens) {
      if (pretrained->vectors.count(t)) covered.insert(t);
    }
    for (const auto& t : extra_tokens) {
      if (pretrained->vectors.count(t)) covered.insert(t);
    }
    vocab.pretrained_words.assign(covered.begin(), covered.end());
  } else {
    tokens.erase(kUnknownWord);
    vocab.trainable_words.insert(vocab.trainable_words.end(), tokens.begin(), tokens.end());
  }
  return vocab;
}

namespace nn {

Var Dropout(Var x, DropoutContext& ctx) {
  if (!ctx.active()) return x;
  const double keep = 1.0 - ctx.rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask(i) = ctx.rng->Uniform() < keep ? 1.0 / keep : 0.0;
  }
  return ad::CMul(x, x.graph->Constant(std::move(mask)));
}

LstmState LstmStep(Graph& g, const LstmWeights& w, Var projected_input,
                   const LstmState& prev) {
  const int h = w.hidden;
  Var gates = ad::Add(ad::Add(projected_input, ad::MatMul(g.Param(*w.wh), prev.h)),
                      g.Param(*w.b));
  Var i = ad::Sigmoid(ad::SliceRows(gates, 0, h));
  Var f = ad::Sigmoid(ad::SliceRows(gates, h, h));
  Var cand = ad::Tanh(ad::SliceRows(gates, 2 * h, h));
  Var o = ad::Sigmoid(ad::SliceRows(gates, 3 * h, h));
  Var c = ad::Add(ad::CMul(f, prev.c), ad::CMul(i, cand));
  Var hn = ad::CMul(o, ad::Tanh(c));
  return {hn, c};
}

LstmRun RunLstm(Graph& g, const LstmWeights& w, Var inputs, bool reverse) {
  const Eigen::Index n = inputs.cols();
  if (n == 0) throw std::invalid_argument("LSTM over an empty sequence");
  Var projected = ad::MatMul(g.Param(*w.wx), inputs);
  LstmState state{g.Constant(Matrix::Zero(w.hidden, 1)), g.Constant(Matrix::Zero(w.hidden, 1))};
  std::vector<Var> outs(static_cast<size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index t = reverse ? n - 1 - k : k;
    state = LstmStep(g, w, ad::Column(projected, t), state);
    outs[static_cast<size_t>(t)] = state.h;
  }
  return {ad::ConcatCols(outs), state};
}

Var PointerScores(Graph& g, const PointerWeights& w, Var query, Var keys) {
  if (keys.cols() == 0) throw std::invalid_argument("pointer over no keys");
  Var W = g.Param(*w.w);
  const Eigen::Index key_dim = W.cols() - w.query_dim;
  if (query.rows() != w.query_dim || keys.rows() != key_dim) {
    throw std::invalid_argument("pointer input width mismatch");
  }
  Var wq = ad::SliceCols(W, 0, w.query_dim);
  Var wk = ad::SliceCols(W, w.query_dim, key_dim);
  Var query_part = ad::Add(ad::MatMul(wq, query), g.Param(*w.b));
  Var hidden = ad::Tanh(ad::AddColumn(ad::MatMul(wk, keys), query_part));
  return ad::Transpose(ad::MatMul(ad::Transpose(g.Param(*w.v)), hidden));
}

BiAttentionOutput BiAttention(Graph& g, const Parameter& w_sim, const Parameter& q_proj_w,
                              const Parameter& q_proj_b, const Parameter& c_proj_w,
                              const Parameter& c_proj_b, Var hq, Var hc) {
  const Eigen::Index d = hq.rows();
  if (hq.cols() == 0 || hc.cols() == 0) throw std::invalid_argument("bi-attention over nothing");
  Var w = g.Param(w_sim);
  Var w_q = ad::SliceRows(w, 0, d);
  Var w_c = ad::SliceRows(w, d, d);
  Var w_qc = ad::SliceRows(w, 2 * d, d);
  // S_ij = w_q.h_i + w_c.c_j + w_qc.(h_i * c_j)
  Var q_term = ad::Transpose(ad::MatMul(ad::Transpose(w_q), hq));  // n x 1
  Var c_term = ad::MatMul(ad::Transpose(w_c), hc);                 // 1 x m
  Var cross = ad::MatMul(ad::Transpose(ad::MulColumn(hq, w_qc)), hc);
  Var sim = ad::AddRow(ad::AddColumn(cross, q_term), c_term);
  Var q_to_c = ad::SoftmaxCols(ad::Transpose(sim));  // m x n
  Var c_to_q = ad::SoftmaxCols(sim);                 // n x m
  Var q_ctx = ad::MatMul(hc, q_to_c);
  Var c_ctx = ad::MatMul(hq, c_to_q);
  const Var q_parts[] = {hq, q_ctx, ad::CMul(hq, q_ctx)};
  const Var c_parts[] = {hc, c_ctx, ad::CMul(hc, c_ctx)};
  Var q_bar = ad::AddColumn(ad::MatMul(g.Param(q_proj_w), ad::ConcatRows(q_parts)),
                            g.Param(q_proj_b));
  Var c_bar = ad::AddColumn(ad::MatMul(g.Param(c_proj_w), ad::ConcatRows(c_parts)),
                            g.Param(c_proj_b));
  return {q_bar, c_bar, sim, q_to_c, c_to_q};
}

PoolOutput AttentivePool(Graph& g, const Parameter& w, const Parameter& v, Var rows) {
  if (rows.cols() == 0) throw std::invalid_argument("pooling over nothing");
  Var scores = ad::MatMul(ad::Transpose(g.Param(v)), ad::Tanh(ad::MatMul(g.Param(w), rows)));
  Var weights = ad::SoftmaxCols(ad::Transpose(scores));
  return {ad::MatMul(rows, weights), weights};
}

}  // namespace nn

namespace {

int Argmax(const Matrix& scores, Eigen::Index col = 0) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < scores.rows(); ++i) {
    if (scores(i, col) > scores(best, col)) best = i;
  }
  return static_cast<int>(best);
}

Vector Softmax(const Matrix& scores, Eigen::Index col = 0) {
  Vector x = scores.col(col);
  const double m = x.maxCoeff();
  Vector e = (x.array() - m).exp().matrix();
  return e / e.sum();
}

constexpr int64_t LstmCount(int64_t in, int64_t h) { return 4 * h * in + 4 * h * h + 4 * h; }

}  // namespace

Model::Model(ModelConfig config, ModelVocab vocab, uint64_t seed,
             const PretrainedEmbeddings* pretrained)
    : config_(config), vocab_(std::move(vocab)) {
  config_.Validate();
  CreateParameters();
  Bind();
  Initialize(seed, pretrained);
}

Model::Model(ModelConfig config, ModelVocab vocab, ParameterStore params)
    : config_(config), vocab_(std::move(vocab)) {
  config_.Validate();
  CreateParameters();
  for (size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    if (!params.contains(p.name)) throw DataError("checkpoint lacks parameter " + p.name);
    const Parameter& src = params.at(p.name);
    if (src.value.rows() != p.value.rows() || src.value.cols() != p.value.cols()) {
      throw DataError("checkpoint parameter " + p.name + " has the wrong shape");
    }
    p.value = src.value;
  }
  if (params.size() != params_.size()) throw DataError("checkpoint has unexpected parameters");
  Bind();
}

void Model::CreateParameters() {
  if (vocab_.trainable_words.empty() || vocab_.trainable_words[0] != kUnknownWord) {
    throw std::invalid_argument("trainable vocabulary must start with " +
                                std::string(kUnknownWord));
  }
  if (vocab_.sketches.size() == 0) throw std::invalid_argument("empty sketch vocabulary");
  const int E = config_.embedding_dim, H = config_.lstm_hidden, D = config_.hidden(),
            A = config_.attention_dim;
  auto& P = params_;
  if (!vocab_.pretrained_words.empty()) {
    P.Create("embed.pretrained", static_cast<Eigen::Index>(vocab_.pretrained_words.size()), E,
             /*trainable=*/false);
  }
  P.Create("embed.trainable", static_cast<Eigen::Index>(vocab_.trainable_words.size()), E);
  auto lstm = [&](const std::string& prefix, int in, int h) {
    P.Create(prefix + ".wx", 4 * h, in);
    P.Create(prefix + ".wh", 4 * h, h);
    P.Create(prefix + ".b", 4 * h, 1);
  };
  auto linear = [&](const std::string& prefix, int out, int in) {
    P.Create(prefix + ".w", out, in);
    P.Create(prefix + ".b", out, 1);
  };
  auto pointer = [&](const std::string& prefix, int query_dim, int key_dim) {
    P.Create(prefix + ".w", A, query_dim + key_dim);
    P.Create(prefix + ".b", A, 1);
    P.Create(prefix + ".v", A, 1);
  };
  lstm("enc.question.fwd", E, H);
  lstm("enc.question.bwd", E, H);
  if (!config_.share_encoder) {
    lstm("enc.column.fwd", E, H);
    lstm("enc.column.bwd", E, H);
  }
  linear("enc.column_proj", D, 2 * D);
  P.Create("biatt.w_sim", 3 * D, 1);
  linear("biatt.question_proj", D, 3 * D);
  linear("biatt.column_proj", D, 3 * D);
  P.Create("pool.w", A, D);
  P.Create("pool.v", A, 1);
  linear("agg", vocab_.ops.agg_count(), D);
  pointer("sel_ptr", D, D);
  linear("sketch", vocab_.sketches.size(), 2 * D);
  P.Create("dec.op_embed", vocab_.ops.op_count(), D);
  lstm("dec.lstm", D, D);
  linear("dec.value_proj", D, 2 * D);
  pointer("dec.col_ptr", D, D);
  pointer("dec.left_ptr", D, D);
  pointer("dec.right_ptr", 2 * D, D);
  P.Create("tag.w", kTagCount, D);
  P.Create("tag.b", kTagCount, 1);
  P.Create("tag.v", kTagCount, kTagCount);
  pointer("map_ptr", D, D);
}

LstmWeights Model::Lstm(const std::string& prefix, int hidden) const {
  return {&params_.at(prefix + ".wx"), &params_.at(prefix + ".wh"), &params_.at(prefix + ".b"),
          hidden};
}

PointerWeights Model::Pointer(const std::string& prefix, int query_dim) const {
  return {&params_.at(prefix + ".w"), &params_.at(prefix + ".b"), &params_.at(prefix + ".v"),
          query_dim};
}

void Model::Bind() {
  const int H = config_.lstm_hidden, D = config_.hidden();
  q_fwd_ = Lstm("enc.question.fwd", H);
  q_bwd_ = Lstm("enc.question.bwd", H);
  c_fwd_ = config_.share_encoder ? q_fwd_ : Lstm("enc.column.fwd", H);
  c_bwd_ = config_.share_encoder ? q_bwd_ : Lstm("enc.column.bwd", H);
  dec_ = Lstm("dec.lstm", D);
  sel_ptr_ = Pointer("sel_ptr", D);
  col_ptr_ = Pointer("dec.col_ptr", D);
  left_ptr_ = Pointer("dec.left_ptr", D);
  right_ptr_ = Pointer("dec.right_ptr", 2 * D);
  map_ptr_ = Pointer("map_ptr", D);
  word_index_.clear();
  for (size_t i = 0; i < vocab_.pretrained_words.size(); ++i) {
    word_index_.emplace(vocab_.pretrained_words[i], std::make_pair(0, static_cast<int>(i)));
  }
  for (size_t i = 1; i < vocab_.trainable_words.size(); ++i) {
    word_index_.emplace(vocab_.trainable_words[i], std::make_pair(1, static_cast<int>(i)));
  }
}

void Model::Initialize(uint64_t seed, const PretrainedEmbeddings* pretrained) {
  Rng rng(seed);
  const double s = config_.init_scale;
  for (size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = params_[i];
    if (p.name == "embed.pretrained") {
      if (pretrained == nullptr || pretrained->dim != config_.embedding_dim) {
        throw std::invalid_argument("pretrained vectors of the configured width required");
      }
      for (size_t r = 0; r < vocab_.pretrained_words.size(); ++r) {
        p.value.row(static_cast<Eigen::Index>(r)) =
            pretrained->vectors.at(vocab_.pretrained_words[r]).transpose();
      }
      continue;
    }
    // Word rows get unit variance like pretrained vectors; weights are
    // Glorot-uniform scaled by init_scale.
    const double bound =
        p.name == "embed.trainable"
            ? std::sqrt(3.0)
            : s * std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
    for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value(k) = rng.Uniform(-bound, bound);
  }
}

int64_t Model::ExpectedParameterCount(const ModelConfig& c, int64_t pretrained_rows,
                                      int64_t trainable_rows, int agg_count, int op_count,
                                      int sketch_count) {
  const int64_t E = c.embedding_dim, H = c.lstm_hidden, D = 2 * H, A = c.attention_dim;
  int64_t n = (pretrained_rows + trainable_rows) * E;
  n += (c.share_encoder ? 2 : 4) * LstmCount(E, H);
  n += D * 2 * D + D;                 // column projection
  n += 3 * D + 2 * (D * 3 * D + D);   // bi-attention
  n += A * D + A;                     // pooling
  n += agg_count * D + agg_count;
  n += A * 2 * D + 2 * A;             // sel pointer
  n += sketch_count * 2 * D + sketch_count;
  n += op_count * D;
  n += LstmCount(D, D);
  n += D * 2 * D + D;                 // value projection
  n += 2 * (A * 2 * D + 2 * A) + (A * 3 * D + 2 * A);
  n += kTagCount * D + kTagCount + kTagCount * kTagCount;  // tagger
  n += A * 2 * D + 2 * A;             // map pointer
  return n;
}

std::vector<std::string> Model::MappingOnlyParameters() {
  return {"tag.w", "tag.b", "tag.v", "map_ptr.w", "map_ptr.b", "map_ptr.v"};
}

Var Model::Embed(Graph& g, const std::vector<std::string>& tokens) const {
  if (tokens.empty()) throw std::invalid_argument("embedding an empty token list");
  const Parameter* tables[2] = {
      params_.contains("embed.pretrained") ? &params_.at("embed.pretrained") : nullptr,
      &params_.at("embed.trainable")};
  std::vector<Var> cols;
  cols.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = word_index_.find(t);
    if (it != word_index_.end()) {
      const int row = it->second.second;
      cols.push_back(ad::GatherRows(g, *tables[it->second.first], std::span<const int>(&row, 1)));
      continue;
    }
    if (fallback_) {
      auto f = fallback_->vectors.find(t);
      if (f != fallback_->vectors.end() && f->second.size() == config_.embedding_dim) {
        cols.push_back(g.Constant(f->second));
        continue;
      }
    }
    const int unk = 0;
    cols.push_back(ad::GatherRows(g, *tables[1], std::span<const int>(&unk, 1)));
  }
  return cols.size() == 1 ? cols[0] : ad::ConcatCols(cols);
}

Var Model::EncodeColumns(Graph& g, const TableSchema& schema) const {
  std::vector<Var> firsts_lasts;
  firsts_lasts.reserve(schema.column_count());
  const std::vector<std::string> unk{kUnknownWord};
  for (const auto& name : schema.column_names) {
    Var x = Embed(g, name.empty() ? unk : name);
    auto fwd = nn::RunLstm(g, c_fwd_, x, false);
    auto bwd = nn::RunLstm(g, c_bwd_, x, true);
    const Var both[] = {fwd.outputs, bwd.outputs};
    Var h = ad::ConcatRows(both);
    const Var ends[] = {ad::Column(h, 0), ad::Column(h, h.cols() - 1)};
    firsts_lasts.push_back(ad::ConcatRows(ends));
  }
  Var stacked = ad::ConcatCols(firsts_lasts);
  return ad::AddColumn(ad::MatMul(g.Param(params_.at("enc.column_proj.w")), stacked),
                       g.Param(params_.at("enc.column_proj.b")));
}

EncoderState Model::Encode(Graph& g, const std::vector<std::string>& question_tokens,
                           const TableSchema& schema) const {
  if (question_tokens.empty()) throw std::invalid_argument("empty question");
  if (schema.column_count() == 0) throw std::invalid_argument("empty column list");
  EncoderState st;
  Var x = Embed(g, question_tokens);
  auto fwd = nn::RunLstm(g, q_fwd_, x, false);
  auto bwd = nn::RunLstm(g, q_bwd_, x, true);
  const Var both[] = {fwd.outputs, bwd.outputs};
  st.hq = ad::ConcatRows(both);
  const Var h_parts[] = {fwd.last.h, bwd.last.h};
  const Var c_parts[] = {fwd.last.c, bwd.last.c};
  st.final_question = {ad::ConcatRows(h_parts), ad::ConcatRows(c_parts)};
  st.hc = EncodeColumns(g, schema);
  st.attention = nn::BiAttention(g, params_.at("biatt.w_sim"),
                                 params_.at("biatt.question_proj.w"),
                                 params_.at("biatt.question_proj.b"),
                                 params_.at("biatt.column_proj.w"),
                                 params_.at("biatt.column_proj.b"), st.hq, st.hc);
  st.hq_bar = st.attention.question;
  st.hc_bar = st.attention.columns;
  return st;
}

Var Model::AggScores(Graph& g, Var q_sel, DropoutContext& drop) const {
  return ad::Add(ad::MatMul(g.Param(params_.at("agg.w")), nn::Dropout(q_sel, drop)),
                 g.Param(params_.at("agg.b")));
}

Var Model::SelScores(Graph& g, Var q_sel, Var hc_bar, DropoutContext& drop) const {
  return nn::PointerScores(g, sel_ptr_, nn::Dropout(q_sel, drop), hc_bar);
}

Var Model::SketchScores(Graph& g, Var hq_bar, DropoutContext& drop) const {
  const Var ends[] = {ad::Column(hq_bar, 0), ad::Column(hq_bar, hq_bar.cols() - 1)};
  Var q_where = nn::Dropout(ad::ConcatRows(ends), drop);
  return ad::Add(ad::MatMul(g.Param(params_.at("sketch.w")), q_where),
                 g.Param(params_.at("sketch.b")));
}

std::vector<ConditionOutput> Model::WhereDecode(Graph& g, const Sketch& sketch,
                                                const EncoderState& enc,
                                                const Teacher* teacher,
                                                DropoutContext& drop) const {
  std::vector<ConditionOutput> out;
  if (sketch.empty()) return out;
  if (teacher != nullptr &&
      (teacher->query == nullptr || teacher->labels == nullptr ||
       teacher->query->conditions.size() != sketch.size() ||
       teacher->labels->value_spans.size() != sketch.size())) {
    throw std::invalid_argument("teacher does not cover the sketch");
  }
  const Var q_keys = config_.decoder_keys_raw ? enc.hq : enc.hq_bar;
  const Var c_keys = config_.decoder_keys_raw ? enc.hc : enc.hc_bar;
  const Eigen::Index n = q_keys.cols();
  const Parameter& wx = *dec_.wx;
  nn::LstmState state = enc.final_question;
  auto step = [&](Var x) { state = nn::LstmStep(g, dec_, ad::MatMul(g.Param(wx), x), state); };

  for (size_t i = 0; i < sketch.size(); ++i) {
    ConditionOutput c;
    c.op = sketch[i];
    if (c.op < 0 || c.op >= vocab_.ops.op_count()) throw std::out_of_range("operator id");
    // Step 1: operator in, column out.
    step(ad::GatherRows(g, params_.at("dec.op_embed"), std::span<const int>(&c.op, 1)));
    c.column_scores = nn::PointerScores(g, col_ptr_, nn::Dropout(state.h, drop), c_keys);
    c.column = teacher ? teacher->query->conditions[i].column : Argmax(c.column_scores.value());
    // Step 2: column in, span out.
    step(ad::Column(enc.hc_bar, c.column));
    Var h2 = state.h;
    c.left_scores = nn::PointerScores(g, left_ptr_, nn::Dropout(h2, drop), q_keys);
    c.left = teacher ? teacher->labels->value_spans[i].left : Argmax(c.left_scores.value());
    const Var rq_parts[] = {h2, ad::Column(enc.hq_bar, c.left)};
    Var right_raw = nn::PointerScores(g, right_ptr_,
                                      nn::Dropout(ad::ConcatRows(rq_parts), drop), q_keys);
    Matrix mask = Matrix::Zero(n, 1);
    for (Eigen::Index r = 0; r < c.left; ++r) mask(r, 0) = -1e30;
    c.right_scores = ad::Add(right_raw, g.Constant(std::move(mask)));
    c.right = teacher ? teacher->labels->value_spans[i].right : Argmax(c.right_scores.value());
    // Step 3: value in, no output.
    const Var ends[] = {ad::Column(q_keys, c.left), ad::Column(q_keys, c.right)};
    Var value = ad::AddColumn(
        ad::MatMul(g.Param(params_.at("dec.value_proj.w")), ad::ConcatRows(ends)),
        g.Param(params_.at("dec.value_proj.b")));
    step(value);
    out.push_back(std::move(c));
  }
  return out;
}

Var Model::TagScores(Graph& g, Var hq_bar, DropoutContext& drop) const {
  Var hidden = ad::Tanh(ad::AddColumn(
      ad::MatMul(g.Param(params_.at("tag.w")), nn::Dropout(hq_bar, drop)),
      g.Param(params_.at("tag.b"))));
  return ad::MatMul(g.Param(params_.at("tag.v")), hidden);
}

std::vector<std::pair<int, Var>> Model::MapScores(Graph& g, Var hq_bar, Var hc_bar,
                                                  const std::vector<Tag>& tags,
                                                  DropoutContext& drop) const {
  std::vector<std::pair<int, Var>> out;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (!IsValueTag(tags[i])) continue;
    Var q = nn::Dropout(ad::Column(hq_bar, static_cast<Eigen::Index>(i)), drop);
    out.emplace_back(static_cast<int>(i), nn::PointerScores(g, map_ptr_, q, hc_bar));
  }
  return out;
}

ForwardOutput Model::Forward(Graph& g, const Example& example, const Teacher* teacher,
                             DropoutContext& drop) const {
  ForwardOutput out;
  out.encoder = Encode(g, example.question_tokens, example.schema);
  const auto& enc = out.encoder;
  auto pool = nn::AttentivePool(g, params_.at("pool.w"), params_.at("pool.v"), enc.hq_bar);
  out.pool_weights = pool.weights;
  out.agg_scores = AggScores(g, pool.pooled, drop);
  out.sel_scores = SelScores(g, pool.pooled, enc.hc_bar, drop);
  out.sketch_scores = SketchScores(g, enc.hq_bar, drop);
  out.sketch_id = teacher ? teacher->labels->sketch_id : Argmax(out.sketch_scores.value());
  out.conditions = WhereDecode(g, vocab_.sketches.at(out.sketch_id), enc, teacher, drop);
  out.tag_scores = TagScores(g, enc.hq_bar, drop);
  if (teacher) {
    out.tag_source = teacher->labels->tags;
  } else {
    const Matrix& ts = out.tag_scores.value();
    for (Eigen::Index t = 0; t < ts.cols(); ++t) {
      out.tag_source.push_back(static_cast<Tag>(Argmax(ts, t)));
    }
  }
  out.mapping_scores = MapScores(g, enc.hq_bar, enc.hc_bar, out.tag_source, drop);
  return out;
}

Prediction Model::Predict(const Example& example) const {
  Graph g(/*track_gradients=*/false);
  DropoutContext none;
  auto f = Forward(g, example, nullptr, none);
  Prediction p;
  p.agg_distribution = Softmax(f.agg_scores.value());
  p.sel_distribution = Softmax(f.sel_scores.value());
  p.sketch_distribution = Softmax(f.sketch_scores.value());
  p.agg = Argmax(f.agg_scores.value());
  p.sel = Argmax(f.sel_scores.value());
  p.sketch_id = f.sketch_id;
  for (const auto& c : f.conditions) {
    p.conditions.push_back({c.column, c.op, Span{c.left, c.right}});
  }
  return p;
}

MappingOutput Model::PredictMapping(const Example& example) const {
  Graph g(/*track_gradients=*/false);
  DropoutContext none;
  auto f = Forward(g, example, nullptr, none);
  MappingOutput m;
  const Matrix& ts = f.tag_scores.value();
  for (Eigen::Index t = 0; t < ts.cols(); ++t) m.tag_distributions.push_back(Softmax(ts, t));
  for (const auto& [pos, scores] : f.mapping_scores) {
    m.mapping_distributions.emplace(pos, Softmax(scores.value()));
  }
  return m;
}

SQLQuery PredictionToQuery(const Prediction& prediction,
                           const std::vector<std::string>& question_tokens) {
  SQLQuery q;
  q.agg = prediction.agg;
  q.sel = prediction.sel;
  for (const auto& c : prediction.conditions) {
    const auto first = question_tokens.begin() + c.span.left;
    const auto last = question_tokens.begin() + c.span.right + 1;
    std::vector<std::string> span(first, last);
    q.conditions.push_back({c.column, c.op, Join(span)});
  }
  return q;
}

}  // namespace zsql
