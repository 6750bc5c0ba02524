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

#ifndef ZSQL_MODEL_H_
#define ZSQL_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "zsql/autodiff.h"
#include "zsql/dataset.h"
#include "zsql/labels.h"
#include "zsql/params.h"

namespace zsql {

struct ModelConfig {
  int embedding_dim = 300;
  int lstm_hidden = 250;  // per direction
  int attention_dim = 64;
  double dropout = 0.5;
  // Question and column BiLSTMs share weights.
  bool share_encoder = false;
  // Where-decoder pointers key on raw BiLSTM states (true) or on the
  // bi-attended ones (false).
  bool decoder_keys_raw = true;
  double init_scale = 1.0;  // gain on the Glorot-uniform bound

  int hidden() const { return 2 * lstm_hidden; }
  // Throws std::invalid_argument on non-positive dims or dropout outside [0,1).
  void Validate() const;
};

inline constexpr const char* kUnknownWord = "<unk>";

// Everything the model needs besides its weights.
struct ModelVocab {
  // Rows of the frozen pretrained table.
  std::vector<std::string> pretrained_words;
  // Rows of the trainable table; row 0 is kUnknownWord.
  std::vector<std::string> trainable_words{kUnknownWord};
  OperatorVocabulary ops;
  SketchVocabulary sketches;
};

struct PretrainedEmbeddings {
  int dim = 0;
  std::unordered_map<std::string, Vector> vectors;
};

// Reads "token v1 ... v_dim" lines. When `keep` is non-null only those tokens
// are retained. Lines with a different width are an error.
PretrainedEmbeddings LoadPretrainedEmbeddings(const std::filesystem::path& path,
                                              int dim,
                                              const std::unordered_set<std::string>* keep);

// Word vocabulary from training questions and column names. With pretrained
// vectors, covered tokens (from `extra_tokens` too) become frozen rows and
// the rest fall back to the trainable unknown row; without them every
// training token gets a trainable row.
ModelVocab BuildModelVocab(const std::vector<Example>& train,
                           const std::vector<std::string>& extra_tokens,
                           const PretrainedEmbeddings* pretrained,
                           OperatorVocabulary ops, SketchVocabulary sketches);

struct LstmWeights {
  const Parameter* wx = nullptr;  // 4h x in
  const Parameter* wh = nullptr;  // 4h x h
  const Parameter* b = nullptr;   // 4h x 1
  int hidden = 0;
};

// u_i = v^T tanh(W [query; key_i] + b).
struct PointerWeights {
  const Parameter* w = nullptr;  // att x (query_dim + key_dim)
  const Parameter* b = nullptr;  // att x 1
  const Parameter* v = nullptr;  // att x 1
  int query_dim = 0;
};

struct DropoutContext {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool active() const { return rate > 0.0 && rng != nullptr; }
};

namespace nn {

// Inverted dropout; identity when inactive.
Var Dropout(Var x, DropoutContext& ctx);

struct LstmState {
  Var h;
  Var c;
};

// One cell update; `projected_input` is Wx x (4h x 1).
LstmState LstmStep(Graph& g, const LstmWeights& w, Var projected_input,
                   const LstmState& prev);

struct LstmRun {
  Var outputs;  // h x n, column t = state after reading position t
  LstmState last;
};

LstmRun RunLstm(Graph& g, const LstmWeights& w, Var inputs, bool reverse);

// Unnormalized pointer scores, one per key (n x 1).
Var PointerScores(Graph& g, const PointerWeights& w, Var query, Var keys);

struct BiAttentionOutput {
  Var question;      // D x n
  Var columns;       // D x m
  Var similarity;    // n x m
  Var q_to_c;        // m x n, column i = attention of token i over columns
  Var c_to_q;        // n x m, column j = attention of column j over tokens
};

BiAttentionOutput BiAttention(Graph& g, const Parameter& w_sim,
                              const Parameter& q_proj_w, const Parameter& q_proj_b,
                              const Parameter& c_proj_w, const Parameter& c_proj_b,
                              Var hq, Var hc);

struct PoolOutput {
  Var pooled;   // D x 1
  Var weights;  // n x 1
};

PoolOutput AttentivePool(Graph& g, const Parameter& w, const Parameter& v, Var rows);

}  // namespace nn

struct EncoderState {
  Var hq;        // D x n, raw BiLSTM
  Var hc;        // D x m, projected first/last column states
  Var hq_bar;    // D x n
  Var hc_bar;    // D x m
  nn::LstmState final_question;  // decoder initial state
  nn::BiAttentionOutput attention;
};

struct ConditionOutput {
  int op = 0;
  Var column_scores;
  Var left_scores;
  Var right_scores;  // masked below `left`
  int column = 0;
  int left = 0;
  int right = 0;
};

struct ForwardOutput {
  EncoderState encoder;
  Var pool_weights;
  Var agg_scores;
  Var sel_scores;
  Var sketch_scores;
  int sketch_id = 0;
  std::vector<ConditionOutput> conditions;
  Var tag_scores;  // 5 x n
  std::vector<Tag> tag_source;
  // (token position, column scores) for tokens whose tag is B_v/I_v.
  std::vector<std::pair<int, Var>> mapping_scores;
};

// Gold decisions fed to the decoders at training time.
struct Teacher {
  const SQLQuery* query = nullptr;
  const SupervisionLabels* labels = nullptr;
};

struct PredictedCondition {
  int column = 0;
  int op = 0;
  Span span;
};

struct Prediction {
  int agg = 0;
  int sel = 0;
  int sketch_id = 0;
  std::vector<PredictedCondition> conditions;
  Vector agg_distribution;
  Vector sel_distribution;
  Vector sketch_distribution;
};

struct MappingOutput {
  std::vector<Vector> tag_distributions;  // per token
  std::map<int, Vector> mapping_distributions;  // token -> simplex over columns
};

class Model {
 public:
  // Fresh model with weights drawn from `seed`.
  Model(ModelConfig config, ModelVocab vocab, uint64_t seed,
        const PretrainedEmbeddings* pretrained = nullptr);
  // Model over an existing parameter store (checkpoint loading).
  Model(ModelConfig config, ModelVocab vocab, ParameterStore params);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  const ModelVocab& vocab() const { return vocab_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  // Vectors consulted for tokens missing from the vocabulary before falling
  // back to the unknown row.
  void SetFallbackEmbeddings(PretrainedEmbeddings fallback) { fallback_ = std::move(fallback); }

  // Scalar count implied by a config and vocabulary sizes.
  static int64_t ExpectedParameterCount(const ModelConfig& config, int64_t pretrained_rows,
                                        int64_t trainable_rows, int agg_count,
                                        int op_count, int sketch_count);

  Var Embed(Graph& g, const std::vector<std::string>& tokens) const;
  EncoderState Encode(Graph& g, const std::vector<std::string>& question_tokens,
                      const TableSchema& schema) const;

  Var AggScores(Graph& g, Var q_sel, DropoutContext& drop) const;
  Var SelScores(Graph& g, Var q_sel, Var hc_bar, DropoutContext& drop) const;
  Var SketchScores(Graph& g, Var hq_bar, DropoutContext& drop) const;
  // Greedy unless `teacher` is given.
  std::vector<ConditionOutput> WhereDecode(Graph& g, const Sketch& sketch,
                                           const EncoderState& enc,
                                           const Teacher* teacher,
                                           DropoutContext& drop) const;
  Var TagScores(Graph& g, Var hq_bar, DropoutContext& drop) const;
  std::vector<std::pair<int, Var>> MapScores(Graph& g, Var hq_bar, Var hc_bar,
                                             const std::vector<Tag>& tags,
                                             DropoutContext& drop) const;

  // Full forward pass. With a teacher every decoder consumes gold inputs
  // (sketch, columns, spans, tags); otherwise decisions are greedy.
  ForwardOutput Forward(Graph& g, const Example& example, const Teacher* teacher,
                        DropoutContext& drop) const;

  Prediction Predict(const Example& example) const;
  MappingOutput PredictMapping(const Example& example) const;

  const PointerWeights& sel_pointer() const { return sel_ptr_; }
  const PointerWeights& column_pointer() const { return col_ptr_; }
  const PointerWeights& left_pointer() const { return left_ptr_; }
  const PointerWeights& right_pointer() const { return right_ptr_; }
  const PointerWeights& map_pointer() const { return map_ptr_; }

  // Names of parameters that only the mapping task uses.
  static std::vector<std::string> MappingOnlyParameters();

 private:
  void CreateParameters();
  void Bind();
  void Initialize(uint64_t seed, const PretrainedEmbeddings* pretrained);
  LstmWeights Lstm(const std::string& prefix, int hidden) const;
  PointerWeights Pointer(const std::string& prefix, int query_dim) const;
  Var EncodeColumns(Graph& g, const TableSchema& schema) const;

  ModelConfig config_;
  ModelVocab vocab_;
  ParameterStore params_;
  std::unordered_map<std::string, std::pair<int, int>> word_index_;  // table, row
  std::optional<PretrainedEmbeddings> fallback_;

  LstmWeights q_fwd_, q_bwd_, c_fwd_, c_bwd_, dec_;
  PointerWeights sel_ptr_, col_ptr_, left_ptr_, right_ptr_, map_ptr_;
};

// Turns a prediction into a query; values are the joined span tokens.
SQLQuery PredictionToQuery(const Prediction& prediction,
                           const std::vector<std::string>& question_tokens);

}  // namespace zsql

#endif  // ZSQL_MODEL_H_
