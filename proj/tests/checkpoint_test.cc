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

#include <doctest.h>

#include <fstream>
#include <iterator>

#include "support/synthetic.h"
#include "zsql/checkpoint.h"
#include "zsql/config.h"
#include "zsql/evaluation.h"
#include "zsql/text.h"

namespace zsql {
namespace {

using testing::MakeTempDir;
using testing::WriteLines;

std::string ReadBytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<Example> Corpus(const std::filesystem::path& dir) {
  testing::SyntheticSpec spec;
  spec.examples = 12;
  const auto c = testing::WriteSyntheticCorpus(dir, "train", spec);
  return LoadExamples(c.examples, LoadTables(c.tables));
}

ModelConfig Small() {
  ModelConfig c;
  c.embedding_dim = 6;
  c.lstm_hidden = 5;
  c.attention_dim = 4;
  return c;
}

TEST_CASE("checkpoint round trip is bitwise") {
  const auto dir = MakeTempDir("ckpt");
  const auto train = Corpus(dir);
  Model model(Small(), BuildModelVocab(train, {}, nullptr, {}, BuildSketchVocabulary(train)), 3);
  RunConfig rc;
  rc.train.lambda = 0.25;
  rc.train.seed = 11;
  SaveCheckpoint(dir / "a.ckpt", model, rc);

  const auto loaded = LoadCheckpoint(dir / "a.ckpt");
  CHECK(loaded.config.train.lambda == 0.25);
  CHECK(loaded.config.train.seed == 11);
  CHECK(loaded.config.model.lstm_hidden == 5);
  CHECK(loaded.model->vocab().trainable_words == model.vocab().trainable_words);
  CHECK(loaded.model->vocab().sketches.size() == model.vocab().sketches.size());

  SaveCheckpoint(dir / "b.ckpt", *loaded.model, loaded.config);
  CHECK(ReadBytes(dir / "a.ckpt") == ReadBytes(dir / "b.ckpt"));

  // Values are the float32-rounded originals.
  ParameterStore& original = model.params();
  RoundToFloat(original);
  const auto& back = loaded.model->params();
  REQUIRE(back.size() == original.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].name == original[i].name);
    CHECK(back[i].trainable == original[i].trainable);
    CHECK(back[i].value == original[i].value);
  }

  // Same predictions after the round trip.
  for (const auto& e : train) {
    CHECK(PredictionToQuery(loaded.model->Predict(e), e.question_tokens) ==
          PredictionToQuery(model.Predict(e), e.question_tokens));
  }
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto dir = MakeTempDir("ckpt_bad");
  WriteLines(dir / "junk.ckpt", {"not a checkpoint"});
  CHECK_THROWS_AS(LoadCheckpoint(dir / "junk.ckpt"), CheckpointError);
  CHECK_THROWS_AS(LoadCheckpoint(dir / "missing.ckpt"), CheckpointError);

  const auto train = Corpus(dir);
  Model model(Small(), BuildModelVocab(train, {}, nullptr, {}, BuildSketchVocabulary(train)), 3);
  SaveCheckpoint(dir / "ok.ckpt", model, {});
  auto bytes = ReadBytes(dir / "ok.ckpt");
  bytes.resize(bytes.size() - 8);
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes;
  CHECK_THROWS_AS(LoadCheckpoint(dir / "short.ckpt"), CheckpointError);
}

TEST_CASE("config keys and files") {
  RunConfig c;
  SetConfigValue(c, "lstm_hidden", "250");
  SetConfigValue(c, "lambda", "0.25");
  SetConfigValue(c, "share_encoder", "true");
  SetConfigValue(c, "decoder_keys_raw", "0");
  SetConfigValue(c, "seed", "17");
  CHECK(c.model.lstm_hidden == 250);
  CHECK(c.train.lambda == 0.25);
  CHECK(c.model.share_encoder);
  CHECK_FALSE(c.model.decoder_keys_raw);
  CHECK(c.train.seed == 17);
  CHECK_THROWS_AS(SetConfigValue(c, "hidden", "3"), std::invalid_argument);
  CHECK_THROWS_AS(SetConfigValue(c, "lstm_hidden", "3x"), std::invalid_argument);
  CHECK_THROWS_AS(SetConfigValue(c, "share_encoder", "maybe"), std::invalid_argument);

  const auto round = ConfigFromJson(ConfigToJson(c));
  CHECK(ConfigToJson(round) == ConfigToJson(c));

  const auto dir = MakeTempDir("cfg");
  WriteLines(dir / "run.cfg", {"# small run", "embedding_dim = 8", "", "batch_size=4  # inline",
                               "learning_rate = 0.002"});
  const auto f = LoadConfigFile(dir / "run.cfg");
  CHECK(f.model.embedding_dim == 8);
  CHECK(f.train.batch_size == 4);
  CHECK(f.train.learning_rate == 0.002);

  WriteLines(dir / "bad.cfg", {"lambda = 2"});
  CHECK_THROWS_AS(LoadConfigFile(dir / "bad.cfg"), std::invalid_argument);
}

}  // namespace
}  // namespace zsql
