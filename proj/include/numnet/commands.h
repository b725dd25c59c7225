// Copyright 2026 The NumNet Authors.
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

// Library side of the command-line tool: training loop, batch prediction,
// toy gradient check.

#ifndef NUMNET_COMMANDS_H_
#define NUMNET_COMMANDS_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "numnet/answer.h"
#include "numnet/metrics.h"
#include "numnet/model.h"
#include "numnet/tensor.h"

namespace numnet::cli {

struct TrainConfig {
  double lr = 5e-4;
  double beta1 = 0.8;
  double beta2 = 0.999;
  double eps = 1e-7;
  double weight_decay = 1e-7;
  double clip_norm = 5.0;
  double ema_decay = 0.9999;
  // Ramps the decay as min(decay, (1 + n) / (10 + n)) over updates n.
  bool ema_warmup = true;
  int batch_size = 16;
  int epochs = 40;
  size_t train_passage_limit = 400;
  size_t train_question_limit = 50;
  size_t predict_passage_limit = 1000;
  size_t predict_question_limit = 100;
  uint64_t seed = 42;
  std::string checkpoint = "numnet.ckpt";
  bool eval_with_ema = true;
  // Also writes <checkpoint>.epoch<N> after every epoch.
  bool keep_epoch_checkpoints = false;
  // Stores 64-bit values so a resumed run continues bit-exactly.
  bool exact_checkpoints = false;
  int min_token_count = 1;
  int max_nonzero_signs = 3;
  int max_span_length = 8;

  nlohmann::ordered_json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json &json);
};

struct RunConfig {
  model::ModelConfig model;
  TrainConfig train;

  nlohmann::ordered_json ToJson() const;
  // FNV-1a of the serialized config, 16 hex digits.
  std::string Hash() const;
  // "# key = value" lines followed by "# config_hash = ...".
  std::string Echo() const;
};

// Parameters plus everything needed to run them.
struct LoadedModel {
  model::ModelConfig config;
  model::Vocabulary vocab;
  diff::ParamStore params;
  nlohmann::json metadata;
};

// Reads a checkpoint written by Train. When `expected` is given its shapes
// must agree with the stored tensors (VersionError otherwise).
LoadedModel LoadModel(const std::string &path,
                      const std::optional<model::ModelConfig> &expected = {});

struct EpochLog {
  int epoch = 0;  // 1-based
  double mean_loss = 0.0;
  size_t batches = 0;
  std::optional<metrics::MetricReport> dev;
};

struct TrainSummary {
  std::vector<EpochLog> epochs;
  size_t trainable = 0;
  size_t skipped = 0;
  int best_dev_epoch = -1;
};

// Trains on `train`, checkpointing to config.train.checkpoint after each
// epoch (or once at initialisation when epochs is 0). With `resume_from`
// the model, vocabulary and optimizer state come from that checkpoint and
// training continues at its next epoch. Progress goes to `log` if set.
TrainSummary Train(const Corpus &train, const Corpus *dev, RunConfig config,
                   const std::string &resume_from = "",
                   std::ostream *log = nullptr);

// One prediction per example, in corpus order. Uses EMA weights when
// `use_ema` is set and the model has them.
std::vector<std::pair<std::string, answer::Prediction>> Predict(
    LoadedModel &model, const Corpus &corpus, const TrainConfig &config,
    bool use_ema);

// query_id -> text, for metrics::Evaluate.
std::map<std::string, std::string> PredictionTexts(
    const std::vector<std::pair<std::string, answer::Prediction>> &preds);

struct ToyGradCheckOptions {
  int hidden_dim = 8;
  int reasoning_steps = 2;
  uint64_t seed = 42;
  diff::GradCheckOptions check;
};

// Full-model gradient check on a tiny model and one synthetic example per
// answer family.
diff::GradCheckReport RunToyGradCheck(const ToyGradCheckOptions &options);

}  // namespace numnet::cli

#endif  // NUMNET_COMMANDS_H_
