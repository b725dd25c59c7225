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

#include "numnet/commands.h"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "numnet/checkpoint.h"
#include "numnet/optim.h"
#include "numnet/synth.h"

namespace numnet::cli {

using diff::Gradients;
using diff::Matrix;
using diff::ParamStore;
using diff::Tape;
using diff::Var;

namespace {

void AddInto(Gradients &total, const Gradients &part) {
  for (const auto &[name, g] : part) {
    auto it = total.find(name);
    if (it == total.end()) {
      total.emplace(name, g);
    } else {
      it->second += g;
    }
  }
}

nlohmann::json Metadata(const RunConfig &config, const model::Vocabulary &vocab,
                        int epoch) {
  nlohmann::json meta;
  meta["model_config"] = config.model.ToJson();
  meta["train_config"] = config.train.ToJson();
  meta["vocab"] = vocab.ToJson();
  meta["epoch"] = epoch;
  return meta;
}

void Save(const std::string &path, const ParamStore &params,
          const RunConfig &config, const model::Vocabulary &vocab, int epoch) {
  diff::SaveOptions options;
  options.dtype = config.train.exact_checkpoints ? diff::StorageType::kFloat64
                                                 : diff::StorageType::kFloat32;
  diff::SaveCheckpoint(path, params, Metadata(config, vocab, epoch), options);
}

std::string FormatEpoch(const EpochLog &e) {
  char line[160];
  std::snprintf(line, sizeof(line), "epoch %d loss %.6f batches %zu", e.epoch,
                e.mean_loss, e.batches);
  std::string out = line;
  if (e.dev) {
    std::snprintf(line, sizeof(line), " dev_em %.4f dev_f1 %.4f", e.dev->em,
                  e.dev->f1);
    out += line;
  }
  return out;
}

}  // namespace

nlohmann::ordered_json TrainConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["lr"] = lr;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["eps"] = eps;
  j["weight_decay"] = weight_decay;
  j["clip_norm"] = clip_norm;
  j["ema_decay"] = ema_decay;
  j["ema_warmup"] = ema_warmup;
  j["batch_size"] = batch_size;
  j["epochs"] = epochs;
  j["train_passage_limit"] = train_passage_limit;
  j["train_question_limit"] = train_question_limit;
  j["predict_passage_limit"] = predict_passage_limit;
  j["predict_question_limit"] = predict_question_limit;
  j["seed"] = seed;
  j["checkpoint"] = checkpoint;
  j["eval_with_ema"] = eval_with_ema;
  j["keep_epoch_checkpoints"] = keep_epoch_checkpoints;
  j["exact_checkpoints"] = exact_checkpoints;
  j["min_token_count"] = min_token_count;
  j["max_nonzero_signs"] = max_nonzero_signs;
  j["max_span_length"] = max_span_length;
  return j;
}

TrainConfig TrainConfig::FromJson(const nlohmann::json &j) {
  TrainConfig c;
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.ema_decay = j.value("ema_decay", c.ema_decay);
  c.ema_warmup = j.value("ema_warmup", c.ema_warmup);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.train_passage_limit = j.value("train_passage_limit", c.train_passage_limit);
  c.train_question_limit =
      j.value("train_question_limit", c.train_question_limit);
  c.predict_passage_limit =
      j.value("predict_passage_limit", c.predict_passage_limit);
  c.predict_question_limit =
      j.value("predict_question_limit", c.predict_question_limit);
  c.seed = j.value("seed", c.seed);
  c.checkpoint = j.value("checkpoint", c.checkpoint);
  c.eval_with_ema = j.value("eval_with_ema", c.eval_with_ema);
  c.keep_epoch_checkpoints =
      j.value("keep_epoch_checkpoints", c.keep_epoch_checkpoints);
  c.exact_checkpoints = j.value("exact_checkpoints", c.exact_checkpoints);
  c.min_token_count = j.value("min_token_count", c.min_token_count);
  c.max_nonzero_signs = j.value("max_nonzero_signs", c.max_nonzero_signs);
  c.max_span_length = j.value("max_span_length", c.max_span_length);
  return c;
}

nlohmann::ordered_json RunConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["model"] = model.ToJson();
  j["train"] = train.ToJson();
  return j;
}

std::string RunConfig::Hash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(diff::Fnv1a(ToJson().dump())));
  return buf;
}

std::string RunConfig::Echo() const {
  std::ostringstream out;
  const nlohmann::ordered_json all = ToJson();
  for (const auto &[section, values] : all.items()) {
    for (const auto &[key, value] : values.items()) {
      out << "# " << section << "." << key << " = " << value.dump() << "\n";
    }
  }
  out << "# config_hash = " << Hash() << "\n";
  return out.str();
}

LoadedModel LoadModel(const std::string &path,
                      const std::optional<model::ModelConfig> &expected) {
  diff::Checkpoint ckpt = diff::ReadCheckpoint(path);
  LoadedModel loaded;
  loaded.metadata = ckpt.metadata;
  if (!ckpt.metadata.contains("model_config") ||
      !ckpt.metadata.contains("vocab")) {
    throw diff::VersionError(path + ": checkpoint lacks model metadata");
  }
  loaded.config = model::ModelConfig::FromJson(ckpt.metadata["model_config"]);
  loaded.vocab = model::Vocabulary::FromJson(ckpt.metadata["vocab"]);
  model::ModelConfig shapes = expected.value_or(loaded.config);
  if (expected) {
    shapes.vocab_size = shapes.vocab_size > 0 ? shapes.vocab_size
                                              : loaded.vocab.size();
    loaded.config = shapes;
  }
  model::InitParams(shapes, 0, loaded.params);
  diff::RestoreParams(ckpt, loaded.params);
  return loaded;
}

TrainSummary Train(const Corpus &train, const Corpus *dev, RunConfig config,
                   const std::string &resume_from, std::ostream *log) {
  const TrainConfig &tc = config.train;
  if (tc.batch_size < 1 || tc.epochs < 0 || tc.clip_norm <= 0.0 ||
      tc.lr <= 0.0) {
    throw std::invalid_argument("invalid training configuration");
  }

  model::Vocabulary vocab;
  ParamStore params;
  int start_epoch = 0;
  if (!resume_from.empty()) {
    LoadedModel loaded = LoadModel(resume_from);
    vocab = std::move(loaded.vocab);
    params = std::move(loaded.params);
    config.model = loaded.config;
    start_epoch = loaded.metadata.value("epoch", 0);
  } else {
    vocab = model::Vocabulary::Build(train, tc.min_token_count);
    config.model.vocab_size = vocab.size();
    model::InitParams(config.model, tc.seed, params);
  }
  if (log) *log << config.Echo();

  answer::SupervisionConfig sup;
  sup.max_nonzero_signs = tc.max_nonzero_signs;
  sup.append_hundred = config.model.append_hundred;
  std::vector<model::Instance> instances;
  TrainSummary summary;
  for (const auto &ex : train.examples) {
    model::Instance inst =
        model::Prepare(ex, config.model, vocab, tc.train_passage_limit,
                       tc.train_question_limit, true, sup);
    if (inst.supervision.empty() || inst.example.passage_tokens.empty() ||
        inst.example.question_tokens.empty()) {
      ++summary.skipped;
      continue;
    }
    instances.push_back(std::move(inst));
  }
  summary.trainable = instances.size();
  if (log) {
    *log << "# trainable " << summary.trainable << " skipped "
         << summary.skipped << "\n";
  }
  if (instances.empty()) {
    throw std::runtime_error("no trainable example: no gold answer could be "
                             "matched to a span, count or sign assignment");
  }

  if (tc.epochs == 0 || start_epoch >= tc.epochs) {
    if (resume_from.empty()) Save(tc.checkpoint, params, config, vocab, 0);
    return summary;
  }

  diff::AdamOptions adam{tc.lr, tc.beta1, tc.beta2, tc.eps, tc.weight_decay};
  double best_em = -1.0;
  for (int epoch = start_epoch; epoch < tc.epochs; ++epoch) {
    std::vector<size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    diff::Rng::Stream(tc.seed, "shuffle/epoch-" + std::to_string(epoch))
        .Shuffle(order);

    EpochLog entry;
    entry.epoch = epoch + 1;
    double loss_sum = 0.0;
    for (size_t begin = 0; begin < order.size(); begin += tc.batch_size) {
      size_t end = std::min(order.size(), begin + tc.batch_size);
      Gradients grads;
      double batch_loss = 0.0;
      for (size_t k = begin; k < end; ++k) {
        const model::Instance &inst = instances[order[k]];
        Tape tape(&params);
        model::HeadOutputs out = model::Forward(tape, config.model, inst);
        Var loss = model::Loss(out, inst.supervision,
                               config.model.passage_preferred);
        batch_loss += loss.scalar();
        AddInto(grads, tape.Backward(loss));
      }
      if (!std::isfinite(batch_loss)) {
        throw std::runtime_error("non-finite loss in epoch " +
                                 std::to_string(epoch + 1) + " batch " +
                                 std::to_string(entry.batches + 1));
      }
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (auto &[name, g] : grads) g *= inv;
      diff::ClipGradients(grads, tc.clip_norm);
      diff::AdamStep(params, grads, adam);
      diff::EmaUpdate(params, tc.ema_decay, tc.ema_warmup);
      loss_sum += batch_loss;
      ++entry.batches;
    }
    entry.mean_loss = loss_sum / static_cast<double>(instances.size());

    if (dev) {
      LoadedModel snapshot{config.model, vocab, params, {}};
      auto preds = Predict(snapshot, *dev, tc, tc.eval_with_ema);
      entry.dev = metrics::Evaluate(PredictionTexts(preds), *dev);
      if (entry.dev->em > best_em) {
        best_em = entry.dev->em;
        summary.best_dev_epoch = entry.epoch;
      }
    }
    Save(tc.checkpoint, params, config, vocab, entry.epoch);
    if (tc.keep_epoch_checkpoints) {
      Save(tc.checkpoint + ".epoch" + std::to_string(entry.epoch), params,
           config, vocab, entry.epoch);
    }
    if (log) *log << FormatEpoch(entry) << "\n" << std::flush;
    summary.epochs.push_back(std::move(entry));
  }
  if (log && summary.best_dev_epoch > 0) {
    *log << "# best dev EM at epoch " << summary.best_dev_epoch << "\n";
  }
  return summary;
}

std::vector<std::pair<std::string, answer::Prediction>> Predict(
    LoadedModel &model, const Corpus &corpus, const TrainConfig &config,
    bool use_ema) {
  answer::DecodeConfig decode{config.max_span_length,
                              model.config.append_hundred};
  if (use_ema) diff::EmaSwapIn(model.params);
  std::vector<std::pair<std::string, answer::Prediction>> out;
  try {
    for (const auto &ex : corpus.examples) {
      model::Instance inst = model::Prepare(
          ex, model.config, model.vocab, config.predict_passage_limit,
          config.predict_question_limit, false);
      answer::Prediction pred;
      if (inst.example.passage_tokens.empty() ||
          inst.example.question_tokens.empty()) {
        pred.type = answer::AnswerType::kCount;
        pred.text = "0";
      } else {
        pred = answer::Decode(model::Infer(model.params, model.config, inst),
                              inst.example, decode);
      }
      out.emplace_back(ex.query_id, std::move(pred));
    }
  } catch (...) {
    if (use_ema) diff::EmaSwapOut(model.params);
    throw;
  }
  if (use_ema) diff::EmaSwapOut(model.params);
  return out;
}

std::map<std::string, std::string> PredictionTexts(
    const std::vector<std::pair<std::string, answer::Prediction>> &preds) {
  std::map<std::string, std::string> out;
  for (const auto &[id, p] : preds) out[id] = p.text;
  return out;
}

diff::GradCheckReport RunToyGradCheck(const ToyGradCheckOptions &options) {
  Corpus corpus;
  for (synth::Family f : {synth::Family::kComparison,
                          synth::Family::kArithmetic, synth::Family::kCount}) {
    synth::SyntheticSpec spec;
    spec.family = f;
    spec.size = 1;
    spec.seed = options.seed;
    spec.id_prefix = std::string("toy-") + synth::FamilyName(f);
    Corpus one = synth::Generate(spec);
    corpus.examples.push_back(one.examples.front());
  }

  model::ModelConfig config;
  config.hidden_dim = options.hidden_dim;
  config.embed_dim = options.hidden_dim;
  config.head_hidden = options.hidden_dim;
  config.reasoning_steps = options.reasoning_steps;
  // Question spans stay in the marginal so their head is exercised too.
  config.passage_preferred = false;
  model::Vocabulary vocab = model::Vocabulary::Build(corpus);
  config.vocab_size = vocab.size();

  ParamStore params;
  model::InitParams(config, options.seed, params);
  std::vector<model::Instance> instances;
  for (const auto &ex : corpus.examples) {
    instances.push_back(model::Prepare(ex, config, vocab, 400, 50, true));
  }
  auto loss = [&](Tape &tape) {
    Var total;
    for (const auto &inst : instances) {
      model::HeadOutputs out = model::Forward(tape, config, inst);
      Var l = model::Loss(out, inst.supervision,
                          config.passage_preferred);
      total = total.valid() ? Add(total, l) : l;
    }
    return total;
  };
  return diff::GradCheck(loss, params, options.check);
}

}  // namespace numnet::cli
