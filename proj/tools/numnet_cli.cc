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

// numnet: train, predict, evaluate, graph, augment, gradcheck, synth.
//
// Every subcommand accepts --config FILE, an INI file of key = value lines
// using the long flag names (dashes or underscores), optionally under a
// [<subcommand>] section. Flags given on the command line win over the file.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "numnet/commands.h"
#include "numnet/graph.h"
#include "numnet/metrics.h"
#include "numnet/synth.h"
#include "numnet/textnum.h"

namespace {

using numnet::cli::RunConfig;
using numnet::cli::TrainConfig;

struct ModelFlags {
  bool no_gnn = false;
  bool no_question_numbers = false;
  bool no_greater = false;
  bool no_lower_equal = false;
  bool no_passage_preferred = false;
  bool no_hundred = false;

  void Apply(numnet::model::ModelConfig &c) const {
    c.use_gnn = !no_gnn;
    c.graph.include_question_numbers = !no_question_numbers;
    c.graph.enable_greater_edges = !no_greater;
    c.graph.enable_lower_equal_edges = !no_lower_equal;
    c.passage_preferred = !no_passage_preferred;
    c.append_hundred = !no_hundred;
  }
};

void AddGraphFlags(CLI::App *cmd, ModelFlags &f) {
  cmd->add_flag("--no-question-numbers", f.no_question_numbers,
                "Leave question numbers out of the graph");
  cmd->add_flag("--no-greater-edges", f.no_greater, "Drop greater edges");
  cmd->add_flag("--no-lower-equal-edges", f.no_lower_equal,
                "Drop lower-or-equal edges");
}

void AddModelFlags(CLI::App *cmd, RunConfig &rc, ModelFlags &f) {
  auto &m = rc.model;
  cmd->add_option("--hidden-dim", m.hidden_dim, "Representation size")
      ->capture_default_str();
  cmd->add_option("--steps", m.reasoning_steps, "Reasoning steps K")
      ->capture_default_str();
  cmd->add_option("--embed-dim", m.embed_dim, "Word embedding size")
      ->capture_default_str();
  cmd->add_option("--head-hidden", m.head_hidden, "Answer head hidden size")
      ->capture_default_str();
  cmd->add_flag("--no-gnn", f.no_gnn, "Bypass graph reasoning (M0 = MP)");
  cmd->add_flag("--no-passage-preferred", f.no_passage_preferred,
                "Keep question spans when passage spans match");
  cmd->add_flag("--no-hundred", f.no_hundred, "Do not append 100 as operand");
  AddGraphFlags(cmd, f);
}

void AddTrainFlags(CLI::App *cmd, TrainConfig &t) {
  cmd->add_option("--lr", t.lr)->capture_default_str();
  cmd->add_option("--beta1", t.beta1)->capture_default_str();
  cmd->add_option("--beta2", t.beta2)->capture_default_str();
  cmd->add_option("--eps", t.eps)->capture_default_str();
  cmd->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  cmd->add_option("--clip-norm", t.clip_norm)->capture_default_str();
  cmd->add_option("--ema-decay", t.ema_decay)->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size)->capture_default_str();
  cmd->add_option("--epochs", t.epochs)->capture_default_str();
  cmd->add_option("--train-passage-limit", t.train_passage_limit)
      ->capture_default_str();
  cmd->add_option("--train-question-limit", t.train_question_limit)
      ->capture_default_str();
  cmd->add_option("--seed", t.seed)->capture_default_str();
  cmd->add_option("--min-token-count", t.min_token_count)
      ->capture_default_str();
  cmd->add_option("--max-nonzero-signs", t.max_nonzero_signs)
      ->capture_default_str();
  cmd->add_flag("--keep-epoch-checkpoints", t.keep_epoch_checkpoints,
                "Keep a copy of every epoch's checkpoint");
  cmd->add_flag("--exact-checkpoints", t.exact_checkpoints,
                "Store 64-bit values");
}

void AddPredictFlags(CLI::App *cmd, TrainConfig &t) {
  cmd->add_option("--predict-passage-limit", t.predict_passage_limit)
      ->capture_default_str();
  cmd->add_option("--predict-question-limit", t.predict_question_limit)
      ->capture_default_str();
  cmd->add_option("--max-span-length", t.max_span_length)
      ->capture_default_str();
}

void WriteText(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string OneLine(std::string text) {
  for (char &c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

bool OnCommandLine(const std::vector<std::string> &args, const std::string &flag) {
  for (const auto &a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

// Turns the entries of the subcommand's --config file into flags appended
// after the command line, skipping flags the command line already sets.
std::vector<std::string> ExpandConfig(CLI::App &app,
                                      std::vector<std::string> args) {
  if (args.empty()) return args;
  CLI::App *sub = app.get_subcommand_no_throw(args[0]);
  if (sub == nullptr) return args;
  std::string path;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::vector<std::string> extra;
  for (const CLI::ConfigItem &item : CLI::ConfigINI().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && item.parents.front() != sub->get_name()) {
      continue;
    }
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    const CLI::Option *opt = sub->get_option_no_throw(flag);
    if (opt == nullptr || key == "config") {
      throw std::runtime_error(path + ": unknown key '" + item.name +
                               "' for " + sub->get_name());
    }
    if (OnCommandLine(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      std::string v = item.inputs.empty() ? "true" : item.inputs.front();
      std::transform(v.begin(), v.end(), v.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      if (v == "true" || v == "1" || v == "yes" || v == "on") {
        extra.push_back(flag);
      }
      continue;
    }
    for (const auto &value : item.inputs) {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Numerical reading comprehension with graph reasoning"};
  app.require_subcommand(1);

  RunConfig rc;
  ModelFlags mflags;
  std::string config_path;

  // train
  std::string train_path, dev_path, resume;
  bool augment = false, no_eval_ema = false, no_ema_warmup = false;
  auto *train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", config_path, "INI file of flag values");
  train->add_option("--train", train_path, "Training corpus (DROP JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--dev", dev_path, "Dev corpus evaluated every epoch")
      ->check(CLI::ExistingFile);
  train->add_option("--checkpoint", rc.train.checkpoint)->capture_default_str();
  train->add_option("--resume", resume, "Continue from this checkpoint")
      ->check(CLI::ExistingFile);
  train->add_flag("--augment", augment, "Add swapped comparison questions");
  train->add_flag("--no-eval-ema", no_eval_ema,
                  "Evaluate dev with raw weights");
  train->add_flag("--no-ema-warmup", no_ema_warmup,
                  "Use the fixed EMA decay from the first update");
  AddModelFlags(train, rc, mflags);
  AddTrainFlags(train, rc.train);
  AddPredictFlags(train, rc.train);

  // predict
  std::string ckpt_path, input_path, output_path;
  bool no_ema = false;
  TrainConfig pconf;
  auto *predict = app.add_subcommand("predict", "Write predictions");
  predict->add_option("--config", config_path, "INI file of flag values");
  predict->add_option("--checkpoint", ckpt_path)
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--input", input_path, "Corpus (DROP JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  predict->add_option("--output", output_path, "JSONL output ('-' = stdout)")
      ->required();
  predict->add_flag("--no-ema", no_ema, "Use raw instead of EMA weights");
  AddPredictFlags(predict, pconf);

  // evaluate
  std::string pred_path, gold_path, per_example_path, report_path;
  auto *evaluate = app.add_subcommand("evaluate", "Score predictions");
  evaluate->add_option("--config", config_path, "INI file of flag values");
  evaluate->add_option("--predictions", pred_path)
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--gold", gold_path)
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--per-example", per_example_path,
                       "Per-example JSONL output");
  evaluate->add_option("--output", report_path, "Report file (default stdout)");

  // graph
  std::string query_id, format = "dot";
  ModelFlags gflags;
  auto *graph = app.add_subcommand("graph", "Dump one example's number graph");
  graph->add_option("--config", config_path, "INI file of flag values");
  graph->add_option("--input", input_path)
      ->required()
      ->check(CLI::ExistingFile);
  graph->add_option("--query-id", query_id)->required();
  graph->add_option("--format", format)
      ->check(CLI::IsMember({"dot", "json"}))
      ->capture_default_str();
  graph->add_option("--output", output_path, "Output file (default stdout)");
  AddGraphFlags(graph, gflags);

  // augment
  uint64_t augment_seed = 42;
  auto *aug = app.add_subcommand("augment", "Add swapped comparison questions");
  aug->add_option("--config", config_path, "INI file of flag values");
  aug->add_option("--input", input_path)
      ->required()
      ->check(CLI::ExistingFile);
  aug->add_option("--output", output_path)->required();
  aug->add_option("--seed", augment_seed)->capture_default_str();

  // gradcheck
  numnet::cli::ToyGradCheckOptions gc;
  auto *gradcheck =
      app.add_subcommand("gradcheck", "Finite-difference check of the model");
  gradcheck->add_option("--config", config_path, "INI file of flag values");
  gradcheck->add_option("--hidden-dim", gc.hidden_dim)->capture_default_str();
  gradcheck->add_option("--steps", gc.reasoning_steps)->capture_default_str();
  gradcheck->add_option("--seed", gc.seed)->capture_default_str();
  gradcheck->add_option("--step", gc.check.step)->capture_default_str();
  gradcheck->add_option("--tol", gc.check.tolerance)->capture_default_str();
  gradcheck->add_option("--max-entries", gc.check.max_entries_per_param)
      ->capture_default_str();

  // synth
  numnet::synth::SyntheticSpec spec;
  std::string family = "mixed";
  auto *synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--config", config_path, "INI file of flag values");
  synth->add_option("--family", family)
      ->check(CLI::IsMember({"comparison", "arithmetic", "count", "mixed"}))
      ->capture_default_str();
  synth->add_option("--size", spec.size)->capture_default_str();
  synth->add_option("--seed", spec.seed)->capture_default_str();
  synth->add_option("--min-value", spec.min_value)->capture_default_str();
  synth->add_option("--max-value", spec.max_value)->capture_default_str();
  synth->add_option("--id-prefix", spec.id_prefix)->capture_default_str();
  synth->add_option("--output", output_path)->required();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = ExpandConfig(app, std::move(args));
  } catch (const std::exception &e) {
    std::cerr << "numnet: error: " << OneLine(e.what()) << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    std::cerr << "numnet: error: " << OneLine(e.what()) << "\n";
    return 1;
  }

  try {
    if (train->parsed()) {
      mflags.Apply(rc.model);
      rc.train.eval_with_ema = !no_eval_ema;
      rc.train.ema_warmup = !no_ema_warmup;
      numnet::Corpus corpus = numnet::LoadDropJsonFile(train_path);
      if (augment) corpus = numnet::AugmentComparisons(corpus, rc.train.seed);
      numnet::Corpus dev;
      if (!dev_path.empty()) {
        dev = numnet::LoadDropJsonFile(dev_path, numnet::Split::kDev);
      }
      numnet::cli::Train(corpus, dev_path.empty() ? nullptr : &dev, rc, resume,
                         &std::cerr);
    } else if (predict->parsed()) {
      auto model = numnet::cli::LoadModel(ckpt_path);
      numnet::Corpus corpus =
          numnet::LoadDropJsonFile(input_path, numnet::Split::kDev);
      auto preds = numnet::cli::Predict(model, corpus, pconf, !no_ema);
      std::string text;
      for (const auto &[id, p] : preds) {
        text += numnet::answer::PredictionRecord(id, p);
        text += '\n';
      }
      WriteText(output_path, text);
    } else if (evaluate->parsed()) {
      auto preds = numnet::answer::ReadPredictions(pred_path);
      numnet::Corpus gold =
          numnet::LoadDropJsonFile(gold_path, numnet::Split::kDev);
      auto report = numnet::metrics::Evaluate(preds, gold);
      if (!per_example_path.empty()) {
        WriteText(per_example_path, numnet::metrics::FormatPerExample(report));
      }
      WriteText(report_path, numnet::metrics::FormatReport(report));
    } else if (graph->parsed()) {
      numnet::Corpus corpus = numnet::LoadDropJsonFile(input_path);
      const numnet::DropExample *ex = corpus.Find(query_id);
      if (ex == nullptr) {
        throw std::out_of_range("unknown query_id '" + query_id + "'");
      }
      numnet::model::ModelConfig mc;
      gflags.Apply(mc);
      numnet::NumGraph g = numnet::BuildGraph(ex->question_numbers,
                                              ex->passage_numbers, mc.graph);
      WriteText(output_path,
                numnet::DumpGraph(g, format == "dot" ? numnet::DumpFormat::kDot
                                                     : numnet::DumpFormat::kJson));
    } else if (aug->parsed()) {
      numnet::Corpus corpus = numnet::LoadDropJsonFile(input_path);
      numnet::SaveDropJsonFile(numnet::AugmentComparisons(corpus, augment_seed),
                               output_path);
    } else if (gradcheck->parsed()) {
      auto report = numnet::cli::RunToyGradCheck(gc);
      std::cout << report.Format();
      if (!report.passed) {
        std::cerr << "numnet: error: gradient check failed\n";
        return 1;
      }
    } else if (synth->parsed()) {
      spec.family = numnet::synth::ParseFamily(family);
      numnet::SaveDropJsonFile(numnet::synth::Generate(spec), output_path);
    }
  } catch (const std::exception &e) {
    std::cerr << "numnet: error: " << OneLine(e.what()) << "\n";
    return 1;
  }
  return 0;
}
