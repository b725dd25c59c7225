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

// Runs the numnet binary end to end.

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "numnet/textnum.h"
#include "temp_dir.h"

namespace {

using numnet::testing::ReadFile;
using numnet::testing::TempDir;
using numnet::testing::WriteFile;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

Result Run(const TempDir &dir, const std::string &args) {
  const std::string out = dir.File("stdout.txt");
  const std::string err = dir.File("stderr.txt");
  std::string cmd = std::string(NUMNET_CLI_PATH) + " " + args + " >" + out +
                    " 2>" + err;
  int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = ReadFile(out);
  r.err = ReadFile(err);
  return r;
}

size_t CountLines(const std::string &text) {
  size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

void CheckOneLineError(const Result &r) {
  CHECK(r.code == 1);
  CHECK(r.err.rfind("numnet: error: ", 0) == 0);
  CHECK(CountLines(r.err) == 1);
}

}  // namespace

TEST_CASE("usage errors") {
  TempDir dir("cli");
  CheckOneLineError(Run(dir, ""));
  CheckOneLineError(Run(dir, "frobnicate"));
  CheckOneLineError(Run(dir, "synth --size 3"));  // missing --output
  CheckOneLineError(Run(dir, "synth --output x.json --size nope"));
  CheckOneLineError(
      Run(dir, "evaluate --predictions none.jsonl --gold none.json"));
  Result help = Run(dir, "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("gradcheck") != std::string::npos);
}

TEST_CASE("synth, graph and augment") {
  TempDir dir("cli");
  const std::string corpus = dir.File("c.json");
  Result r = Run(dir, "synth --family comparison --size 4 --seed 3 --id-prefix z "
                      "--output " + corpus);
  REQUIRE(r.code == 0);
  CHECK(r.err.empty());
  numnet::Corpus c = numnet::LoadDropJsonFile(corpus);
  REQUIRE(c.examples.size() == 4);
  CHECK(c.examples[0].query_id == "z-comparison-0");
  CheckOneLineError(Run(dir, "synth --family dates --output " + corpus));
  CheckOneLineError(
      Run(dir, "synth --min-value 5 --max-value 6 --output " + corpus));

  SUBCASE("graph dumps") {
    Result dot = Run(dir, "graph --input " + corpus + " --query-id z-comparison-0");
    REQUIRE(dot.code == 0);
    CHECK(dot.out.rfind("digraph numgraph {", 0) == 0);
    Result js = Run(dir, "graph --format json --input " + corpus +
                             " --query-id z-comparison-0");
    REQUIRE(js.code == 0);
    auto j = nlohmann::json::parse(js.out);
    CHECK(j["nodes"].size() == c.examples[0].passage_numbers.size());
    Result no_q = Run(dir, "graph --format json --no-greater-edges --input " +
                               corpus + " --query-id z-comparison-0");
    REQUIRE(no_q.code == 0);
    for (const auto &e : nlohmann::json::parse(no_q.out)["edges"]) {
      CHECK(e["relation"].get<std::string>().rfind("greater", 0) != 0);
    }
    Result missing = Run(dir, "graph --input " + corpus + " --query-id nope");
    CheckOneLineError(missing);
    CHECK(missing.err.find("nope") != std::string::npos);
  }
  SUBCASE("augment") {
    const std::string out = dir.File("aug.json");
    REQUIRE(Run(dir, "augment --input " + corpus + " --output " + out).code == 0);
    numnet::Corpus a = numnet::LoadDropJsonFile(out);
    CHECK(a.examples.size() == 8);
    CHECK(a.Find("z-comparison-0#swap") != nullptr);
  }
}

TEST_CASE("config precedence") {
  TempDir dir("cli");
  const std::string corpus = dir.File("c.json");
  REQUIRE(Run(dir, "synth --size 6 --output " + corpus).code == 0);
  const std::string ini = dir.File("run.ini");
  WriteFile(ini, "# tiny run\nhidden-dim = 12\nsteps = 1\nembed_dim = 12\n"
                 "head-hidden = 12\nepochs = 0\n[train]\nlr = 0.002\n"
                 "[predict]\nno-ema = true\n");
  const std::string base = "train --train " + corpus + " --checkpoint " +
                           dir.File("m.ckpt") + " --config " + ini;

  Result from_file = Run(dir, base);
  REQUIRE(from_file.code == 0);
  CHECK(from_file.err.find("# model.hidden_dim = 12\n") != std::string::npos);
  CHECK(from_file.err.find("# model.reasoning_steps = 1\n") != std::string::npos);
  CHECK(from_file.err.find("# train.lr = 0.002\n") != std::string::npos);
  // Untouched keys keep their defaults.
  CHECK(from_file.err.find("# train.batch_size = 16\n") != std::string::npos);

  Result flag_wins = Run(dir, base + " --hidden-dim 10 --lr 0.003");
  REQUIRE(flag_wins.code == 0);
  CHECK(flag_wins.err.find("# model.hidden_dim = 10\n") != std::string::npos);
  CHECK(flag_wins.err.find("# train.lr = 0.003\n") != std::string::npos);
  CHECK(flag_wins.err.find("# model.reasoning_steps = 1\n") != std::string::npos);

  WriteFile(dir.File("bad.ini"), "hidden-dim = 12\nno-such-key = 3\n");
  Result bad = Run(dir, "train --train " + corpus + " --config " +
                            dir.File("bad.ini"));
  CheckOneLineError(bad);
  CHECK(bad.err.find("no-such-key") != std::string::npos);
  CheckOneLineError(Run(dir, base + ".missing"));
}

TEST_CASE("train, predict and evaluate") {
  TempDir dir("cli");
  const std::string train = dir.File("train.json");
  const std::string dev = dir.File("dev.json");
  const std::string ckpt = dir.File("m.ckpt");
  REQUIRE(Run(dir, "synth --size 9 --seed 1 --output " + train).code == 0);
  REQUIRE(Run(dir, "synth --size 6 --seed 2 --id-prefix dev --output " + dev)
              .code == 0);
  Result t = Run(dir, "train --train " + train + " --dev " + dev +
                          " --checkpoint " + ckpt +
                          " --hidden-dim 8 --embed-dim 8 --head-hidden 8 "
                          "--steps 1 --epochs 2 --batch-size 4");
  REQUIRE(t.code == 0);
  CHECK(t.err.find("# config_hash = ") != std::string::npos);
  CHECK(t.err.find("epoch 2 loss ") != std::string::npos);
  CHECK(t.err.find("dev_em ") != std::string::npos);

  const std::string preds = dir.File("preds.jsonl");
  REQUIRE(Run(dir, "predict --checkpoint " + ckpt + " --input " + dev +
                       " --output " + preds)
              .code == 0);
  std::istringstream lines(ReadFile(preds));
  size_t n = 0;
  for (std::string line; std::getline(lines, line); ++n) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("query_id"));
    CHECK(j.contains("text"));
    CHECK(j.contains("type"));
  }
  CHECK(n == 6);
  Result to_stdout =
      Run(dir, "predict --checkpoint " + ckpt + " --input " + dev + " --output -");
  CHECK(to_stdout.out == ReadFile(preds));

  Result ev = Run(dir, "evaluate --predictions " + preds + " --gold " + dev +
                           " --per-example " + dir.File("per.jsonl"));
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("Comparison") != std::string::npos);
  CHECK(ev.out.find("Number") != std::string::npos);
  CHECK(ev.out.find("ALL") != std::string::npos);
  CHECK(CountLines(ReadFile(dir.File("per.jsonl"))) == 6);

  CheckOneLineError(Run(dir, "predict --checkpoint " + train + " --input " +
                                 dev + " --output -"));
}

TEST_CASE("gradcheck") {
  TempDir dir("cli");
  Result r = Run(dir, "gradcheck --hidden-dim 4 --steps 1 --max-entries 10");
  CHECK(r.code == 0);
  CHECK(r.out.find("gnn.rel.greater_pp") != std::string::npos);
}
