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

// The reading model.
//
// Question and passage are embedded and encoded by one shared
// self-attention/feed-forward block, joined by context-query attention and
// re-encoded. Number occurrences then form a graph whose node states are
// refined by K rounds of relation-typed message passing; the results are
// scattered back to their passage positions and fused into the passage
// representation that feeds the answer heads.
//
// Every stage is a free function recording onto a diff::Tape, so a test can
// run any prefix of the pipeline and inspect or differentiate it.

#ifndef NUMNET_MODEL_H_
#define NUMNET_MODEL_H_

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "numnet/answer.h"
#include "numnet/graph.h"
#include "numnet/tensor.h"
#include "numnet/textnum.h"

namespace numnet::model {

using diff::ParamStore;
using diff::Tape;
using diff::Var;

struct ModelConfig {
  int hidden_dim = 128;
  int reasoning_steps = 3;
  int vocab_size = 0;
  int embed_dim = 64;
  int head_hidden = 128;
  GraphConfig graph;
  bool use_gnn = true;
  bool passage_preferred = true;
  bool append_hundred = true;

  nlohmann::ordered_json ToJson() const;
  // Missing keys keep their defaults.
  static ModelConfig FromJson(const nlohmann::json &json);
  bool operator==(const ModelConfig &) const = default;
};

// Lowercased token strings to ids. Id 0 is the unknown token.
class Vocabulary {
 public:
  static constexpr int kUnknown = 0;

  Vocabulary();
  // Tokens of every question and passage, in first-seen order, that occur
  // at least `min_count` times.
  static Vocabulary Build(const Corpus &corpus, int min_count = 1);

  int Id(const std::string &token) const;
  std::vector<int> Ids(const std::vector<Token> &tokens) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  nlohmann::json ToJson() const;
  static Vocabulary FromJson(const nlohmann::json &json);

 private:
  void Insert(const std::string &token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct ParamSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  // Entries are drawn from uniform(-scale, scale); zero for biases.
  double scale = 0.0;
};

// Every trainable tensor of a model with this config, in a fixed order.
std::vector<ParamSpec> ParamSpecs(const ModelConfig &config);

// Fills `params` from ParamSpecs. Each tensor draws from its own stream
// ("init/<name>"), so adding or removing a tensor leaves the others intact.
void InitParams(const ModelConfig &config, uint64_t seed, ParamStore &params);

// Name of the transform matrix for one relation, e.g. "gnn.rel.greater_pp".
std::string RelationParamName(Relation rel);

// An example with everything the network needs precomputed.
struct Instance {
  DropExample example;
  NumGraph graph;
  std::vector<int> question_ids;
  std::vector<int> passage_ids;
  answer::SupervisionSet supervision;
};

// Trims, builds the graph and maps tokens. Supervision is enumerated only
// when `with_supervision` is set.
Instance Prepare(const DropExample &raw, const ModelConfig &config,
                 const Vocabulary &vocab, size_t passage_limit,
                 size_t question_limit, bool with_supervision,
                 const answer::SupervisionConfig &supervision = {});

struct EncodedPair {
  Var Q, P;        // embedding encoder output, d x |q| and d x |p|
  Var Qbar, Pbar;  // after context-query attention
  Var MQ, MP;      // after the shared projection and model encoder
  Var p2q_attention;  // |p| x |q| row-softmax of the similarity
};

// Throws ContractError on an empty question or passage.
EncodedPair Encode(Tape &tape, const ModelConfig &config,
                   const std::vector<int> &question_ids,
                   const std::vector<int> &passage_ids);

struct NodeStates {
  Var v;      // d x N
  Var alpha;  // 1 x N, from the last step (invalid before the first)
  int step = 0;
  int num_nodes = 0;
};

// Column i is MQ or MP at node i's token index.
NodeStates InitNodes(Tape &tape, const NumGraph &graph,
                     const EncodedPair &enc);

// One round of gated, relation-typed message passing. Each incoming edge
// contributes one term and one unit to the neighbourhood size.
NodeStates ReasoningStep(Tape &tape, const NumGraph &graph,
                         const NodeStates &states);

// Applies ReasoningStep `steps` times and returns the final node states.
Var ReasonK(Tape &tape, const NumGraph &graph, const NodeStates &states,
            int steps);

// Scatters node states to passage positions and fuses them with MP.
Var Fuse(Tape &tape, const EncodedPair &enc, Var node_states,
         const NumGraph &graph);

struct HeadOutputs {
  Var type_logits;   // 1 x 4
  Var p_start;       // 1 x |p|
  Var p_end;
  Var q_start;       // 1 x |q|
  Var q_end;
  Var count_logits;  // 1 x 10
  Var sign_logits;   // rows x 3; rows = passage numbers (+1 for 100)
  int sign_rows = 0;
  std::vector<uint8_t> type_mask;  // feasible answer types
};

HeadOutputs Heads(Tape &tape, const ModelConfig &config, Var m0,
                  const EncodedPair &enc, const DropExample &example);

// Encode, reason, fuse and score. With use_gnn off, M0 is MP.
HeadOutputs Forward(Tape &tape, const ModelConfig &config,
                    const Instance &instance);

// Negative log of the marginal probability of all gold-consistent
// candidates. Throws ContractError on empty supervision.
Var Loss(const HeadOutputs &outputs,
         const answer::SupervisionSet &supervision, bool passage_preferred);

answer::HeadValues ToHeadValues(const HeadOutputs &outputs);

// Runs the forward pass on a fresh tape and returns plain values.
answer::HeadValues Infer(const ParamStore &params, const ModelConfig &config,
                         const Instance &instance);

}  // namespace numnet::model

#endif  // NUMNET_MODEL_H_
