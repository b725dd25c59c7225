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

#include "numnet/model.h"

#include <array>
#include <cmath>
#include <limits>
#include <set>

namespace numnet::model {

using diff::ContractError;
using diff::Matrix;

namespace {

constexpr double kPositionScale = 0.1;

std::string Lower(const std::string &text) {
  std::string out = text;
  for (char &c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Matrix PositionSignal(int dim, int length) {
  Matrix pos(dim, length);
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < dim; ++i) {
      double rate = std::pow(10000.0, -2.0 * (i / 2) / dim);
      pos(i, t) = kPositionScale *
                  (i % 2 == 0 ? std::sin(t * rate) : std::cos(t * rate));
    }
  }
  return pos;
}

void AddBlockSpecs(std::vector<ParamSpec> &specs, const std::string &prefix,
                   int d) {
  double s = 1.0 / std::sqrt(static_cast<double>(d));
  specs.push_back({prefix + ".att_q", d, d, s});
  specs.push_back({prefix + ".att_k", d, d, s});
  specs.push_back({prefix + ".att_v", d, d, s});
  specs.push_back({prefix + ".ffn_w1", d, d, s});
  specs.push_back({prefix + ".ffn_b1", d, 1, 0.0});
  specs.push_back({prefix + ".ffn_w2", d, d, s});
  specs.push_back({prefix + ".ffn_b2", d, 1, 0.0});
}

void AddFfnSpecs(std::vector<ParamSpec> &specs, const std::string &prefix,
                 int in, int hidden, int out) {
  specs.push_back({prefix + ".w1", hidden, in, 1.0 / std::sqrt(in)});
  specs.push_back({prefix + ".b1", hidden, 1, 0.0});
  specs.push_back({prefix + ".w2", out, hidden, 1.0 / std::sqrt(hidden)});
  specs.push_back({prefix + ".b2", out, 1, 0.0});
}

// Self-attention with a residual, then a feed-forward layer with a residual.
Var EncoderBlock(Tape &tape, const std::string &prefix, Var x) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.rows()));
  Var q = MatMul(tape.Param(prefix + ".att_q"), x);
  Var k = MatMul(tape.Param(prefix + ".att_k"), x);
  Var v = MatMul(tape.Param(prefix + ".att_v"), x);
  Var weights = SoftmaxRows(Scale(MatMul(Transpose(q), k), scale));
  Var attended = Add(x, MatMul(v, Transpose(weights)));
  Var hidden = Relu(AddBias(MatMul(tape.Param(prefix + ".ffn_w1"), attended),
                            tape.Param(prefix + ".ffn_b1")));
  return Add(attended,
             AddBias(MatMul(tape.Param(prefix + ".ffn_w2"), hidden),
                     tape.Param(prefix + ".ffn_b2")));
}

Var Ffn(Tape &tape, const std::string &prefix, Var x) {
  Var h = Relu(AddBias(MatMul(tape.Param(prefix + ".w1"), x),
                       tape.Param(prefix + ".b1")));
  return AddBias(MatMul(tape.Param(prefix + ".w2"), h),
                 tape.Param(prefix + ".b2"));
}

Var Embed(Tape &tape, const std::vector<int> &ids) {
  Var emb = EmbeddingLookup(tape.Param("embed.table"), ids);
  Var proj = MatMul(tape.Param("embed.proj"), emb);
  Var x = Add(proj, tape.Constant(PositionSignal(
                        static_cast<int>(proj.rows()),
                        static_cast<int>(ids.size()))));
  return EncoderBlock(tape, "enc", x);
}

// W [x; y; x * y] + b.
Var AttentionMerge(Tape &tape, Var x, Var y) {
  Var stacked = ConcatRows(ConcatRows(x, y), Mul(x, y));
  return AddBias(MatMul(tape.Param("cqa.merge_w"), stacked),
                 tape.Param("cqa.merge_b"));
}

Eigen::VectorXd RowToVector(const Matrix &m) {
  return m.size() == 0 ? Eigen::VectorXd() : Eigen::VectorXd(m.row(0));
}

}  // namespace

nlohmann::ordered_json ModelConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["hidden_dim"] = hidden_dim;
  j["reasoning_steps"] = reasoning_steps;
  j["vocab_size"] = vocab_size;
  j["embed_dim"] = embed_dim;
  j["head_hidden"] = head_hidden;
  j["include_question_numbers"] = graph.include_question_numbers;
  j["enable_greater_edges"] = graph.enable_greater_edges;
  j["enable_lower_equal_edges"] = graph.enable_lower_equal_edges;
  j["use_gnn"] = use_gnn;
  j["passage_preferred"] = passage_preferred;
  j["append_hundred"] = append_hundred;
  return j;
}

ModelConfig ModelConfig::FromJson(const nlohmann::json &j) {
  ModelConfig c;
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.reasoning_steps = j.value("reasoning_steps", c.reasoning_steps);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.head_hidden = j.value("head_hidden", c.head_hidden);
  c.graph.include_question_numbers =
      j.value("include_question_numbers", c.graph.include_question_numbers);
  c.graph.enable_greater_edges =
      j.value("enable_greater_edges", c.graph.enable_greater_edges);
  c.graph.enable_lower_equal_edges =
      j.value("enable_lower_equal_edges", c.graph.enable_lower_equal_edges);
  c.use_gnn = j.value("use_gnn", c.use_gnn);
  c.passage_preferred = j.value("passage_preferred", c.passage_preferred);
  c.append_hundred = j.value("append_hundred", c.append_hundred);
  return c;
}

Vocabulary::Vocabulary() { Insert("<unk>"); }

void Vocabulary::Insert(const std::string &token) {
  if (ids_.emplace(token, static_cast<int>(tokens_.size())).second) {
    tokens_.push_back(token);
  }
}

Vocabulary Vocabulary::Build(const Corpus &corpus, int min_count) {
  std::vector<std::string> order;
  std::unordered_map<std::string, int> counts;
  auto visit = [&](const std::vector<Token> &tokens) {
    for (const auto &t : tokens) {
      std::string key = Lower(t.text);
      if (counts[key]++ == 0) order.push_back(key);
    }
  };
  for (const auto &ex : corpus.examples) {
    visit(ex.question_tokens);
    visit(ex.passage_tokens);
  }
  Vocabulary vocab;
  for (const auto &key : order) {
    if (counts[key] >= min_count) vocab.Insert(key);
  }
  return vocab;
}

int Vocabulary::Id(const std::string &token) const {
  auto it = ids_.find(Lower(token));
  return it == ids_.end() ? kUnknown : it->second;
}

std::vector<int> Vocabulary::Ids(const std::vector<Token> &tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto &t : tokens) ids.push_back(Id(t.text));
  return ids;
}

nlohmann::json Vocabulary::ToJson() const { return tokens_; }

Vocabulary Vocabulary::FromJson(const nlohmann::json &json) {
  Vocabulary vocab;
  vocab.tokens_.clear();
  vocab.ids_.clear();
  for (const auto &t : json) vocab.Insert(t.get<std::string>());
  if (vocab.tokens_.empty() || vocab.tokens_[0] != "<unk>") {
    throw std::invalid_argument("vocabulary must start with <unk>");
  }
  return vocab;
}

std::string RelationParamName(Relation rel) { return "gnn.rel." + rel.Name(); }

std::vector<ParamSpec> ParamSpecs(const ModelConfig &config) {
  const int d = config.hidden_dim;
  const int e = config.embed_dim;
  const int h = config.head_hidden;
  if (d <= 0 || e <= 0 || h <= 0 || config.vocab_size <= 0 ||
      config.reasoning_steps <= 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  const double sd = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<ParamSpec> specs;
  specs.push_back({"embed.table", e, config.vocab_size, 1.0});
  specs.push_back({"embed.proj", d, e, 1.0 / std::sqrt(e)});
  AddBlockSpecs(specs, "enc", d);
  specs.push_back({"cqa.w_p", d, 1, sd});
  specs.push_back({"cqa.w_q", d, 1, sd});
  specs.push_back({"cqa.w_pq", d, 1, sd});
  specs.push_back({"cqa.merge_w", d, 3 * d, 1.0 / std::sqrt(3.0 * d)});
  specs.push_back({"cqa.merge_b", d, 1, 0.0});
  specs.push_back({"mod.proj", d, d, sd});
  AddBlockSpecs(specs, "mod", d);
  if (config.use_gnn) {
    specs.push_back({"gnn.alpha_w", 1, d, sd});
    specs.push_back({"gnn.alpha_b", 1, 1, 0.0});
    for (Relation rel : AllRelations()) {
      specs.push_back({RelationParamName(rel), d, d, sd});
    }
    specs.push_back({"gnn.self_w", d, d, sd});
    specs.push_back({"gnn.self_b", d, 1, 0.0});
    specs.push_back({"fuse.w", d, 2 * d, 1.0 / std::sqrt(2.0 * d)});
    specs.push_back({"fuse.b", d, 1, 0.0});
    AddBlockSpecs(specs, "fuse_enc", d);
  }
  AddFfnSpecs(specs, "head.type", 2 * d, h, answer::kNumAnswerTypes);
  AddFfnSpecs(specs, "head.p_start", d, h, 1);
  AddFfnSpecs(specs, "head.p_end", d, h, 1);
  AddFfnSpecs(specs, "head.q_start", d, h, 1);
  AddFfnSpecs(specs, "head.q_end", d, h, 1);
  AddFfnSpecs(specs, "head.count", d, h, answer::kNumCountClasses);
  specs.push_back({"head.sign.w1", h, d, sd});
  specs.push_back({"head.sign.w1_ctx", h, d, sd});
  specs.push_back({"head.sign.b1", h, 1, 0.0});
  specs.push_back({"head.sign.w2", answer::kNumSignClasses, h,
                   1.0 / std::sqrt(h)});
  specs.push_back({"head.sign.b2", answer::kNumSignClasses, 1, 0.0});
  specs.push_back({"head.sign.hundred", d, 1, sd});
  return specs;
}

void InitParams(const ModelConfig &config, uint64_t seed, ParamStore &params) {
  for (const auto &spec : ParamSpecs(config)) {
    Matrix m = Matrix::Zero(spec.rows, spec.cols);
    if (spec.scale > 0.0) {
      diff::Rng rng = diff::Rng::Stream(seed, "init/" + spec.name);
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          m(r, c) = rng.Uniform(-spec.scale, spec.scale);
        }
      }
    }
    params.Add(spec.name, std::move(m));
  }
}

Instance Prepare(const DropExample &raw, const ModelConfig &config,
                 const Vocabulary &vocab, size_t passage_limit,
                 size_t question_limit, bool with_supervision,
                 const answer::SupervisionConfig &supervision) {
  Instance inst;
  inst.example = Trim(raw, passage_limit, question_limit);
  inst.graph = BuildGraph(inst.example.question_numbers,
                          inst.example.passage_numbers, config.graph);
  inst.question_ids = vocab.Ids(inst.example.question_tokens);
  inst.passage_ids = vocab.Ids(inst.example.passage_tokens);
  if (with_supervision) {
    answer::SupervisionConfig sup = supervision;
    sup.append_hundred = config.append_hundred;
    inst.supervision = answer::EnumerateSupervision(inst.example, sup);
  }
  return inst;
}

EncodedPair Encode(Tape &tape, const ModelConfig &config,
                   const std::vector<int> &question_ids,
                   const std::vector<int> &passage_ids) {
  (void)config;
  if (question_ids.empty() || passage_ids.empty()) {
    throw ContractError("encode: empty question or passage");
  }
  EncodedPair enc;
  enc.Q = Embed(tape, question_ids);
  enc.P = Embed(tape, passage_ids);

  // Trilinear similarity: w_p.p_i + w_q.q_j + w_pq.(p_i * q_j), |p| x |q|.
  Var cross = MatMul(Transpose(Mul(enc.P, tape.Param("cqa.w_pq"))), enc.Q);
  Var p_term = Transpose(MatMul(Transpose(tape.Param("cqa.w_p")), enc.P));
  Var q_term = MatMul(Transpose(tape.Param("cqa.w_q")), enc.Q);
  Var sim = Add(Add(cross, p_term), q_term);

  enc.p2q_attention = SoftmaxRows(sim);
  Var q2p = SoftmaxRows(Transpose(sim));
  Var p_context = MatMul(enc.Q, Transpose(enc.p2q_attention));  // d x |p|
  Var q_context = MatMul(enc.P, Transpose(q2p));                 // d x |q|
  enc.Pbar = AttentionMerge(tape, enc.P, p_context);
  enc.Qbar = AttentionMerge(tape, enc.Q, q_context);

  Var proj = tape.Param("mod.proj");
  enc.MQ = EncoderBlock(tape, "mod", MatMul(proj, enc.Qbar));
  enc.MP = EncoderBlock(tape, "mod", MatMul(proj, enc.Pbar));
  return enc;
}

NodeStates InitNodes(Tape &tape, const NumGraph &graph,
                     const EncodedPair &enc) {
  NodeStates states;
  states.num_nodes = static_cast<int>(graph.num_nodes());
  if (states.num_nodes == 0) {
    states.v = tape.Constant(Matrix::Zero(enc.MP.rows(), 0));
    return states;
  }
  const int q_len = static_cast<int>(enc.MQ.cols());
  const int p_len = static_cast<int>(enc.MP.cols());
  std::vector<int> columns;
  columns.reserve(graph.num_nodes());
  for (const auto &node : graph.nodes) {
    int idx = static_cast<int>(node.token_index);
    int limit = node.source == Source::kQuestion ? q_len : p_len;
    if (idx >= limit) {
      throw ContractError("init_nodes: token index " + std::to_string(idx) +
                          " outside " + SourceName(node.source) +
                          " of length " + std::to_string(limit));
    }
    columns.push_back(node.source == Source::kQuestion ? idx : q_len + idx);
  }
  states.v = GatherColumns(ConcatCols(enc.MQ, enc.MP), columns);
  return states;
}

NodeStates ReasoningStep(Tape &tape, const NumGraph &graph,
                         const NodeStates &states) {
  const int n = states.num_nodes;
  if (static_cast<size_t>(n) != graph.num_nodes() || states.v.cols() != n) {
    throw ContractError("reasoning_step: node states do not match graph");
  }
  NodeStates next = states;
  ++next.step;
  if (n == 0) return next;

  Var v = states.v;
  Var alpha = Sigmoid(Add(MatMul(tape.Param("gnn.alpha_w"), v),
                          tape.Param("gnn.alpha_b")));

  std::vector<int> in_degree(n, 0);
  for (const auto &e : graph.edges) ++in_degree[e.to.index];
  std::array<Matrix, kNumRelations> mixing;
  std::array<bool, kNumRelations> used{};
  for (const auto &e : graph.edges) {
    int r = e.rel.index();
    if (!used[r]) {
      mixing[r] = Matrix::Zero(n, n);
      used[r] = true;
    }
    mixing[r](e.from.index, e.to.index) += 1.0 / in_degree[e.to.index];
  }

  Var gated = Mul(v, alpha);
  Var update = MatMul(tape.Param("gnn.self_w"), v);
  for (int r = 0; r < kNumRelations; ++r) {
    if (!used[r]) continue;
    Var transformed =
        MatMul(tape.Param(RelationParamName(Relation::FromIndex(r))), gated);
    update = Add(update, MatMul(transformed, tape.Constant(mixing[r])));
  }
  next.v = Relu(AddBias(update, tape.Param("gnn.self_b")));
  next.alpha = alpha;
  return next;
}

Var ReasonK(Tape &tape, const NumGraph &graph, const NodeStates &states,
            int steps) {
  if (steps < 1) throw ContractError("reason_k: steps must be >= 1");
  NodeStates cur = states;
  for (int k = 0; k < steps; ++k) cur = ReasoningStep(tape, graph, cur);
  return cur.v;
}

Var Fuse(Tape &tape, const EncodedPair &enc, Var node_states,
         const NumGraph &graph) {
  const int p_len = static_cast<int>(enc.MP.cols());
  std::vector<int> nodes, targets;
  std::set<int> seen;
  for (NodeId id : graph.passage_node_ids) {
    int pos = static_cast<int>(graph.nodes[id.index].token_index);
    if (!seen.insert(pos).second) {
      throw ContractError("fuse: two nodes at passage token " +
                          std::to_string(pos));
    }
    nodes.push_back(static_cast<int>(id.index));
    targets.push_back(pos);
  }
  Var numeric = nodes.empty()
                    ? tape.Constant(Matrix::Zero(enc.MP.rows(), p_len))
                    : ScatterColumns(GatherColumns(node_states, nodes),
                                     targets, p_len);
  Var fused = AddBias(
      MatMul(tape.Param("fuse.w"), ConcatRows(enc.MP, numeric)),
      tape.Param("fuse.b"));
  return EncoderBlock(tape, "fuse_enc", fused);
}

HeadOutputs Heads(Tape &tape, const ModelConfig &config, Var m0,
                  const EncodedPair &enc, const DropExample &example) {
  HeadOutputs out;
  Var pooled_m0 = MeanColumns(m0);
  Var pooled_q = MeanColumns(enc.Q);

  out.type_logits =
      Transpose(Ffn(tape, "head.type", ConcatRows(pooled_m0, pooled_q)));
  out.p_start = Ffn(tape, "head.p_start", m0);
  out.p_end = Ffn(tape, "head.p_end", m0);
  Var q_input = Add(enc.Q, pooled_m0);
  out.q_start = Ffn(tape, "head.q_start", q_input);
  out.q_end = Ffn(tape, "head.q_end", q_input);
  out.count_logits = Transpose(Ffn(tape, "head.count", pooled_m0));

  std::vector<int> positions;
  for (const auto &n : example.passage_numbers) {
    positions.push_back(static_cast<int>(n.token_index));
  }
  out.sign_rows =
      static_cast<int>(positions.size()) + (config.append_hundred ? 1 : 0);
  if (out.sign_rows == 0) {
    out.sign_logits =
        tape.Constant(Matrix::Zero(0, answer::kNumSignClasses));
  } else {
    Var rows;
    if (!positions.empty()) rows = GatherColumns(m0, positions);
    if (config.append_hundred) {
      Var hundred = tape.Param("head.sign.hundred");
      rows = rows.valid() ? ConcatCols(rows, hundred) : hundred;
    }
    Var context = MatMul(tape.Param("head.sign.w1_ctx"), pooled_m0);
    Var h = Relu(AddBias(
        Add(MatMul(tape.Param("head.sign.w1"), rows), context),
        tape.Param("head.sign.b1")));
    out.sign_logits = Transpose(AddBias(MatMul(tape.Param("head.sign.w2"), h),
                                        tape.Param("head.sign.b2")));
  }
  out.type_mask = {static_cast<uint8_t>(!example.passage_tokens.empty()),
                   static_cast<uint8_t>(!example.question_tokens.empty()), 1,
                   static_cast<uint8_t>(out.sign_rows > 0)};
  return out;
}

HeadOutputs Forward(Tape &tape, const ModelConfig &config,
                    const Instance &instance) {
  EncodedPair enc = Encode(tape, config, instance.question_ids,
                           instance.passage_ids);
  Var m0 = enc.MP;
  if (config.use_gnn) {
    NodeStates states = InitNodes(tape, instance.graph, enc);
    Var u = ReasonK(tape, instance.graph, states, config.reasoning_steps);
    m0 = Fuse(tape, enc, u, instance.graph);
  }
  return Heads(tape, config, m0, enc, instance.example);
}

Var Loss(const HeadOutputs &outputs,
         const answer::SupervisionSet &supervision, bool passage_preferred) {
  if (supervision.empty()) throw ContractError("loss: empty supervision");
  using Group = std::vector<std::pair<int, int>>;
  Var type_logp = LogSoftmaxRows(outputs.type_logits, outputs.type_mask);
  Var terms;
  auto append = [&](Var candidates, int type) {
    Var t = PickSum(type_logp, {Group{{0, type}}});
    Var joint = Add(candidates, t);
    terms = terms.valid() ? ConcatRows(terms, joint) : joint;
  };
  auto spans = [&](Var start, Var end, const std::vector<answer::Span> &set,
                   answer::AnswerType type) {
    Var logp = ConcatRows(LogSoftmaxRows(start), LogSoftmaxRows(end));
    std::vector<Group> groups;
    for (const auto &s : set) groups.push_back({{0, s.start}, {1, s.end}});
    append(PickSum(logp, groups), static_cast<int>(type));
  };

  if (!supervision.passage_spans.empty()) {
    spans(outputs.p_start, outputs.p_end, supervision.passage_spans,
          answer::AnswerType::kPassageSpan);
  }
  bool skip_question =
      passage_preferred && !supervision.passage_spans.empty();
  if (!supervision.question_spans.empty() && !skip_question) {
    spans(outputs.q_start, outputs.q_end, supervision.question_spans,
          answer::AnswerType::kQuestionSpan);
  }
  if (!supervision.counts.empty()) {
    std::vector<Group> groups;
    for (int c : supervision.counts) groups.push_back({{0, c}});
    append(PickSum(LogSoftmaxRows(outputs.count_logits), groups),
           static_cast<int>(answer::AnswerType::kCount));
  }
  if (!supervision.sign_assignments.empty()) {
    std::vector<Group> groups;
    for (const auto &assignment : supervision.sign_assignments) {
      if (static_cast<int>(assignment.size()) != outputs.sign_rows) {
        throw ContractError("loss: sign assignment length mismatch");
      }
      Group g;
      for (size_t r = 0; r < assignment.size(); ++r) {
        g.push_back({static_cast<int>(r), answer::SignColumn(assignment[r])});
      }
      groups.push_back(std::move(g));
    }
    append(PickSum(LogSoftmaxRows(outputs.sign_logits), groups),
           static_cast<int>(answer::AnswerType::kArithmetic));
  }
  return Scale(LogSumExp(terms), -1.0);
}

answer::HeadValues ToHeadValues(const HeadOutputs &outputs) {
  answer::HeadValues v;
  v.type_logits = RowToVector(outputs.type_logits.value());
  for (int t = 0; t < answer::kNumAnswerTypes; ++t) {
    if (!outputs.type_mask[t]) {
      v.type_logits(t) = -std::numeric_limits<double>::infinity();
    }
  }
  v.p_start = RowToVector(outputs.p_start.value());
  v.p_end = RowToVector(outputs.p_end.value());
  v.q_start = RowToVector(outputs.q_start.value());
  v.q_end = RowToVector(outputs.q_end.value());
  v.count_logits = RowToVector(outputs.count_logits.value());
  v.sign_logits = outputs.sign_logits.value();
  return v;
}

answer::HeadValues Infer(const ParamStore &params, const ModelConfig &config,
                         const Instance &instance) {
  Tape tape(&params);
  return ToHeadValues(Forward(tape, config, instance));
}

}  // namespace numnet::model
