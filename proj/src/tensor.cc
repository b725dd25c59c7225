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

#include "numnet/tensor.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace numnet::diff {

namespace {

uint64_t Rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

uint64_t SplitMix64(uint64_t *state) {
  uint64_t z = (*state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string ShapeText(const Matrix &m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
         "]";
}

[[noreturn]] void ShapeFail(const char *op, const Matrix &a, const Matrix &b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       ShapeText(a) + " and " + ShapeText(b));
}

Tape &TapeOf(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

Tape &TapeOf(Var a, Var b) {
  Tape &tape = TapeOf(a);
  if (b.tape() != &tape) throw ContractError("Vars from different tapes");
  return tape;
}

enum class Broadcast { kSame, kColumn, kRow, kScalar };

Broadcast BroadcastKind(const char *op, const Matrix &a, const Matrix &b) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::kSame;
  if (b.rows() == a.rows() && b.cols() == 1) return Broadcast::kColumn;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRow;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::kScalar;
  ShapeFail(op, a, b);
}

Matrix Expand(const Matrix &b, Broadcast kind, Eigen::Index rows,
              Eigen::Index cols) {
  switch (kind) {
    case Broadcast::kSame:
      return b;
    case Broadcast::kColumn:
      return b.replicate(1, cols);
    case Broadcast::kRow:
      return b.replicate(rows, 1);
    case Broadcast::kScalar:
      return Matrix::Constant(rows, cols, b(0, 0));
  }
  return b;
}

Matrix Reduce(const Matrix &g, Broadcast kind) {
  switch (kind) {
    case Broadcast::kSame:
      return g;
    case Broadcast::kColumn:
      return g.rowwise().sum();
    case Broadcast::kRow:
      return g.colwise().sum();
    case Broadcast::kScalar:
      return Matrix::Constant(1, 1, g.sum());
  }
  return g;
}

bool Live(const std::vector<uint8_t> &mask, Eigen::Index c) {
  return mask.empty() || mask[c] != 0;
}

void CheckMask(const char *op, const Matrix &x,
               const std::vector<uint8_t> &mask) {
  if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != x.cols()) {
    throw DimensionError(std::string(op) + ": mask of length " +
                         std::to_string(mask.size()) + " for " +
                         ShapeText(x));
  }
}

void CheckColumns(const char *op, const Matrix &x,
                  const std::vector<int> &columns) {
  for (int c : columns) {
    if (c < 0 || c >= x.cols()) {
      throw DimensionError(std::string(op) + ": column " + std::to_string(c) +
                           " out of range for " + ShapeText(x));
    }
  }
}

}  // namespace

// ---- Rng -----------------------------------------------------------------

Rng::Rng(uint64_t seed) {
  uint64_t s = seed;
  for (auto &word : state_) word = SplitMix64(&s);
}

Rng Rng::Stream(uint64_t seed, const std::string &label) {
  uint64_t s = seed;
  uint64_t mixed = SplitMix64(&s) ^ Fnv1a(label);
  return Rng(mixed);
}

uint64_t Rng::NextRaw() {
  uint64_t result = Rotl(state_[1] * 5, 7) * 9;
  uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = Rotl(state_[3], 45);
  return result;
}

uint64_t Rng::NextU64() { return NextRaw(); }

double Rng::Uniform() {
  return static_cast<double>(NextRaw() >> 11) * 0x1.0p-53;
}

uint64_t Rng::Below(uint64_t n) {
  if (n == 0) throw ContractError("Rng::Below(0)");
  uint64_t threshold = (0 - n) % n;
  for (;;) {
    uint64_t r = NextRaw();
    if (r >= threshold) return r % n;
  }
}

uint64_t Fnv1a(const std::string &text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---- ParamStore ----------------------------------------------------------

Matrix &ParamStore::Add(const std::string &name, Matrix value) {
  if (index_.count(name)) {
    throw ContractError("duplicate parameter '" + name + "'");
  }
  index_[name] = entries_.size();
  Entry entry;
  entry.name = name;
  entry.adam_m = Matrix::Zero(value.rows(), value.cols());
  entry.adam_v = Matrix::Zero(value.rows(), value.cols());
  entry.value = std::move(value);
  entries_.push_back(std::move(entry));
  return entries_.back().value;
}

bool ParamStore::Has(const std::string &name) const {
  return index_.count(name) > 0;
}

const ParamStore::Entry &ParamStore::entry(const std::string &name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ContractError("unknown parameter '" + name + "'");
  }
  return entries_[it->second];
}

ParamStore::Entry &ParamStore::mutable_entry(const std::string &name) {
  return const_cast<Entry &>(std::as_const(*this).entry(name));
}

const Matrix &ParamStore::Get(const std::string &name) const {
  return entry(name).value;
}

Matrix &ParamStore::Mutable(const std::string &name) {
  return mutable_entry(name).value;
}

std::vector<std::string> ParamStore::Names() const {
  std::vector<std::string> names;
  names.reserve(entries_.size());
  for (const auto &e : entries_) names.push_back(e.name);
  return names;
}

size_t ParamStore::NumScalars() const {
  size_t total = 0;
  for (const auto &e : entries_) total += e.value.size();
  return total;
}

// ---- Var / Tape ----------------------------------------------------------

const Matrix &Var::value() const {
  if (!valid()) throw ContractError("value of an unbound Var");
  return tape_->value(id_);
}

double Var::scalar() const {
  const Matrix &v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ContractError("scalar() on a " + ShapeText(v) + " value");
  }
  return v(0, 0);
}

Var Tape::Constant(Matrix value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Param(const std::string &name) {
  if (params_ == nullptr) {
    throw ContractError("tape has no parameter store");
  }
  if (auto it = param_ids_.find(name); it != param_ids_.end()) {
    return Var(this, it->second);
  }
  Node node;
  node.value = params_->Get(name);
  node.needs_grad = true;
  node.param_name = name;
  nodes_.push_back(std::move(node));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_ids_[name] = id;
  return Var(this, id);
}

Var Tape::Record(Matrix value, std::vector<Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var &in : inputs) {
    if (in.tape() != this) throw ContractError("input from another tape");
    if (nodes_[in.id()].needs_grad) node.needs_grad = true;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::AccumulateGrad(Var var, const Matrix &grad) {
  Node &node = nodes_[var.id()];
  if (!node.needs_grad) return;
  if (grad.rows() != node.value.rows() || grad.cols() != node.value.cols()) {
    ShapeFail("AccumulateGrad", node.value, grad);
  }
  if (node.grad.size() == 0 && node.value.size() != 0) {
    node.grad = grad;
  } else {
    node.grad += grad;
  }
}

void Tape::MixKinkPattern(uint64_t pattern) {
  kink_signature_ = (kink_signature_ ^ pattern) * 0x100000001b3ULL;
}

Gradients Tape::Backward(Var loss) {
  if (loss.tape() != this) throw ContractError("loss from another tape");
  if (used_) throw ContractError("tape already used for a backward pass");
  const Matrix &lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw ContractError("backward requires a scalar loss, got " +
                        ShapeText(lv));
  }
  used_ = true;
  nodes_[loss.id()].grad = Matrix::Ones(1, 1);
  for (int id = loss.id(); id >= 0; --id) {
    Node &node = nodes_[id];
    if (!node.needs_grad || !node.backward || node.grad.size() == 0) continue;
    node.backward(*this, node.grad, node.value);
  }

  Gradients grads;
  if (params_ != nullptr) {
    for (const auto &entry : params_->entries()) {
      auto it = param_ids_.find(entry.name);
      if (it != param_ids_.end() && nodes_[it->second].grad.size() != 0) {
        grads[entry.name] = nodes_[it->second].grad;
      } else {
        grads[entry.name] =
            Matrix::Zero(entry.value.rows(), entry.value.cols());
      }
    }
  }
  return grads;
}

// ---- ops -----------------------------------------------------------------

Var MatMul(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  const Matrix &bv = b.value();
  if (av.cols() != bv.rows()) ShapeFail("matmul", av, bv);
  return tape.Record(av * bv, {a, b},
                     [a, b](Tape &t, const Matrix &g, const Matrix &) {
                       if (t.NeedsGrad(a)) {
                         t.AccumulateGrad(a, g * b.value().transpose());
                       }
                       if (t.NeedsGrad(b)) {
                         t.AccumulateGrad(b, a.value().transpose() * g);
                       }
                     });
}

Var Add(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  Broadcast kind = BroadcastKind("add", av, b.value());
  Matrix out = av + Expand(b.value(), kind, av.rows(), av.cols());
  return tape.Record(std::move(out), {a, b},
                     [a, b, kind](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(a, g);
                       if (t.NeedsGrad(b)) t.AccumulateGrad(b, Reduce(g, kind));
                     });
}

Var Sub(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  Broadcast kind = BroadcastKind("sub", av, b.value());
  Matrix out = av - Expand(b.value(), kind, av.rows(), av.cols());
  return tape.Record(std::move(out), {a, b},
                     [a, b, kind](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(a, g);
                       if (t.NeedsGrad(b)) {
                         t.AccumulateGrad(b, -Reduce(g, kind));
                       }
                     });
}

Var Mul(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  Broadcast kind = BroadcastKind("mul", av, b.value());
  Matrix out =
      av.cwiseProduct(Expand(b.value(), kind, av.rows(), av.cols()));
  return tape.Record(
      std::move(out), {a, b},
      [a, b, kind](Tape &t, const Matrix &g, const Matrix &) {
        const Matrix &av = a.value();
        if (t.NeedsGrad(a)) {
          t.AccumulateGrad(
              a, g.cwiseProduct(Expand(b.value(), kind, av.rows(), av.cols())));
        }
        if (t.NeedsGrad(b)) t.AccumulateGrad(b, Reduce(g.cwiseProduct(av), kind));
      });
}

Var AddBias(Var x, Var bias) {
  if (bias.cols() != 1 || bias.rows() != x.rows()) {
    ShapeFail("add_bias", x.value(), bias.value());
  }
  return Add(x, bias);
}

Var Scale(Var x, double factor) {
  Tape &tape = TapeOf(x);
  return tape.Record(x.value() * factor, {x},
                     [x, factor](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(x, g * factor);
                     });
}

Var Transpose(Var x) {
  Tape &tape = TapeOf(x);
  return tape.Record(x.value().transpose(), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(x, g.transpose());
                     });
}

Var ConcatRows(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  const Matrix &bv = b.value();
  if (av.cols() != bv.cols()) ShapeFail("concat_rows", av, bv);
  Matrix out(av.rows() + bv.rows(), av.cols());
  out << av, bv;
  Eigen::Index split = av.rows();
  return tape.Record(std::move(out), {a, b},
                     [a, b, split](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(a, g.topRows(split));
                       t.AccumulateGrad(b, g.bottomRows(g.rows() - split));
                     });
}

Var ConcatCols(Var a, Var b) {
  Tape &tape = TapeOf(a, b);
  const Matrix &av = a.value();
  const Matrix &bv = b.value();
  if (av.rows() != bv.rows()) ShapeFail("concat_cols", av, bv);
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  Eigen::Index split = av.cols();
  return tape.Record(std::move(out), {a, b},
                     [a, b, split](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(a, g.leftCols(split));
                       t.AccumulateGrad(b, g.rightCols(g.cols() - split));
                     });
}

Var Sigmoid(Var x) {
  Tape &tape = TapeOf(x);
  Matrix out = x.value().unaryExpr(
      [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return tape.Record(std::move(out), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &y) {
                       t.AccumulateGrad(
                           x, g.cwiseProduct(y.cwiseProduct(
                                  (1.0 - y.array()).matrix())));
                     });
}

Var Relu(Var x) {
  Tape &tape = TapeOf(x);
  Matrix out = x.value().cwiseMax(0.0);
  uint64_t pattern = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    pattern = (pattern ^ (x.value()(i) > 0.0 ? 1u : 2u)) * 0x100000001b3ULL;
  }
  tape.MixKinkPattern(pattern);
  return tape.Record(std::move(out), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(
                           x, (x.value().array() > 0.0)
                                  .select(g, Matrix::Zero(g.rows(), g.cols())));
                     });
}

Var Tanh(Var x) {
  Tape &tape = TapeOf(x);
  Matrix out = x.value().array().tanh().matrix();
  return tape.Record(std::move(out), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &y) {
                       t.AccumulateGrad(
                           x, (g.array() * (1.0 - y.array().square())).matrix());
                     });
}

Var SoftmaxRows(Var x, const std::vector<uint8_t> &mask) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  CheckMask("softmax_rows", xv, mask);
  Matrix out = Matrix::Zero(xv.rows(), xv.cols());
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      if (Live(mask, c)) mx = std::max(mx, xv(r, c));
    }
    if (!std::isfinite(mx)) continue;  // every position masked
    double total = 0.0;
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      if (Live(mask, c)) {
        out(r, c) = std::exp(xv(r, c) - mx);
        total += out(r, c);
      }
    }
    out.row(r) /= total;
  }
  return tape.Record(std::move(out), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &y) {
                       Matrix gy = g.cwiseProduct(y);
                       Eigen::VectorXd dot = gy.rowwise().sum();
                       Matrix gx = gy - y.cwiseProduct(dot.replicate(1, y.cols()));
                       t.AccumulateGrad(x, gx);
                     });
}

Var LogSoftmaxRows(Var x, const std::vector<uint8_t> &mask) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  CheckMask("log_softmax_rows", xv, mask);
  Matrix out = Matrix::Constant(xv.rows(), xv.cols(), kMaskedLogProb);
  for (Eigen::Index r = 0; r < xv.rows(); ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      if (Live(mask, c)) mx = std::max(mx, xv(r, c));
    }
    if (!std::isfinite(mx)) continue;
    double total = 0.0;
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      if (Live(mask, c)) total += std::exp(xv(r, c) - mx);
    }
    double lse = mx + std::log(total);
    for (Eigen::Index c = 0; c < xv.cols(); ++c) {
      if (Live(mask, c)) out(r, c) = xv(r, c) - lse;
    }
  }
  return tape.Record(
      std::move(out), {x}, [x, mask](Tape &t, const Matrix &g, const Matrix &y) {
        Matrix gx = Matrix::Zero(g.rows(), g.cols());
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          double total = 0.0;
          for (Eigen::Index c = 0; c < g.cols(); ++c) {
            if (Live(mask, c)) total += g(r, c);
          }
          for (Eigen::Index c = 0; c < g.cols(); ++c) {
            if (Live(mask, c)) gx(r, c) = g(r, c) - std::exp(y(r, c)) * total;
          }
        }
        t.AccumulateGrad(x, gx);
      });
}

Var LogSumExp(Var x) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  if (xv.size() == 0) throw DimensionError("log_sum_exp: empty input");
  double mx = xv.maxCoeff();
  double lse = mx + std::log((xv.array() - mx).exp().sum());
  return tape.Record(Matrix::Constant(1, 1, lse), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &y) {
                       t.AccumulateGrad(
                           x, ((x.value().array() - y(0, 0)).exp() * g(0, 0))
                                  .matrix());
                     });
}

Var Sum(Var x) {
  Tape &tape = TapeOf(x);
  return tape.Record(Matrix::Constant(1, 1, x.value().sum()), {x},
                     [x](Tape &t, const Matrix &g, const Matrix &) {
                       t.AccumulateGrad(
                           x, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
                     });
}

Var MeanColumns(Var x, const std::vector<int> &columns) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  CheckColumns("mean_columns", xv, columns);
  Matrix out = Matrix::Zero(xv.rows(), 1);
  if (!columns.empty()) {
    for (int c : columns) out += xv.col(c);
    out /= static_cast<double>(columns.size());
  }
  return tape.Record(
      std::move(out), {x}, [x, columns](Tape &t, const Matrix &g, const Matrix &) {
        if (columns.empty()) return;
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        double w = 1.0 / static_cast<double>(columns.size());
        for (int c : columns) gx.col(c) += g * w;
        t.AccumulateGrad(x, gx);
      });
}

Var MeanColumns(Var x) {
  std::vector<int> all(x.cols());
  std::iota(all.begin(), all.end(), 0);
  return MeanColumns(x, all);
}

Var GatherColumns(Var x, const std::vector<int> &columns) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  CheckColumns("gather_columns", xv, columns);
  Matrix out(xv.rows(), static_cast<Eigen::Index>(columns.size()));
  for (size_t k = 0; k < columns.size(); ++k) out.col(k) = xv.col(columns[k]);
  return tape.Record(
      std::move(out), {x}, [x, columns](Tape &t, const Matrix &g, const Matrix &) {
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        for (size_t k = 0; k < columns.size(); ++k) gx.col(columns[k]) += g.col(k);
        t.AccumulateGrad(x, gx);
      });
}

Var EmbeddingLookup(Var table, const std::vector<int> &ids) {
  return GatherColumns(table, ids);
}

Var ScatterColumns(Var x, const std::vector<int> &targets, int num_columns) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  if (static_cast<Eigen::Index>(targets.size()) != xv.cols()) {
    throw DimensionError("scatter_columns: " + std::to_string(targets.size()) +
                         " targets for " + ShapeText(xv));
  }
  Matrix out = Matrix::Zero(xv.rows(), num_columns);
  std::vector<uint8_t> used(num_columns, 0);
  for (size_t k = 0; k < targets.size(); ++k) {
    int c = targets[k];
    if (c < 0 || c >= num_columns) {
      throw DimensionError("scatter_columns: target " + std::to_string(c) +
                           " out of range " + std::to_string(num_columns));
    }
    if (used[c]++) {
      throw ContractError("scatter_columns: duplicate target " +
                          std::to_string(c));
    }
    out.col(c) = xv.col(k);
  }
  return tape.Record(
      std::move(out), {x}, [x, targets](Tape &t, const Matrix &g, const Matrix &) {
        Matrix gx(x.rows(), x.cols());
        for (size_t k = 0; k < targets.size(); ++k) gx.col(k) = g.col(targets[k]);
        t.AccumulateGrad(x, gx);
      });
}

Var PickSum(Var x,
            const std::vector<std::vector<std::pair<int, int>>> &groups) {
  Tape &tape = TapeOf(x);
  const Matrix &xv = x.value();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(groups.size()), 1);
  for (size_t k = 0; k < groups.size(); ++k) {
    for (auto [r, c] : groups[k]) {
      if (r < 0 || r >= xv.rows() || c < 0 || c >= xv.cols()) {
        throw DimensionError("pick_sum: (" + std::to_string(r) + "," +
                             std::to_string(c) + ") out of range for " +
                             ShapeText(xv));
      }
      out(k, 0) += xv(r, c);
    }
  }
  return tape.Record(
      std::move(out), {x}, [x, groups](Tape &t, const Matrix &g, const Matrix &) {
        Matrix gx = Matrix::Zero(x.rows(), x.cols());
        for (size_t k = 0; k < groups.size(); ++k) {
          for (auto [r, c] : groups[k]) gx(r, c) += g(k, 0);
        }
        t.AccumulateGrad(x, gx);
      });
}

// ---- gradient check ------------------------------------------------------

std::string GradCheckReport::Format() const {
  std::ostringstream out;
  for (const auto &e : entries) {
    out << (e.passed ? "PASS " : "FAIL ") << e.name
        << " max_rel_err=" << e.max_relative_error << " checked=" << e.checked
        << (e.skipped_kinks ? " skipped_kinks=" + std::to_string(e.skipped_kinks)
                            : std::string())
        << (e.finite ? "" : " non-finite") << "\n";
  }
  out << (passed ? "PASS" : "FAIL") << "\n";
  return out.str();
}

GradCheckReport GradCheck(const std::function<Var(Tape &)> &loss,
                          ParamStore &params,
                          const GradCheckOptions &options) {
  Gradients analytic;
  uint64_t base_signature;
  {
    Tape tape(&params);
    Var out = loss(tape);
    base_signature = tape.kink_signature();
    analytic = tape.Backward(out);
  }
  auto evaluate = [&](uint64_t *signature) {
    Tape tape(&params);
    double v = loss(tape).scalar();
    *signature = tape.kink_signature();
    return v;
  };

  GradCheckReport report;
  for (auto &entry : params.mutable_entries()) {
    GradCheckEntry result;
    result.name = entry.name;
    Matrix &value = entry.value;
    std::vector<Eigen::Index> indices(value.size());
    std::iota(indices.begin(), indices.end(), 0);
    if (indices.size() > options.max_entries_per_param) {
      Rng rng = Rng::Stream(options.seed, "gradcheck/" + entry.name);
      rng.Shuffle(indices);
      indices.resize(options.max_entries_per_param);
      std::sort(indices.begin(), indices.end());
    }
    const Matrix &grad = analytic.at(entry.name);
    for (Eigen::Index idx : indices) {
      const double saved = value(idx);
      double step = options.step;
      double numeric = 0.0;
      bool smooth = false;
      for (int attempt = 0; attempt <= options.max_step_reductions;
           ++attempt, step /= 10.0) {
        uint64_t sig_plus, sig_minus;
        value(idx) = saved + step;
        double plus = evaluate(&sig_plus);
        value(idx) = saved - step;
        double minus = evaluate(&sig_minus);
        value(idx) = saved;
        numeric = (plus - minus) / (2.0 * step);
        if (sig_plus == base_signature && sig_minus == base_signature) {
          smooth = true;
          break;
        }
      }
      if (!smooth) {
        ++result.skipped_kinks;
        continue;
      }
      double exact = grad(idx);
      ++result.checked;
      if (!std::isfinite(numeric) || !std::isfinite(exact)) {
        result.finite = false;
        result.passed = false;
        continue;
      }
      double denom = std::max({std::abs(exact), std::abs(numeric),
                               options.denominator_floor});
      double rel = std::abs(exact - numeric) / denom;
      result.max_relative_error = std::max(result.max_relative_error, rel);
    }
    if (result.max_relative_error > options.tolerance) result.passed = false;
    if (!result.passed) report.passed = false;
    report.entries.push_back(result);
  }
  return report;
}

}  // namespace numnet::diff
