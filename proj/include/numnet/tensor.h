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

// Dense matrices with recorded operations and reverse-mode differentiation.
//
// All values are 2-D (vectors are d x 1 columns or 1 x n rows) and stored
// as 64-bit floats. Sequence data is laid out column-per-item: a passage
// encoding is a d x |p| matrix.
//
// A Tape records every op applied to its variables. Trainable leaves come
// from a ParamStore by name; calling Backward() on a scalar returns the
// gradient of every parameter in the store (zero when not reached).

#ifndef NUMNET_TENSOR_H_
#define NUMNET_TENSOR_H_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace numnet::diff {

using Matrix = Eigen::MatrixXd;

// Shape mismatch; the message names the op and both shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Violated call contract (non-scalar loss, reused tape, bad state).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// xoshiro256** seeded through splitmix64. Uniform doubles and bounded
// integers are derived by explicit bit manipulation, so streams are
// identical on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed = 42);
  // Independent stream for a labelled purpose (e.g. "init/enc.wq").
  static Rng Stream(uint64_t seed, const std::string &label);

  uint64_t NextU64();
  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n) without modulo bias.
  uint64_t Below(uint64_t n);

  template <typename T>
  void Shuffle(std::vector<T> &items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[Below(i)]);
    }
  }

 private:
  uint64_t state_[4];
  uint64_t NextRaw();
};

// FNV-1a, used for stream labels and config hashes.
uint64_t Fnv1a(const std::string &text);

class ParamStore {
 public:
  struct Entry {
    std::string name;
    Matrix value;
    Matrix adam_m;
    Matrix adam_v;
    Matrix shadow;  // EMA; empty until initialised
  };

  // Adds a parameter; throws ContractError on a duplicate name.
  Matrix &Add(const std::string &name, Matrix value);
  bool Has(const std::string &name) const;
  const Matrix &Get(const std::string &name) const;
  Matrix &Mutable(const std::string &name);
  const Entry &entry(const std::string &name) const;
  Entry &mutable_entry(const std::string &name);
  // Insertion order.
  std::vector<std::string> Names() const;
  size_t size() const { return entries_.size(); }
  size_t NumScalars() const;

  const std::vector<Entry> &entries() const { return entries_; }
  std::vector<Entry> &mutable_entries() { return entries_; }

  int64_t adam_steps = 0;
  int64_t ema_updates = 0;
  bool ema_swapped_in = false;

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

using Gradients = std::map<std::string, Matrix>;

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  const Matrix &value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  Tape *tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape *tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // Receives the output gradient and accumulates into input gradients via
  // Tape::AccumulateGrad.
  using BackwardFn = std::function<void(Tape &, const Matrix &grad_out,
                                        const Matrix &value_out)>;

  explicit Tape(const ParamStore *params = nullptr) : params_(params) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(Matrix value);
  // Leaf bound to a store parameter. Repeated calls return the same Var.
  Var Param(const std::string &name);

  // Records a custom op. `backward` may call AccumulateGrad on `inputs`.
  Var Record(Matrix value, std::vector<Var> inputs, BackwardFn backward);

  void AccumulateGrad(Var var, const Matrix &grad);
  bool NeedsGrad(Var var) const { return nodes_[var.id()].needs_grad; }

  // Reverse sweep from a 1 x 1 loss. Single use per tape.
  Gradients Backward(Var loss);

  const Matrix &value(int id) const { return nodes_[id].value; }
  // Hash of every piecewise-linear op's active region (ReLU sign masks) in
  // recording order. Two evaluations with equal signatures lie on the same
  // smooth piece.
  uint64_t kink_signature() const { return kink_signature_; }
  void MixKinkPattern(uint64_t pattern);
  size_t num_nodes() const { return nodes_.size(); }
  const ParamStore *params() const { return params_; }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    bool needs_grad = false;
    std::string param_name;
  };

  const ParamStore *params_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> param_ids_;
  bool used_ = false;
  uint64_t kink_signature_ = 0xcbf29ce484222325ULL;
};

// ---- forward ops ---------------------------------------------------------

Var MatMul(Var a, Var b);
// Elementwise with limited broadcasting: `b` may match `a`, be a column
// (a.rows x 1, repeated across columns), a row (1 x a.cols, repeated across
// rows) or a 1 x 1 scalar.
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
// Column bias; same as Add with a column vector.
Var AddBias(Var x, Var bias);
Var Scale(Var x, double factor);
Var Transpose(Var x);
// Vertical stack [a; b].
Var ConcatRows(Var a, Var b);
// Horizontal stack [a, b].
Var ConcatCols(Var a, Var b);
Var Sigmoid(Var x);
Var Relu(Var x);
Var Tanh(Var x);
// Softmax over each row. Positions with mask[c] == 0 get probability zero
// and the rest renormalise; an empty mask means all positions are live.
Var SoftmaxRows(Var x, const std::vector<uint8_t> &mask = {});
// log of SoftmaxRows. Masked entries are set to kMaskedLogProb.
Var LogSoftmaxRows(Var x, const std::vector<uint8_t> &mask = {});
inline constexpr double kMaskedLogProb = -1e30;
// log(sum(exp(x))) over all entries, 1 x 1.
Var LogSumExp(Var x);
Var Sum(Var x);
// Mean of the selected columns, rows x 1. Empty selection gives zeros.
Var MeanColumns(Var x, const std::vector<int> &columns);
Var MeanColumns(Var x);
// Columns `ids` of the d x V table.
Var EmbeddingLookup(Var table, const std::vector<int> &ids);
Var GatherColumns(Var x, const std::vector<int> &columns);
// Output has `num_columns` columns; column targets[k] receives x column k.
// Targets must be distinct and in range; other columns are zero.
Var ScatterColumns(Var x, const std::vector<int> &targets, int num_columns);
// Column vector with entry k = sum of x(r, c) over groups[k].
Var PickSum(Var x, const std::vector<std::vector<std::pair<int, int>>> &groups);

// ---- gradient check ------------------------------------------------------

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  size_t checked = 0;
  // Entries whose difference quotient straddled a ReLU kink at every step
  // size tried.
  size_t skipped_kinks = 0;
  bool finite = true;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  bool passed = true;
  std::string Format() const;
};

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  // Relative error is |a - n| / max(|a|, |n|, floor).
  double denominator_floor = 1e-6;
  size_t max_entries_per_param = 200;
  // When theta +/- step crosses a kink the step is divided by 10, up to this
  // many times, before the entry is skipped.
  int max_step_reductions = 3;
  uint64_t seed = 42;
};

// `loss` must build a scalar on the given tape using params from the store
// the tape was created with. Compares Backward() against central differences.
GradCheckReport GradCheck(const std::function<Var(Tape &)> &loss,
                          ParamStore &params,
                          const GradCheckOptions &options = {});

}  // namespace numnet::diff

#endif  // NUMNET_TENSOR_H_
