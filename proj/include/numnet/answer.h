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

// Weak supervision and decoding for the four answer types.
//
// Training never sees an answer-type label. Instead every gold answer is
// expanded into all candidates consistent with it: matching passage and
// question spans, a count class, and every sign assignment over the passage
// numbers (plus a virtual 100) whose signed sum equals a gold number.

#ifndef NUMNET_ANSWER_H_
#define NUMNET_ANSWER_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "numnet/textnum.h"

namespace numnet::answer {

enum class AnswerType : uint8_t {
  kPassageSpan = 0,
  kQuestionSpan = 1,
  kCount = 2,
  kArithmetic = 3,
};
inline constexpr int kNumAnswerTypes = 4;
inline constexpr int kNumCountClasses = 10;

// Sign classes, in sign-head column order.
enum class Sign : int8_t { kZero = 0, kPlus = 1, kMinus = -1 };
inline constexpr int kNumSignClasses = 3;
int SignColumn(int sign);  // 0 -> 0, +1 -> 1, -1 -> 2
int SignOfColumn(int column);

const char *AnswerTypeName(AnswerType type);
AnswerType ParseAnswerType(const std::string &name);

inline constexpr double kHundred = 100.0;

struct SupervisionConfig {
  int max_nonzero_signs = 3;
  bool append_hundred = true;
};

struct Span {
  int start = 0;
  int end = 0;  // inclusive

  auto operator<=>(const Span &) const = default;
};

struct SupervisionSet {
  std::vector<Span> passage_spans;
  std::vector<Span> question_spans;
  std::vector<int> counts;
  // One sign per passage number, then one for the appended 100 if enabled.
  std::vector<std::vector<int8_t>> sign_assignments;

  bool empty() const {
    return passage_spans.empty() && question_spans.empty() && counts.empty() &&
           sign_assignments.empty();
  }
};

// Values the sign head ranges over: passage numbers then, optionally, 100.
std::vector<double> ArithmeticOperands(const DropExample &example,
                                       bool append_hundred);

// Numeric values of the gold answers' number fields.
std::vector<double> GoldNumbers(const DropExample &example);

// All token spans [s, e] whose normalised text equals a normalised target.
std::vector<Span> MatchSpans(const std::vector<Token> &tokens,
                             const std::vector<std::string> &targets);

// Assignments with 1..max_nonzero nonzero signs whose signed sum is within
// 1e-5 of a target. Ordered by number of nonzeros, operand indices, then
// sign pattern (+ before -).
std::vector<std::vector<int8_t>> EnumerateSignAssignments(
    const std::vector<double> &operands, const std::vector<double> &targets,
    int max_nonzero);

// `example` must already be trimmed. Date golds are unsupported and skipped.
SupervisionSet EnumerateSupervision(const DropExample &example,
                                    const SupervisionConfig &config);

// Plain values of the answer heads, as produced by the model.
struct HeadValues {
  Eigen::VectorXd type_logits;   // 4
  Eigen::VectorXd p_start;       // |p| logits
  Eigen::VectorXd p_end;
  Eigen::VectorXd q_start;       // |q| logits
  Eigen::VectorXd q_end;
  Eigen::VectorXd count_logits;  // 10
  Eigen::MatrixXd sign_logits;   // rows x 3 (zero, plus, minus)
};

struct DecodeConfig {
  int max_span_length = 8;
  bool append_hundred = true;
};

struct Prediction {
  AnswerType type = AnswerType::kPassageSpan;
  std::string text;
  Span span;                   // span types
  int count = 0;               // kCount
  std::vector<int> signs;      // kArithmetic, per operand
  std::vector<double> operands;
  double total = 0.0;

  bool operator==(const Prediction &) const = default;
};

// Best span with e - s < max_length, maximising start[s] + end[e] (log
// scale). Ties go to the smallest s, then the smallest e.
Span BestSpan(const Eigen::VectorXd &start_scores,
              const Eigen::VectorXd &end_scores, int max_length);

// Greedy: most probable feasible type, then its best answer.
Prediction Decode(const HeadValues &heads, const DropExample &example,
                  const DecodeConfig &config);

// Integral values print without a decimal point; others use at most six
// decimals with trailing zeros removed. Negative zero prints "0".
std::string FormatNumber(double x);

// Prediction file: one JSON object per line with fields query_id, type,
// text, payload, in that order.
std::string PredictionRecord(const std::string &query_id,
                             const Prediction &prediction);

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// query_id -> text. Duplicate query ids raise InputError.
std::map<std::string, std::string> ReadPredictions(const std::string &path);

}  // namespace numnet::answer

#endif  // NUMNET_ANSWER_H_
