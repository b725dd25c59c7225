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

// DROP-style answer scoring: exact match and a numerically gated bag-of-
// tokens F1, each taken as a maximum over the gold answer set.

#ifndef NUMNET_METRICS_H_
#define NUMNET_METRICS_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "numnet/textnum.h"

namespace numnet::metrics {

// Lowercases, splits on whitespace and hyphens, strips punctuation, drops
// articles and canonicalises numeric tokens ("4.0" -> "4").
std::vector<std::string> NormalizeAnswer(const std::string &text);

// Value of an answer that normalises to a single numeric token.
std::optional<double> NumericValue(const std::string &text);

inline constexpr double kNumericTolerance = 1e-5;

int ExactMatch(const std::string &prediction,
               const std::vector<std::string> &golds);

// Token-bag F1 without the numeric gate.
double BagF1(const std::vector<std::string> &prediction,
             const std::vector<std::string> &gold);

// Per gold: zero when the gold is numeric and the prediction does not carry
// the same value, bag F1 otherwise. Returns the maximum over golds.
double NumericallyFocusedF1(const std::string &prediction,
                            const std::vector<std::string> &golds);

// Scoring strings of an example (dates included in rendered form).
std::vector<std::string> GoldStrings(const DropExample &example);

struct ExampleScore {
  std::string query_id;
  double em = 0.0;
  double f1 = 0.0;
  bool number_slice = false;
  bool comparison_slice = false;
  bool missing = false;
};

struct SliceScore {
  std::string name;
  double em = 0.0;
  double f1 = 0.0;
  size_t count = 0;
};

struct MetricReport {
  double em = 0.0;
  double f1 = 0.0;
  std::vector<ExampleScore> per_example;
  // Always "Comparison", "Number", "ALL", in that order.
  std::vector<SliceScore> slices;
  size_t missing = 0;

  const SliceScore &Slice(const std::string &name) const;
};

// Scores predictions (query_id -> answer text) against a gold corpus.
// Examples without a gold answer are skipped; missing predictions score 0.
MetricReport Evaluate(const std::map<std::string, std::string> &predictions,
                      const Corpus &gold);

// Plain-text table: slice, EM, F1, N, preceded by a header describing the
// scoring rules.
std::string FormatReport(const MetricReport &report);

// One JSON object per line: query_id, em, f1, slices.
std::string FormatPerExample(const MetricReport &report);

}  // namespace numnet::metrics

#endif  // NUMNET_METRICS_H_
