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

#include "numnet/answer.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "json.hpp"
#include "numnet/metrics.h"

namespace numnet::answer {

namespace {

constexpr const char *kTypeNames[] = {"passage_span", "question_span", "count",
                                      "arithmetic"};

bool ContainsValue(const std::vector<double> &values, double v) {
  for (double x : values) {
    if (std::abs(x - v) <= metrics::kNumericTolerance) return true;
  }
  return false;
}

Eigen::VectorXd LogSoftmax(const Eigen::VectorXd &logits) {
  if (logits.size() == 0) return logits;
  double mx = logits.maxCoeff();
  double lse = mx + std::log((logits.array() - mx).exp().sum());
  return (logits.array() - lse).matrix();
}

int ArgMax(const Eigen::VectorXd &v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return best;
}

std::string SliceText(const std::string &text, const std::vector<Token> &tokens,
                      Span span) {
  size_t begin = tokens[span.start].char_start;
  size_t end = tokens[span.end].char_end;
  return text.substr(begin, end - begin);
}

}  // namespace

int SignColumn(int sign) { return sign == 0 ? 0 : (sign > 0 ? 1 : 2); }

int SignOfColumn(int column) {
  static constexpr int kSigns[] = {0, 1, -1};
  return kSigns[column];
}

const char *AnswerTypeName(AnswerType type) {
  return kTypeNames[static_cast<int>(type)];
}

AnswerType ParseAnswerType(const std::string &name) {
  for (int i = 0; i < kNumAnswerTypes; ++i) {
    if (name == kTypeNames[i]) return static_cast<AnswerType>(i);
  }
  throw InputError("unknown answer type '" + name + "'");
}

std::vector<double> ArithmeticOperands(const DropExample &example,
                                       bool append_hundred) {
  std::vector<double> values;
  values.reserve(example.passage_numbers.size() + 1);
  for (const auto &n : example.passage_numbers) values.push_back(n.value);
  if (append_hundred) values.push_back(kHundred);
  return values;
}

std::vector<double> GoldNumbers(const DropExample &example) {
  std::vector<double> values;
  for (const auto &gold : example.gold_answers) {
    if (gold.is_date || gold.number.empty()) continue;
    std::optional<double> v = ParseNumberToken(gold.number);
    if (!v) v = metrics::NumericValue(gold.number);
    if (v && !ContainsValue(values, *v)) values.push_back(*v);
  }
  return values;
}

std::vector<Span> MatchSpans(const std::vector<Token> &tokens,
                             const std::vector<std::string> &targets) {
  std::vector<std::vector<std::string>> wanted;
  for (const auto &t : targets) {
    auto norm = metrics::NormalizeAnswer(t);
    if (!norm.empty() &&
        std::find(wanted.begin(), wanted.end(), norm) == wanted.end()) {
      wanted.push_back(std::move(norm));
    }
  }
  if (wanted.empty()) return {};

  std::vector<std::vector<std::string>> per_token(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    per_token[i] = metrics::NormalizeAnswer(tokens[i].text);
  }

  std::set<Span> found;
  for (const auto &target : wanted) {
    for (size_t s = 0; s < tokens.size(); ++s) {
      if (per_token[s].empty()) continue;
      size_t matched = 0;
      for (size_t e = s; e < tokens.size(); ++e) {
        const auto &piece = per_token[e];
        if (matched + piece.size() > target.size()) break;
        if (!std::equal(piece.begin(), piece.end(),
                        target.begin() + static_cast<long>(matched))) {
          break;
        }
        matched += piece.size();
        if (matched == target.size() && !piece.empty()) {
          found.insert(Span{static_cast<int>(s), static_cast<int>(e)});
          break;
        }
      }
    }
  }
  return {found.begin(), found.end()};
}

std::vector<std::vector<int8_t>> EnumerateSignAssignments(
    const std::vector<double> &operands, const std::vector<double> &targets,
    int max_nonzero) {
  std::vector<std::vector<int8_t>> out;
  const int n = static_cast<int>(operands.size());
  if (targets.empty() || n == 0) return out;
  std::vector<int> chosen;
  // Enumerates index combinations of size k in lexicographic order.
  auto visit = [&](auto &&self, int k, int next) -> void {
    if (static_cast<int>(chosen.size()) == k) {
      for (uint32_t mask = 0; mask < (1u << k); ++mask) {
        double total = 0.0;
        for (int j = 0; j < k; ++j) {
          double v = operands[chosen[j]];
          total += ((mask >> (k - 1 - j)) & 1u) ? -v : v;
        }
        if (!ContainsValue(targets, total)) continue;
        std::vector<int8_t> signs(n, 0);
        for (int j = 0; j < k; ++j) {
          signs[chosen[j]] = ((mask >> (k - 1 - j)) & 1u) ? -1 : 1;
        }
        out.push_back(std::move(signs));
      }
      return;
    }
    for (int i = next; i < n; ++i) {
      chosen.push_back(i);
      self(self, k, i + 1);
      chosen.pop_back();
    }
  };
  for (int k = 1; k <= std::min(max_nonzero, n); ++k) visit(visit, k, 0);
  return out;
}

SupervisionSet EnumerateSupervision(const DropExample &example,
                                    const SupervisionConfig &config) {
  SupervisionSet set;
  std::vector<std::string> span_targets;
  for (const auto &gold : example.gold_answers) {
    if (gold.is_date) continue;
    for (const auto &span : gold.spans) span_targets.push_back(span);
  }
  set.passage_spans = MatchSpans(example.passage_tokens, span_targets);
  set.question_spans = MatchSpans(example.question_tokens, span_targets);

  std::vector<double> numbers = GoldNumbers(example);
  for (double v : numbers) {
    double r = std::round(v);
    if (std::abs(v - r) <= metrics::kNumericTolerance && r >= 0 &&
        r < kNumCountClasses) {
      int c = static_cast<int>(r);
      if (std::find(set.counts.begin(), set.counts.end(), c) ==
          set.counts.end()) {
        set.counts.push_back(c);
      }
    }
  }
  std::sort(set.counts.begin(), set.counts.end());
  set.sign_assignments = EnumerateSignAssignments(
      ArithmeticOperands(example, config.append_hundred), numbers,
      config.max_nonzero_signs);
  return set;
}

Span BestSpan(const Eigen::VectorXd &start_scores,
              const Eigen::VectorXd &end_scores, int max_length) {
  if (start_scores.size() != end_scores.size() || start_scores.size() == 0) {
    throw std::invalid_argument("BestSpan: mismatched or empty scores");
  }
  Span best{0, 0};
  double best_score = -std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(start_scores.size());
  for (int s = 0; s < n; ++s) {
    int last = std::min(n - 1, s + max_length - 1);
    for (int e = s; e <= last; ++e) {
      double score = start_scores(s) + end_scores(e);
      if (score > best_score) {
        best_score = score;
        best = Span{s, e};
      }
    }
  }
  return best;
}

Prediction Decode(const HeadValues &heads, const DropExample &example,
                  const DecodeConfig &config) {
  std::array<bool, kNumAnswerTypes> feasible = {
      !example.passage_tokens.empty(), !example.question_tokens.empty(), true,
      heads.sign_logits.rows() > 0};
  int type = -1;
  for (int t = 0; t < kNumAnswerTypes; ++t) {
    if (!feasible[t]) continue;
    if (type < 0 || heads.type_logits(t) > heads.type_logits(type)) type = t;
  }

  Prediction pred;
  pred.type = static_cast<AnswerType>(type);
  switch (pred.type) {
    case AnswerType::kPassageSpan:
      pred.span = BestSpan(LogSoftmax(heads.p_start), LogSoftmax(heads.p_end),
                           config.max_span_length);
      pred.text = SliceText(example.passage_text, example.passage_tokens,
                            pred.span);
      break;
    case AnswerType::kQuestionSpan:
      pred.span = BestSpan(LogSoftmax(heads.q_start), LogSoftmax(heads.q_end),
                           config.max_span_length);
      pred.text = SliceText(example.question_text, example.question_tokens,
                            pred.span);
      break;
    case AnswerType::kCount:
      pred.count = ArgMax(heads.count_logits);
      pred.text = std::to_string(pred.count);
      break;
    case AnswerType::kArithmetic: {
      pred.operands = ArithmeticOperands(example, config.append_hundred);
      if (static_cast<Eigen::Index>(pred.operands.size()) !=
          heads.sign_logits.rows()) {
        throw std::invalid_argument("Decode: sign rows do not match operands");
      }
      for (Eigen::Index r = 0; r < heads.sign_logits.rows(); ++r) {
        Eigen::VectorXd row = heads.sign_logits.row(r).transpose();
        int sign = SignOfColumn(ArgMax(row));
        pred.signs.push_back(sign);
        pred.total += sign * pred.operands[r];
      }
      pred.text = FormatNumber(pred.total);
      break;
    }
  }
  return pred;
}

std::string FormatNumber(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  if (std::round(x) == x && std::abs(x) < 1e18) {
    std::snprintf(buf, sizeof(buf), "%.0f", x);
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  std::string text = buf;
  if (text.find('.') != std::string::npos) {
    while (!text.empty() && text.back() == '0') text.pop_back();
    if (!text.empty() && text.back() == '.') text.pop_back();
  }
  if (text == "-0") text = "0";
  return text;
}

std::string PredictionRecord(const std::string &query_id,
                             const Prediction &prediction) {
  nlohmann::ordered_json row;
  row["query_id"] = query_id;
  row["type"] = AnswerTypeName(prediction.type);
  row["text"] = prediction.text;
  nlohmann::ordered_json payload;
  switch (prediction.type) {
    case AnswerType::kPassageSpan:
    case AnswerType::kQuestionSpan:
      payload["start"] = prediction.span.start;
      payload["end"] = prediction.span.end;
      break;
    case AnswerType::kCount:
      payload["count"] = prediction.count;
      break;
    case AnswerType::kArithmetic:
      payload["signs"] = prediction.signs;
      payload["operands"] = prediction.operands;
      payload["total"] = prediction.total;
      break;
  }
  row["payload"] = payload;
  return row.dump();
}

std::map<std::string, std::string> ReadPredictions(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions " + path);
  std::map<std::string, std::string> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw InputError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.is_object() || !row.contains("query_id") ||
        !row.contains("text")) {
      throw InputError(path + ":" + std::to_string(line_no) +
                       ": record needs query_id and text");
    }
    std::string id = row["query_id"].get<std::string>();
    if (!out.emplace(id, row["text"].get<std::string>()).second) {
      throw InputError("duplicate query_id '" + id + "' in " + path);
    }
  }
  return out;
}

}  // namespace numnet::answer
