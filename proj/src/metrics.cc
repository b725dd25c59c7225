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

#include "numnet/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"
#include "numnet/answer.h"

namespace numnet::metrics {

namespace {

bool IsAsciiPunct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

// Multi-byte punctuation removed during normalisation (curly quotes,
// dashes, ellipsis, guillemets).
const char *const kUnicodePunct[] = {"‘", "’", "“", "”",
                                     "…", "«", "»", "–",
                                     "—", "−"};

std::string ReplaceUnicodePunct(std::string text, const char *with) {
  for (const char *p : kUnicodePunct) {
    std::string needle(p);
    size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      text.replace(pos, needle.size(), with);
      pos += std::char_traits<char>::length(with);
    }
  }
  return text;
}

std::string StripEdges(const std::string &piece) {
  size_t b = 0, e = piece.size();
  while (b < e && IsAsciiPunct(piece[b])) ++b;
  while (e > b && IsAsciiPunct(piece[e - 1])) --e;
  return piece.substr(b, e - b);
}

std::string RemovePunct(const std::string &piece) {
  std::string out;
  for (unsigned char c : piece) {
    if (!IsAsciiPunct(c)) out += static_cast<char>(c);
  }
  return out;
}

}  // namespace

std::vector<std::string> NormalizeAnswer(const std::string &text) {
  std::string lowered = ReplaceUnicodePunct(text, " ");
  for (size_t i = 0; i < lowered.size(); ++i) {
    char &c = lowered[i];
    if (c >= 'A' && c <= 'Z') c = c - 'A' + 'a';
    // Hyphens separate words, except a leading minus sign on a number.
    bool leading_minus = (i == 0 || lowered[i - 1] == ' ') &&
                         i + 1 < lowered.size() && lowered[i + 1] >= '0' &&
                         lowered[i + 1] <= '9';
    if (c == '-' && !leading_minus) c = ' ';
  }
  std::vector<std::string> tokens;
  std::istringstream in(lowered);
  std::string piece;
  while (in >> piece) {
    std::optional<double> value = ParseNumberToken(piece);
    if (!value) value = ParseNumberToken(StripEdges(piece));
    if (value) {
      tokens.push_back(answer::FormatNumber(*value));
      continue;
    }
    std::string cleaned = RemovePunct(piece);
    if (cleaned.empty() || cleaned == "a" || cleaned == "an" ||
        cleaned == "the") {
      continue;
    }
    if (auto v = ParseNumberToken(cleaned)) {
      tokens.push_back(answer::FormatNumber(*v));
    } else {
      tokens.push_back(std::move(cleaned));
    }
  }
  return tokens;
}

std::optional<double> NumericValue(const std::string &text) {
  std::vector<std::string> tokens = NormalizeAnswer(text);
  if (tokens.size() != 1) return std::nullopt;
  return ParseNumberToken(tokens[0]);
}

int ExactMatch(const std::string &prediction,
               const std::vector<std::string> &golds) {
  std::vector<std::string> pred = NormalizeAnswer(prediction);
  for (const auto &gold : golds) {
    if (NormalizeAnswer(gold) == pred) return 1;
  }
  return 0;
}

double BagF1(const std::vector<std::string> &prediction,
             const std::vector<std::string> &gold) {
  if (prediction.empty() && gold.empty()) return 1.0;
  if (prediction.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string, int> counts;
  for (const auto &t : gold) ++counts[t];
  int common = 0;
  for (const auto &t : prediction) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return 2.0 * common / static_cast<double>(prediction.size() + gold.size());
}

double NumericallyFocusedF1(const std::string &prediction,
                            const std::vector<std::string> &golds) {
  std::vector<std::string> pred = NormalizeAnswer(prediction);
  std::optional<double> pred_value = NumericValue(prediction);
  double best = 0.0;
  for (const auto &gold : golds) {
    if (auto gold_value = NumericValue(gold)) {
      if (!pred_value ||
          std::abs(*pred_value - *gold_value) > kNumericTolerance) {
        continue;
      }
    }
    best = std::max(best, BagF1(pred, NormalizeAnswer(gold)));
  }
  return best;
}

std::vector<std::string> GoldStrings(const DropExample &example) {
  std::vector<std::string> out;
  for (const auto &gold : example.gold_answers) {
    std::string text = gold.AsText();
    if (!text.empty() &&
        std::find(out.begin(), out.end(), text) == out.end()) {
      out.push_back(std::move(text));
    }
  }
  return out;
}

const SliceScore &MetricReport::Slice(const std::string &name) const {
  for (const auto &s : slices) {
    if (s.name == name) return s;
  }
  throw std::out_of_range("no slice named " + name);
}

MetricReport Evaluate(const std::map<std::string, std::string> &predictions,
                      const Corpus &gold) {
  MetricReport report;
  SliceScore comparison{"Comparison"}, number{"Number"}, all{"ALL"};
  for (const auto &example : gold.examples) {
    std::vector<std::string> golds = GoldStrings(example);
    if (golds.empty()) continue;
    ExampleScore score;
    score.query_id = example.query_id;
    for (const auto &g : example.gold_answers) {
      if (!g.number.empty() || NumericValue(g.AsText())) {
        score.number_slice = true;
      }
    }
    score.comparison_slice =
        MatchComparingPattern(example.question_tokens).has_value();
    auto it = predictions.find(example.query_id);
    if (it == predictions.end()) {
      score.missing = true;
      ++report.missing;
    } else {
      score.em = ExactMatch(it->second, golds);
      score.f1 = NumericallyFocusedF1(it->second, golds);
    }
    auto add = [&](SliceScore &s) {
      s.em += score.em;
      s.f1 += score.f1;
      ++s.count;
    };
    add(all);
    if (score.number_slice) add(number);
    if (score.comparison_slice) add(comparison);
    report.per_example.push_back(std::move(score));
  }
  for (SliceScore *s : {&comparison, &number, &all}) {
    if (s->count > 0) {
      s->em /= static_cast<double>(s->count);
      s->f1 /= static_cast<double>(s->count);
    }
    report.slices.push_back(*s);
  }
  report.em = all.em;
  report.f1 = all.f1;
  return report;
}

std::string FormatReport(const MetricReport &report) {
  std::ostringstream out;
  out << "# F1: numerically-focused single-span bag-of-tokens F1 (no "
         "multi-span alignment); zero when a numeric gold is not matched "
         "within "
      << kNumericTolerance << ".\n";
  out << "# EM/F1: maximum over the gold answer set.\n";
  if (report.missing > 0) {
    out << "# missing predictions scored 0: " << report.missing << "\n";
  }
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s\n", "slice", "EM", "F1",
                "N");
  out << line;
  for (const auto &s : report.slices) {
    std::snprintf(line, sizeof(line), "%-12s %8.2f %8.2f %8zu\n",
                  s.name.c_str(), 100.0 * s.em, 100.0 * s.f1, s.count);
    out << line;
  }
  return out.str();
}

std::string FormatPerExample(const MetricReport &report) {
  std::string out;
  for (const auto &s : report.per_example) {
    nlohmann::ordered_json row;
    row["query_id"] = s.query_id;
    row["em"] = s.em;
    row["f1"] = s.f1;
    nlohmann::ordered_json tags = nlohmann::ordered_json::array();
    if (s.comparison_slice) tags.push_back("Comparison");
    if (s.number_slice) tags.push_back("Number");
    row["slices"] = tags;
    if (s.missing) row["missing"] = true;
    out += row.dump();
    out += '\n';
  }
  return out;
}

}  // namespace numnet::metrics
