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

#include "numnet/synth.h"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "numnet/answer.h"
#include "numnet/tensor.h"

namespace numnet::synth {

namespace {

const char *const kGroups[] = {"Germans", "English",  "Irish",   "Italians",
                               "Poles",   "Swedes",   "Danes",   "Dutch",
                               "French",  "Scots",    "Greeks",  "Czechs"};
const char *const kKickers[] = {"Smith", "Jones", "Brown",  "Taylor",
                                "Wilson", "Davis", "Miller", "Moore"};

using diff::Rng;

int UniformInt(Rng &rng, int lo, int hi) {
  return lo + static_cast<int>(rng.Below(static_cast<uint64_t>(hi - lo + 1)));
}

// `n` distinct values in [lo, hi].
std::vector<int> DistinctValues(Rng &rng, int n, int lo, int hi) {
  if (hi - lo + 1 < n) throw std::invalid_argument("value range too small");
  std::vector<int> out;
  while (static_cast<int>(out.size()) < n) {
    int v = UniformInt(rng, lo, hi);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<std::string> PickGroups(Rng &rng, int n) {
  std::vector<std::string> all(std::begin(kGroups), std::end(kGroups));
  rng.Shuffle(all);
  all.resize(n);
  return all;
}

std::string JoinList(const std::vector<std::string> &items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

GoldAnswer SpanGold(const std::string &text) {
  GoldAnswer g;
  g.spans = {text};
  return g;
}

GoldAnswer NumberGold(int value) {
  GoldAnswer g;
  g.number = std::to_string(value);
  return g;
}

DropExample Comparison(Rng &rng, const SyntheticSpec &spec,
                       const std::string &pid, const std::string &qid) {
  int n = UniformInt(rng, 3, 5);
  auto groups = PickGroups(rng, n);
  auto values = DistinctValues(rng, n, spec.min_value, spec.max_value);
  std::vector<std::string> items;
  for (int i = 0; i < n; ++i) {
    items.push_back(std::to_string(values[i]) + " " + groups[i]);
  }
  std::string passage =
      "The census counted " + JoinList(items) + " in the town.";
  int a = static_cast<int>(rng.Below(n));
  int b = static_cast<int>(rng.Below(n - 1));
  if (b >= a) ++b;
  bool larger = rng.Below(2) == 0;
  std::string question = std::string("Which group is ") +
                         (larger ? "larger" : "smaller") + ": " + groups[a] +
                         " or " + groups[b] + "?";
  bool a_wins = larger ? values[a] > values[b] : values[a] < values[b];
  return MakeExample(pid, qid, passage, question,
                     {SpanGold(a_wins ? groups[a] : groups[b])});
}

DropExample Arithmetic(Rng &rng, const SyntheticSpec &spec,
                       const std::string &pid, const std::string &qid) {
  int n = UniformInt(rng, 3, 4);
  std::string kicker = kKickers[rng.Below(std::size(kKickers))];
  auto values = DistinctValues(rng, n, std::max(spec.min_value, 1),
                               spec.max_value);
  std::vector<std::string> items;
  for (int v : values) items.push_back(std::to_string(v));
  std::string passage = kicker + " kicked field goals of " + JoinList(items) +
                        " yards in the game.";
  std::vector<int> sorted = values;
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  bool versus_shortest = rng.Below(2) == 0;
  int gold = versus_shortest ? sorted.front() - sorted.back()
                             : sorted[0] - sorted[1];
  std::string question =
      std::string("How many more yards was the longest field goal than the ") +
      (versus_shortest ? "shortest" : "second longest") + " one?";
  return MakeExample(pid, qid, passage, question, {NumberGold(gold)});
}

DropExample Count(Rng &rng, const SyntheticSpec &spec, const std::string &pid,
                  const std::string &qid) {
  (void)spec;
  const int n = 5;
  auto groups = PickGroups(rng, n);
  // Tenths of a percent, distinct, in [0.5, 30.0].
  auto tenths = DistinctValues(rng, n, 5, 300);
  int threshold = UniformInt(rng, 2, 25);
  std::vector<std::string> items;
  int above = 0;
  for (int i = 0; i < n; ++i) {
    double pct = tenths[i] / 10.0;
    items.push_back(answer::FormatNumber(pct) + "% were " + groups[i]);
    if (pct > threshold) ++above;
  }
  std::string passage = "Of the population, " + JoinList(items) + ".";
  std::string question = "How many groups made up more than " +
                         std::to_string(threshold) + "%?";
  return MakeExample(pid, qid, passage, question, {NumberGold(above)});
}

}  // namespace

const char *FamilyName(Family family) {
  switch (family) {
    case Family::kComparison:
      return "comparison";
    case Family::kArithmetic:
      return "arithmetic";
    case Family::kCount:
      return "count";
    case Family::kMixed:
      return "mixed";
  }
  return "?";
}

Family ParseFamily(const std::string &name) {
  for (Family f : {Family::kComparison, Family::kArithmetic, Family::kCount,
                   Family::kMixed}) {
    if (name == FamilyName(f)) return f;
  }
  throw std::invalid_argument("unknown synthetic family '" + name + "'");
}

Corpus Generate(const SyntheticSpec &spec) {
  if (spec.size < 1) throw std::invalid_argument("synthetic size must be >= 1");
  if (spec.min_value > spec.max_value || spec.max_value - spec.min_value < 5) {
    throw std::invalid_argument("synthetic value range too small");
  }
  Rng rng = Rng::Stream(spec.seed, std::string("synth/") +
                                       FamilyName(spec.family));
  Corpus corpus;
  for (int i = 0; i < spec.size; ++i) {
    Family f = spec.family;
    if (f == Family::kMixed) f = static_cast<Family>(i % 3);
    std::string pid = spec.id_prefix + "-p" + std::to_string(i);
    std::string qid =
        spec.id_prefix + "-" + FamilyName(f) + "-" + std::to_string(i);
    switch (f) {
      case Family::kComparison:
        corpus.examples.push_back(Comparison(rng, spec, pid, qid));
        break;
      case Family::kArithmetic:
        corpus.examples.push_back(Arithmetic(rng, spec, pid, qid));
        break;
      default:
        corpus.examples.push_back(Count(rng, spec, pid, qid));
        break;
    }
  }
  return corpus;
}

}  // namespace numnet::synth
