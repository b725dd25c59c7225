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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "numnet/tensor.h"
#include "supervision_oracle.h"

namespace numnet::answer {
namespace {

GoldAnswer Number(const std::string &n) {
  GoldAnswer g;
  g.number = n;
  return g;
}

GoldAnswer Spans(std::vector<std::string> spans) {
  GoldAnswer g;
  g.spans = std::move(spans);
  return g;
}

bool Contains(const std::vector<std::vector<int8_t>> &all,
              const std::vector<int8_t> &signs) {
  return std::find(all.begin(), all.end(), signs) != all.end();
}

HeadValues Uniform(const DropExample &ex, int sign_rows) {
  HeadValues h;
  h.type_logits = Eigen::VectorXd::Zero(4);
  h.p_start = Eigen::VectorXd::Zero(ex.passage_tokens.size());
  h.p_end = h.p_start;
  h.q_start = Eigen::VectorXd::Zero(ex.question_tokens.size());
  h.q_end = h.q_start;
  h.count_logits = Eigen::VectorXd::Zero(kNumCountClasses);
  h.sign_logits = Eigen::MatrixXd::Zero(sign_rows, kNumSignClasses);
  return h;
}

}  // namespace

TEST_CASE("format number") {
  CHECK(FormatNumber(4.0) == "4");
  CHECK(FormatNumber(6.3) == "6.3");
  CHECK(FormatNumber(-0.0) == "0");
  CHECK(FormatNumber(-12.0) == "-12");
  CHECK(FormatNumber(1.0 / 3.0) == "0.333333");
  CHECK(FormatNumber(2.5000001) == "2.5");
  CHECK(FormatNumber(-1e-9) == "0");
  CHECK(FormatNumber(7791.0) == "7791");
}

TEST_CASE("sign columns and type names") {
  for (int s : {-1, 0, 1}) CHECK(SignOfColumn(SignColumn(s)) == s);
  CHECK(SignColumn(0) == 0);
  CHECK(SignColumn(1) == 1);
  CHECK(SignColumn(-1) == 2);
  for (int t = 0; t < kNumAnswerTypes; ++t) {
    auto type = static_cast<AnswerType>(t);
    CHECK(ParseAnswerType(AnswerTypeName(type)) == type);
  }
  CHECK_THROWS_AS(ParseAnswerType("date"), InputError);
}

TEST_CASE("supervision: twenty-six minus twenty-two") {
  DropExample ex = MakeExample("p", "q", "scores of 26 , 22 and 19",
                               "How many more?", {Number("4")});
  SupervisionSet s = EnumerateSupervision(ex, {3, false});
  CHECK(Contains(s.sign_assignments, {1, -1, 0}));
  CHECK(s.counts == std::vector<int>{4});
  for (const auto &a : s.sign_assignments) CHECK(a.size() == 3);
}

TEST_CASE("supervision: hundred minus twenty-five") {
  DropExample ex = MakeExample("p", "q", "25 percent were under 18",
                               "How many percent were not under 18?",
                               {Number("75")});
  SupervisionSet with = EnumerateSupervision(ex, {3, true});
  REQUIRE(ArithmeticOperands(ex, true) == std::vector<double>{25, 18, 100});
  CHECK(Contains(with.sign_assignments, {-1, 0, 1}));
  SupervisionSet without = EnumerateSupervision(ex, {3, false});
  CHECK_FALSE(Contains(without.sign_assignments, {-1, 0}));
  CHECK(without.sign_assignments.empty());
  CHECK(with.counts.empty());
}

TEST_CASE("supervision: single span match") {
  DropExample ex = MakeExample("p", "q", "There were 25 Germans and 31 English.",
                               "Which group is bigger?",
                               {Spans({"Germans"})});
  SupervisionSet s = EnumerateSupervision(ex, {});
  REQUIRE(s.passage_spans.size() == 1);
  CHECK(s.passage_spans[0] == Span{3, 3});
  CHECK(s.question_spans.empty());
  CHECK(s.counts.empty());
  CHECK(s.sign_assignments.empty());
}

TEST_CASE("supervision: normalised matching and dates") {
  DropExample ex = MakeExample("p", "q", "The Bears beat the bears .",
                               "Who won, the Bears?", {Spans({"bears"})});
  SupervisionSet s = EnumerateSupervision(ex, {});
  // Case differs; spans never start on a token that normalises away, so
  // "The Bears" is not a second match.
  CHECK(s.passage_spans == std::vector<Span>{{1, 1}, {4, 4}});
  CHECK(s.question_spans == std::vector<Span>{{4, 4}});

  GoldAnswer date;
  date.is_date = true;
  date.spans = {"1990"};
  DropExample d = MakeExample("p", "q", "In 1990 .", "When?", {date});
  CHECK(EnumerateSupervision(d, {}).empty());
}

TEST_CASE("supervision: enumeration order") {
  auto all = EnumerateSignAssignments({3, 1, 2}, {2}, 3);
  std::vector<std::vector<int8_t>> expected = {
      {0, 0, 1}, {1, -1, 0}, {1, 1, -1}};
  CHECK(all == expected);
}

TEST_CASE("supervision matches the exhaustive oracle") {
  diff::Rng rng(33);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = testing::RandomSignCase(rng);
    auto got = EnumerateSignAssignments(c.operands, c.targets, 3);
    testing::SignSet as_set(got.begin(), got.end());
    CHECK(as_set.size() == got.size());
    CHECK(as_set == testing::OracleSignAssignments(c.operands, c.targets, 3));
    for (const auto &signs : got) {
      double sum = 0;
      for (size_t i = 0; i < signs.size(); ++i) sum += signs[i] * c.operands[i];
      bool hit = false;
      for (double t : c.targets) hit |= std::abs(sum - t) <= 1e-5;
      CHECK(hit);
    }
  }
}

TEST_CASE("supervision: forty numbers within a second") {
  std::vector<double> ops;
  for (int i = 0; i < 40; ++i) ops.push_back(i * 7 % 53);
  auto start = std::chrono::steady_clock::now();
  auto all = EnumerateSignAssignments(ops, {10, 20, 30}, 3);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
                 .count();
  CHECK(!all.empty());
  CHECK(s < 1.0);
}

TEST_CASE("best span") {
  Eigen::VectorXd start = Eigen::VectorXd::Constant(15, -5);
  Eigen::VectorXd end = start;
  start(10) = 0;
  end(12) = 0;
  CHECK(BestSpan(start, end, 8) == Span{10, 12});
  CHECK(BestSpan(Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6), 8) ==
        Span{0, 0});
  // Length cap: start at 0, end at 9 is too long.
  Eigen::VectorXd s2 = Eigen::VectorXd::Constant(10, -5), e2 = s2;
  s2(0) = 0;
  e2(9) = 0;
  Span capped = BestSpan(s2, e2, 8);
  CHECK(capped.end - capped.start < 8);
  CHECK_THROWS(BestSpan(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4), 8));
}

TEST_CASE("best span equals brute force") {
  diff::Rng rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.Below(30));
    int cap = 1 + static_cast<int>(rng.Below(10));
    Eigen::VectorXd s(n), e(n);
    for (int i = 0; i < n; ++i) {
      // Coarse values so ties happen.
      s(i) = static_cast<double>(rng.Below(4));
      e(i) = static_cast<double>(rng.Below(4));
    }
    Span brute{-1, -1};
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (b < a || b - a + 1 > cap) continue;
        double score = s(a) + e(b);
        if (score > best ||
            (score == best && Span{a, b} < brute)) {
          best = score;
          brute = {a, b};
        }
      }
    }
    CHECK(BestSpan(s, e, cap) == brute);
  }
}

TEST_CASE("decode") {
  DropExample ex = MakeExample(
      "p", "q",
      "a b c d e f g h i j Polish group members k l m 26 22 19",
      "How many more?", {});
  SUBCASE("passage span") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(0) = 3;
    h.p_start(10) = 10;
    h.p_end(12) = 10;
    Prediction p = Decode(h, ex, {});
    CHECK(p.type == AnswerType::kPassageSpan);
    CHECK(p.span == Span{10, 12});
    CHECK(p.text == "Polish group members");
  }
  SUBCASE("question span") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(1) = 3;
    h.q_start(1) = 5;
    h.q_end(2) = 5;
    CHECK(Decode(h, ex, {}).text == "many more");
  }
  SUBCASE("count") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(2) = 3;
    h.count_logits(7) = 1;
    Prediction p = Decode(h, ex, {});
    CHECK(p.text == "7");
    CHECK(p.count == 7);
  }
  SUBCASE("arithmetic") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(3) = 3;
    h.sign_logits(0, SignColumn(1)) = 2;
    h.sign_logits(1, SignColumn(-1)) = 2;
    h.sign_logits(2, SignColumn(0)) = 2;
    h.sign_logits(3, SignColumn(0)) = 2;
    Prediction p = Decode(h, ex, {});
    CHECK(p.type == AnswerType::kArithmetic);
    CHECK(p.text == "4");
    CHECK(p.signs == std::vector<int>{1, -1, 0, 0});
    CHECK(p.operands == std::vector<double>{26, 22, 19, 100});
  }
  SUBCASE("all-zero arithmetic renders 0") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(3) = 3;
    for (int r = 0; r < 4; ++r) h.sign_logits(r, 0) = 1;
    CHECK(Decode(h, ex, {}).text == "0");
  }
  SUBCASE("uniform spans pick the first token") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(0) = 3;
    CHECK(Decode(h, ex, {}).span == Span{0, 0});
  }
  SUBCASE("infeasible arithmetic is skipped") {
    DropExample none = MakeExample("p", "q", "no digits here", "Who?", {});
    HeadValues h = Uniform(none, 0);
    h.type_logits(3) = 10;
    h.type_logits(2) = 5;
    CHECK(Decode(h, none, {false}).type == AnswerType::kCount);
  }
  SUBCASE("pure") {
    HeadValues h = Uniform(ex, 4);
    h.type_logits(3) = 1;
    h.sign_logits(2, 1) = 1;
    CHECK(Decode(h, ex, {}) == Decode(h, ex, {}));
  }
}

TEST_CASE("prediction records") {
  Prediction p;
  p.type = AnswerType::kArithmetic;
  p.text = "4";
  p.signs = {1, -1};
  p.operands = {26, 22};
  p.total = 4;
  CHECK(PredictionRecord("q1", p) ==
        R"({"query_id":"q1","type":"arithmetic","text":"4","payload":{"signs":[1,-1],"operands":[26.0,22.0],"total":4.0}})");
  Prediction s;
  s.text = "Germans";
  s.span = {3, 3};
  CHECK(PredictionRecord("q2", s) ==
        R"({"query_id":"q2","type":"passage_span","text":"Germans","payload":{"start":3,"end":3}})");

  auto path = (std::filesystem::temp_directory_path() / "numnet_preds.jsonl")
                  .string();
  {
    std::ofstream out(path);
    out << PredictionRecord("q1", p) << "\n" << PredictionRecord("q2", s)
        << "\n";
  }
  auto read = ReadPredictions(path);
  CHECK(read.at("q1") == "4");
  CHECK(read.at("q2") == "Germans");
  {
    std::ofstream out(path);
    out << PredictionRecord("q1", p) << "\n" << PredictionRecord("q1", s)
        << "\n";
  }
  CHECK_THROWS_AS(ReadPredictions(path), InputError);
  {
    std::ofstream out(path);
    out << "{not json\n";
  }
  CHECK_THROWS_AS(ReadPredictions(path), InputError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ReadPredictions(path), InputError);
}

}  // namespace numnet::answer
