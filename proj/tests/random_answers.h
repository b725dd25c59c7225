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

// Random answer strings for metric properties. Small pools make exact and
// partial matches frequent.

#ifndef NUMNET_TESTS_RANDOM_ANSWERS_H_
#define NUMNET_TESTS_RANDOM_ANSWERS_H_

#include <string>
#include <utility>
#include <vector>

#include "numnet/tensor.h"

namespace numnet::testing {

inline std::string RandomAnswer(diff::Rng &rng) {
  static const char *kPieces[] = {"the", "Bears", "bears", "47-yard", "47",
                                  "yard", "4",     "4.0",   "5",       "a",
                                  "field", "goal", "Germans", ",", "6.3%",
                                  "-3",    "an",   "English", "."};
  std::string out;
  size_t n = rng.Below(4);
  for (size_t i = 0; i < n; ++i) {
    if (!out.empty()) out += rng.Below(5) == 0 ? "  " : " ";
    out += kPieces[rng.Below(std::size(kPieces))];
  }
  return out;
}

// A prediction and one to three golds; about a quarter of the time the
// prediction is a case- or article-perturbed copy of a gold.
inline std::pair<std::string, std::vector<std::string>> RandomAnswerPair(
    diff::Rng &rng) {
  std::vector<std::string> golds;
  size_t n = 1 + rng.Below(3);
  for (size_t i = 0; i < n; ++i) golds.push_back(RandomAnswer(rng));
  std::string pred = RandomAnswer(rng);
  if (rng.Below(4) == 0) {
    pred = golds[rng.Below(n)];
    if (rng.Below(2)) pred = "The " + pred;
    for (char &c : pred) {
      if (c >= 'a' && c <= 'z' && rng.Below(3) == 0) c = c - 'a' + 'A';
    }
  }
  return {pred, golds};
}

}  // namespace numnet::testing

#endif  // NUMNET_TESTS_RANDOM_ANSWERS_H_
