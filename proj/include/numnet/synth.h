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

// Template-generated reading questions with golds computed from the
// generated numbers.

#ifndef NUMNET_SYNTH_H_
#define NUMNET_SYNTH_H_

#include <cstdint>
#include <string>

#include "numnet/textnum.h"

namespace numnet::synth {

enum class Family : uint8_t { kComparison, kArithmetic, kCount, kMixed };

const char *FamilyName(Family family);
Family ParseFamily(const std::string &name);  // throws invalid_argument

struct SyntheticSpec {
  Family family = Family::kMixed;
  int size = 100;
  int min_value = 1;
  int max_value = 99;
  uint64_t seed = 42;
  // Prefix for query and passage ids, so separate draws do not collide.
  std::string id_prefix = "synth";
};

// Comparison: "Which group is larger: A or B?" over labelled counts, span
// gold. Arithmetic: difference between the longest and the second longest
// (or shortest) field goal, numeric gold. Count: number of groups above a
// percentage threshold, gold in [0, 9]. Mixed cycles through the three.
Corpus Generate(const SyntheticSpec &spec);

}  // namespace numnet::synth

#endif  // NUMNET_SYNTH_H_
