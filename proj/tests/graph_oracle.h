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

// Brute-force reference for graph construction, shared by the unit and
// acceptance tests. Written from the edge definitions, not from graph.cc.

#ifndef NUMNET_TESTS_GRAPH_ORACLE_H_
#define NUMNET_TESTS_GRAPH_ORACLE_H_

#include <algorithm>
#include <vector>

#include "numnet/graph.h"
#include "numnet/tensor.h"

namespace numnet::testing {

// Up to `max_n` occurrences with small integer values, so duplicates are
// common; about a third of lists get one value forced to repeat.
inline std::vector<NumberOccurrence> RandomOccurrences(diff::Rng &rng,
                                                       size_t max_n,
                                                       Source source) {
  size_t n = rng.Below(max_n + 1);
  std::vector<NumberOccurrence> out;
  for (size_t i = 0; i < n; ++i) {
    double value = static_cast<double>(rng.Below(10));
    if (rng.Below(4) == 0) value += 0.5;
    out.push_back({value, i * 2, source});
  }
  if (n >= 2 && rng.Below(3) == 0) {
    out[rng.Below(n)].value = out[rng.Below(n)].value;
  }
  return out;
}

inline std::vector<NumberOccurrence> OracleNodes(
    const std::vector<NumberOccurrence> &q,
    const std::vector<NumberOccurrence> &p, const GraphConfig &config) {
  std::vector<NumberOccurrence> nodes;
  if (config.include_question_numbers) nodes = q;
  nodes.insert(nodes.end(), p.begin(), p.end());
  return nodes;
}

inline Pairing OraclePairing(Source from, Source to) {
  bool fq = from == Source::kQuestion;
  bool tq = to == Source::kQuestion;
  if (fq && tq) return Pairing::kQQ;
  if (!fq && !tq) return Pairing::kPP;
  return fq ? Pairing::kQP : Pairing::kPQ;
}

inline std::vector<Edge> OracleEdges(
    const std::vector<NumberOccurrence> &nodes, const GraphConfig &config) {
  std::vector<Edge> edges;
  for (size_t a = 0; a < nodes.size(); ++a) {
    for (size_t b = 0; b < nodes.size(); ++b) {
      if (a == b) continue;
      Pairing pairing = OraclePairing(nodes[a].source, nodes[b].source);
      double na = nodes[a].value, nb = nodes[b].value;
      if (config.enable_greater_edges && na > nb) {
        edges.push_back({NodeId{a}, NodeId{b}, {Comparison::kGreater, pairing}});
      }
      if (config.enable_lower_equal_edges && nb <= na) {
        edges.push_back(
            {NodeId{a}, NodeId{b}, {Comparison::kLowerOrEqual, pairing}});
      }
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

inline std::vector<Neighbor> OracleNeighborsIn(
    const std::vector<NumberOccurrence> &nodes, const GraphConfig &config,
    size_t target) {
  std::vector<Neighbor> out;
  for (const Edge &e : OracleEdges(nodes, config)) {
    if (e.to.index == target) out.push_back({e.from, e.rel});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Unordered pairs with equal values.
inline size_t DuplicatePairs(const std::vector<NumberOccurrence> &nodes) {
  size_t d = 0;
  for (size_t a = 0; a < nodes.size(); ++a) {
    for (size_t b = a + 1; b < nodes.size(); ++b) {
      if (nodes[a].value == nodes[b].value) ++d;
    }
  }
  return d;
}

}  // namespace numnet::testing

#endif  // NUMNET_TESTS_GRAPH_ORACLE_H_
