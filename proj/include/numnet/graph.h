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

// Numerically-aware number graph.
//
// Every number occurrence becomes its own node. Two directed edge families
// encode pairwise order:
//
//   Greater       a -> b  iff  n(a) >  n(b)
//   LowerOrEqual  a -> b  iff  n(b) <= n(a)
//
// so for a strict pair both families point from the larger to the smaller
// node, and for an equal pair only LowerOrEqual edges exist, one in each
// direction. Self loops are never added. Each edge also carries the
// provenance pairing of its endpoints (question/passage), giving eight
// relation types in total.

#ifndef NUMNET_GRAPH_H_
#define NUMNET_GRAPH_H_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "numnet/textnum.h"

namespace numnet {

struct NodeId {
  size_t index = 0;

  auto operator<=>(const NodeId &) const = default;
};

enum class Comparison : uint8_t { kGreater, kLowerOrEqual };
enum class Pairing : uint8_t { kQQ, kPP, kQP, kPQ };

struct Relation {
  Comparison comparison = Comparison::kGreater;
  Pairing pairing = Pairing::kPP;

  auto operator<=>(const Relation &) const = default;

  // Dense index in [0, 8): comparison-major.
  int index() const {
    return static_cast<int>(comparison) * 4 + static_cast<int>(pairing);
  }
  static Relation FromIndex(int index);
  // e.g. "greater_pp", "lower_equal_qp".
  std::string Name() const;
};

inline constexpr int kNumRelations = 8;

// All eight relations in index order.
std::array<Relation, kNumRelations> AllRelations();

const char *ComparisonName(Comparison comparison);
const char *PairingName(Pairing pairing);
Pairing PairingOf(Source from, Source to);

struct GraphConfig {
  bool include_question_numbers = true;
  bool enable_greater_edges = true;
  bool enable_lower_equal_edges = true;

  bool operator==(const GraphConfig &) const = default;
};

struct Edge {
  NodeId from;
  NodeId to;
  Relation rel;

  auto operator<=>(const Edge &) const = default;
};

struct NumGraph {
  std::vector<NumberOccurrence> nodes;  // indexed by NodeId
  std::vector<Edge> edges;
  std::vector<NodeId> question_node_ids;
  std::vector<NodeId> passage_node_ids;
  GraphConfig config;

  size_t num_nodes() const { return nodes.size(); }
};

class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Node order: question occurrences in token order (when included), then
// passage occurrences in token order. Edges are sorted by (from, to, rel).
// Throws std::invalid_argument if both edge families are disabled or a
// value is not finite.
NumGraph BuildGraph(const std::vector<NumberOccurrence> &question_numbers,
                    const std::vector<NumberOccurrence> &passage_numbers,
                    const GraphConfig &config);

struct Neighbor {
  NodeId node;
  Relation rel;

  auto operator<=>(const Neighbor &) const = default;
};

// Incoming neighbours j -> node, ordered by j then relation.
std::vector<Neighbor> NeighborsIn(const NumGraph &graph, NodeId node);

enum class DumpFormat { kDot, kJson };

std::string DumpGraph(const NumGraph &graph, DumpFormat format);

// Inverse of DumpGraph(kJson) for nodes and edges; the config is inferred
// only as far as the edge families present.
NumGraph ParseGraphJson(const std::string &json);

}  // namespace numnet

#endif  // NUMNET_GRAPH_H_
