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

#include "numnet/graph.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace numnet {

namespace {

const char *kComparisonNames[] = {"greater", "lower_equal"};
const char *kPairingNames[] = {"qq", "pp", "qp", "pq"};

Comparison ParseComparison(const std::string &name) {
  if (name == kComparisonNames[0]) return Comparison::kGreater;
  if (name == kComparisonNames[1]) return Comparison::kLowerOrEqual;
  throw std::invalid_argument("unknown comparison '" + name + "'");
}

Pairing ParsePairing(const std::string &name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kPairingNames[i]) return static_cast<Pairing>(i);
  }
  throw std::invalid_argument("unknown pairing '" + name + "'");
}

// Shortest round-trip text for a double.
std::string ValueText(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  std::string text = out.str();
  // Prefer the short form when it round-trips.
  for (int precision = 1; precision < 17; ++precision) {
    std::ostringstream trial;
    trial.precision(precision);
    trial << value;
    if (std::stod(trial.str()) == value) return trial.str();
  }
  return text;
}

}  // namespace

Relation Relation::FromIndex(int index) {
  if (index < 0 || index >= kNumRelations) {
    throw BoundsError("relation index out of range");
  }
  return Relation{static_cast<Comparison>(index / 4),
                  static_cast<Pairing>(index % 4)};
}

std::string Relation::Name() const {
  return std::string(ComparisonName(comparison)) + "_" +
         PairingName(pairing);
}

std::array<Relation, kNumRelations> AllRelations() {
  std::array<Relation, kNumRelations> out;
  for (int i = 0; i < kNumRelations; ++i) out[i] = Relation::FromIndex(i);
  return out;
}

const char *ComparisonName(Comparison comparison) {
  return kComparisonNames[static_cast<int>(comparison)];
}

const char *PairingName(Pairing pairing) {
  return kPairingNames[static_cast<int>(pairing)];
}

Pairing PairingOf(Source from, Source to) {
  if (from == Source::kQuestion) {
    return to == Source::kQuestion ? Pairing::kQQ : Pairing::kQP;
  }
  return to == Source::kQuestion ? Pairing::kPQ : Pairing::kPP;
}

NumGraph BuildGraph(const std::vector<NumberOccurrence> &question_numbers,
                    const std::vector<NumberOccurrence> &passage_numbers,
                    const GraphConfig &config) {
  if (!config.enable_greater_edges && !config.enable_lower_equal_edges) {
    throw std::invalid_argument("graph config must enable an edge family");
  }
  NumGraph graph;
  graph.config = config;
  auto add_nodes = [&](const std::vector<NumberOccurrence> &numbers,
                       std::vector<NodeId> *ids) {
    for (const auto &number : numbers) {
      if (!std::isfinite(number.value)) {
        throw std::invalid_argument("non-finite number value");
      }
      ids->push_back(NodeId{graph.nodes.size()});
      graph.nodes.push_back(number);
    }
  };
  if (config.include_question_numbers) {
    add_nodes(question_numbers, &graph.question_node_ids);
  }
  add_nodes(passage_numbers, &graph.passage_node_ids);

  size_t n = graph.nodes.size();
  for (size_t a = 0; a < n; ++a) {
    for (size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto &from = graph.nodes[a];
      const auto &to = graph.nodes[b];
      Pairing pairing = PairingOf(from.source, to.source);
      if (config.enable_greater_edges && from.value > to.value) {
        graph.edges.push_back(Edge{NodeId{a}, NodeId{b},
                                   Relation{Comparison::kGreater, pairing}});
      }
      if (config.enable_lower_equal_edges && to.value <= from.value) {
        graph.edges.push_back(
            Edge{NodeId{a}, NodeId{b},
                 Relation{Comparison::kLowerOrEqual, pairing}});
      }
    }
  }
  return graph;
}

std::vector<Neighbor> NeighborsIn(const NumGraph &graph, NodeId node) {
  if (node.index >= graph.num_nodes()) {
    throw BoundsError("node " + std::to_string(node.index) +
                      " out of range for graph with " +
                      std::to_string(graph.num_nodes()) + " nodes");
  }
  std::vector<Neighbor> out;
  for (const auto &edge : graph.edges) {
    if (edge.to == node) out.push_back(Neighbor{edge.from, edge.rel});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string DumpGraph(const NumGraph &graph, DumpFormat format) {
  if (format == DumpFormat::kDot) {
    std::ostringstream out;
    out << "digraph numgraph {\n";
    for (size_t i = 0; i < graph.nodes.size(); ++i) {
      const auto &node = graph.nodes[i];
      out << "  v" << i << " [label=\"v" << i << ":" << ValueText(node.value)
          << ":" << SourceName(node.source) << "\"];\n";
    }
    for (const auto &edge : graph.edges) {
      const char *style =
          edge.rel.comparison == Comparison::kGreater ? "solid" : "dashed";
      out << "  v" << edge.from.index << " -> v" << edge.to.index
          << " [style=" << style << ", label=\"" << PairingName(edge.rel.pairing)
          << "\"];\n";
    }
    out << "}\n";
    return out.str();
  }

  nlohmann::ordered_json root;
  root["nodes"] = nlohmann::ordered_json::array();
  for (size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto &node = graph.nodes[i];
    root["nodes"].push_back({{"id", i},
                             {"value", node.value},
                             {"source", SourceName(node.source)},
                             {"token_index", node.token_index}});
  }
  root["edges"] = nlohmann::ordered_json::array();
  for (const auto &edge : graph.edges) {
    root["edges"].push_back({{"from", edge.from.index},
                             {"to", edge.to.index},
                             {"cmp", ComparisonName(edge.rel.comparison)},
                             {"pair", PairingName(edge.rel.pairing)}});
  }
  return root.dump() + "\n";
}

NumGraph ParseGraphJson(const std::string &json) {
  auto root = nlohmann::json::parse(json);
  NumGraph graph;
  graph.config.enable_greater_edges = false;
  graph.config.enable_lower_equal_edges = false;
  for (const auto &node : root.at("nodes")) {
    NumberOccurrence occ;
    occ.value = node.at("value").get<double>();
    occ.source = node.at("source").get<std::string>() == "Q"
                     ? Source::kQuestion
                     : Source::kPassage;
    occ.token_index = node.value("token_index", size_t{0});
    NodeId id{node.at("id").get<size_t>()};
    if (id.index != graph.nodes.size()) {
      throw std::invalid_argument("graph json node ids must be dense");
    }
    (occ.source == Source::kQuestion ? graph.question_node_ids
                                     : graph.passage_node_ids)
        .push_back(id);
    graph.nodes.push_back(occ);
  }
  graph.config.include_question_numbers = !graph.question_node_ids.empty();
  for (const auto &edge : root.at("edges")) {
    Edge e{NodeId{edge.at("from").get<size_t>()},
           NodeId{edge.at("to").get<size_t>()},
           Relation{ParseComparison(edge.at("cmp").get<std::string>()),
                    ParsePairing(edge.at("pair").get<std::string>())}};
    if (e.rel.comparison == Comparison::kGreater) {
      graph.config.enable_greater_edges = true;
    } else {
      graph.config.enable_lower_equal_edges = true;
    }
    graph.edges.push_back(e);
  }
  return graph;
}

}  // namespace numnet
