#pragma once

// Small graph builders shared by the test programs.

#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "archviz/graph.hpp"

namespace testing {

inline archviz::TensorShape square(long side, long channels) {
  return archviz::TensorShape::image({side, side}, channels);
}

/// Graph with nodes "n0".."n{k-1}" of the given types, identical shapes, and
/// the given index edges. Sources become inputs and sinks become outputs.
inline archviz::NetworkGraph make_graph(const std::vector<std::string>& types,
                                        const std::vector<std::pair<int, int>>& edges) {
  archviz::NetworkGraph g;
  for (std::size_t i = 0; i < types.size(); ++i) {
    archviz::LayerNode n;
    n.id = "n" + std::to_string(i);
    n.layer_type = types[i];
    n.display_name = n.id;
    n.in_shape = n.out_shape = square(8, 4);
    g.add_node(std::move(n));
  }
  for (auto [a, b] : edges) g.edges.emplace_back("n" + std::to_string(a), "n" + std::to_string(b));
  for (const auto& n : g.nodes()) {
    if (g.in_degree(n.id) == 0) g.inputs.push_back(n.id);
    if (g.out_degree(n.id) == 0) g.outputs.push_back(n.id);
  }
  return g;
}

inline archviz::NetworkGraph make_chain(const std::vector<std::string>& types) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < static_cast<int>(types.size()); ++i) edges.emplace_back(i, i + 1);
  return make_graph(types, edges);
}

/// Connected DAG: node j > 0 gets one random predecessor below it, plus
/// extra forward edges with probability `density`.
inline std::vector<std::pair<int, int>> random_dag_edges(int n, double density, std::mt19937& rng) {
  std::vector<std::pair<int, int>> edges;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int j = 1; j < n; ++j) {
    const int anchor = std::uniform_int_distribution<int>(0, j - 1)(rng);
    edges.emplace_back(anchor, j);
    for (int i = 0; i < j; ++i)
      if (i != anchor && coin(rng) < density) edges.emplace_back(i, j);
  }
  return edges;
}

/// Two-terminal series-parallel DAG from random series/parallel
/// compositions. Node 0 is the source and node 1 the sink.
inline std::vector<std::pair<int, int>> random_sp_edges(int budget, std::mt19937& rng, int& nodes) {
  std::vector<std::pair<int, int>> edges;
  nodes = 2;
  std::function<void(int, int, int)> build = [&](int s, int t, int left) {
    const int pick = std::uniform_int_distribution<int>(0, 2)(rng);
    if (left <= 1 || (pick == 0 && left < 3)) {
      const int m = nodes++;
      edges.emplace_back(s, m);
      edges.emplace_back(m, t);
      return;
    }
    if (pick <= 1) {
      const int m = nodes++;
      const int a = std::uniform_int_distribution<int>(1, left - 1)(rng);
      build(s, m, a);
      build(m, t, left - a);
    } else {
      const int a = std::max(1, left / 2);
      build(s, t, a);
      build(s, t, left - a);
    }
  };
  build(0, 1, budget);
  return edges;
}

inline std::vector<std::string> random_types(int n, int alphabet, std::mt19937& rng) {
  static const char* names[] = {"Conv2D", "BatchNormalization", "Activation", "MaxPooling2D",
                                "Dropout", "Add"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i)
    out.push_back(names[std::uniform_int_distribution<int>(0, alphabet - 1)(rng)]);
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& name) {
  return read_file(std::string(ARCHVIZ_FIXTURES) + "/" + name);
}

}  // namespace testing
