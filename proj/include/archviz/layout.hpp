#pragma once

#include <map>
#include <string>
#include <vector>

#include "archviz/graph.hpp"

namespace archviz {

/// Weighted edge for the ranking problem (minimum length 1).
struct RankEdge {
  int tail;
  int head;
  int weight = 1;
};

/// Network simplex over an index graph: minimizes sum w * (r[head] - r[tail])
/// subject to r[head] >= r[tail] + 1. Each weakly connected component is
/// solved separately and normalized to min rank 0. Throws CycleError.
std::vector<int> network_simplex(int n, const std::vector<RankEdge>& edges);

/// Ranks of every node; parallel edges count with their multiplicity.
std::map<std::string, int> assign_ranks(const NetworkGraph& graph);

long total_edge_length(const NetworkGraph& graph, const std::map<std::string, int>& ranks);

/// The graph with every edge that spans k > 1 ranks subdivided by k - 1
/// virtual nodes. Ids [0, real) are graph nodes in node order.
struct LayeredGraph {
  int real = 0;
  std::vector<int> rank;
  std::vector<std::vector<int>> out;  // edge-list order
  std::vector<std::vector<int>> in;
  /// Per original edge: the virtual node ids from tail side to head side.
  std::vector<std::vector<int>> chains;
  /// Per rank, ids top to bottom.
  std::vector<std::vector<int>> layers;

  int size() const { return static_cast<int>(rank.size()); }
};

LayeredGraph build_layered(const NetworkGraph& graph, const std::map<std::string, int>& ranks);

/// Fills `layers`: depth-first discovery order along out-edges, then eight
/// barycenter sweeps (down, up) that are kept only when they strictly
/// reduce crossings.
void order_layers(LayeredGraph& layered);

/// Crossings between consecutive ranks of the layered graph.
long count_crossings(const LayeredGraph& layered);

std::map<std::string, int> order_within_ranks(const NetworkGraph& graph,
                                              const std::map<std::string, int>& ranks);

struct Spacing {
  double h_gap = 30;
  double v_gap = 20;
};

struct NodeBox {
  double width = 0;
  double height = 0;
};

struct LayoutResult {
  std::map<std::string, int> rank;
  std::map<std::string, int> order;
  std::map<std::string, double> x;
  std::map<std::string, double> y;
  /// Per rank: left edge and width of its band.
  std::vector<double> band_left;
  std::vector<double> band_width;
  /// Per graph edge: y of each virtual slot between its endpoint ranks.
  std::vector<std::vector<double>> lanes;
};

/// Handle lengths of one edge at its source and target glyph.
struct PortLengths {
  double source = 0;
  double target = 0;
};

/// Ranks, orders, and places the graph. `boxes` gives each node's glyph
/// extent; missing entries count as zero-size. With `ports` (one per edge)
/// vertical placement lines up handle centres instead of node centres.
LayoutResult layout_graph(const NetworkGraph& graph, const std::map<std::string, NodeBox>& boxes,
                          const Spacing& spacing, const std::vector<PortLengths>& ports = {},
                          double port_gap = 0);

}  // namespace archviz
