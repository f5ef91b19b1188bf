#include "archviz/transform.hpp"

#include <algorithm>

#include "archviz/error.hpp"

namespace archviz {

NetworkGraph hide_layer_types(const NetworkGraph& graph, const std::set<std::string>& hidden) {
  if (hidden.empty()) return graph;
  for (const auto& ids : {graph.inputs, graph.outputs}) {
    for (const auto& id : ids) {
      const auto& type = graph.node(id).layer_type;
      if (hidden.count(type))
        throw DisconnectError("hiding '" + type + "' would remove graph endpoint '" + id + "'");
    }
  }

  NetworkGraph g = graph;
  for (const auto& id : graph.topological_order()) {
    if (!hidden.count(g.node(id).layer_type)) continue;
    const auto preds = g.predecessors(id);
    std::vector<Edge> edges;
    edges.reserve(g.edges.size() + preds.size());
    for (const auto& e : g.edges) {
      if (e.second == id) continue;
      if (e.first != id) {
        edges.push_back(e);
        continue;
      }
      // Splice the bridged edges in where the hidden node's out-edge sat so
      // merge layers keep their inbound order.
      for (const auto& p : preds) {
        const Edge bridged{p, e.second};
        const bool exists = std::find(edges.begin(), edges.end(), bridged) != edges.end() ||
                            std::find(g.edges.begin(), g.edges.end(), bridged) != g.edges.end();
        if (!exists) edges.push_back(bridged);
      }
    }
    g.edges = std::move(edges);
    g.remove_node(id);
  }
  return g;
}

NetworkGraph insert_routing_layer(const NetworkGraph& graph, const std::string& node_id) {
  if (!graph.contains(node_id)) throw UnknownNodeError("no node '" + node_id + "'");
  if (graph.out_degree(node_id) < 2)
    throw NotASplitError("node '" + node_id + "' has " +
                         std::to_string(graph.out_degree(node_id)) +
                         " outgoing connection(s); routing needs at least 2");
  NetworkGraph g = graph;
  std::string route = node_id + "_route";
  for (int k = 2; g.contains(route); ++k) route = node_id + "_route" + std::to_string(k);

  LayerNode r;
  r.id = route;
  r.layer_type = "Routing";
  r.display_name = "Routing";
  r.in_shape = r.out_shape = g.node(node_id).out_shape;
  r.is_routing = true;
  g.add_node(std::move(r));

  std::vector<Edge> edges;
  bool linked = false;
  for (const auto& e : g.edges) {
    if (e.first != node_id) {
      edges.push_back(e);
      continue;
    }
    if (!linked) {
      edges.emplace_back(node_id, route);
      linked = true;
    }
    edges.emplace_back(route, e.second);
  }
  g.edges = std::move(edges);
  return g;
}

NetworkGraph apply_view(const NetworkGraph& graph, const ViewState& view) {
  NetworkGraph g = hide_layer_types(graph, view.hidden_types);
  for (const auto& id : view.routing_insertions) g = insert_routing_layer(g, id);
  return g;
}

std::vector<std::vector<std::string>> sequential_chains(const NetworkGraph& graph) {
  const IndexedGraph ig(graph);
  const int n = ig.n();
  std::vector<int> next(n, -1);
  std::vector<bool> has_prev(n, false);
  for (int u = 0; u < n; ++u) {
    if (ig.out[u].size() != 1) continue;
    const int v = ig.out[u][0];
    if (ig.in[v].size() != 1) continue;
    next[u] = v;
    has_prev[v] = true;
  }
  std::vector<std::vector<std::string>> chains;
  for (int u = 0; u < n; ++u) {
    if (has_prev[u] || next[u] < 0) continue;
    std::vector<std::string> chain;
    for (int v = u; v >= 0; v = next[v]) chain.push_back(ig.ids[v]);
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace archviz
