#include "archviz/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "archviz/error.hpp"

namespace archviz {

bool TensorShape::fully_known() const {
  return std::all_of(spatial.begin(), spatial.end(), [](const auto& d) { return d.has_value(); });
}

std::optional<double> TensorShape::extent() const {
  if (is_dense || spatial.empty() || !fully_known()) return std::nullopt;
  double log_sum = 0.0;
  for (const auto& d : spatial) log_sum += std::log(static_cast<double>(*d));
  return std::exp(log_sum / static_cast<double>(spatial.size()));
}

std::string TensorShape::spatial_label() const {
  std::string out;
  for (std::size_t i = 0; i < spatial.size(); ++i) {
    if (i) out += "x";
    out += spatial[i] ? std::to_string(*spatial[i]) : "?";
  }
  return out;
}

LayerNode& NetworkGraph::add_node(LayerNode node) {
  if (contains(node.id)) throw SchemaError("duplicate node id '" + node.id + "'");
  index_.emplace(node.id, nodes_.size());
  nodes_.push_back(std::move(node));
  return nodes_.back();
}

void NetworkGraph::remove_node(const std::string& id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNodeError("unknown node '" + id + "'");
  nodes_.erase(nodes_.begin() + static_cast<std::ptrdiff_t>(it->second));
  reindex();
  std::erase_if(edges, [&](const Edge& e) { return e.first == id || e.second == id; });
  std::erase(inputs, id);
  std::erase(outputs, id);
}

void NetworkGraph::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
}

const LayerNode& NetworkGraph::node(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNodeError("unknown node '" + id + "'");
  return nodes_[it->second];
}

LayerNode& NetworkGraph::node(const std::string& id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownNodeError("unknown node '" + id + "'");
  return nodes_[it->second];
}

std::vector<std::string> NetworkGraph::successors(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [s, d] : edges)
    if (s == id) out.push_back(d);
  return out;
}

std::vector<std::string> NetworkGraph::predecessors(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [s, d] : edges)
    if (d == id) out.push_back(s);
  return out;
}

std::size_t NetworkGraph::out_degree(const std::string& id) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.first == id; }));
}

std::size_t NetworkGraph::in_degree(const std::string& id) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.second == id; }));
}

std::vector<std::string> NetworkGraph::topological_order() const {
  IndexedGraph ig(*this);
  std::vector<int> indeg(static_cast<std::size_t>(ig.n()));
  for (int v = 0; v < ig.n(); ++v) indeg[v] = static_cast<int>(ig.in[v].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < ig.n(); ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<std::string> order;
  order.reserve(nodes_.size());
  while (!ready.empty()) {
    int u = ready.top();
    ready.pop();
    order.push_back(ig.ids[u]);
    for (int v : ig.out[u])
      if (--indeg[v] == 0) ready.push(v);
  }
  if (order.size() != nodes_.size()) throw CycleError("graph contains a cycle");
  return order;
}

void NetworkGraph::validate_structure() const {
  for (const auto& [s, d] : edges) {
    if (!contains(s)) throw SchemaError("edge references undeclared node '" + s + "'");
    if (!contains(d)) throw SchemaError("edge references undeclared node '" + d + "'");
  }
  for (const auto& id : inputs)
    if (!contains(id)) throw SchemaError("input references undeclared node '" + id + "'");
  for (const auto& id : outputs)
    if (!contains(id)) throw SchemaError("output references undeclared node '" + id + "'");
  if (nodes_.empty()) throw DisconnectedError("graph has no nodes");
  if (inputs.empty()) throw DisconnectedError("graph has no input node");
  if (outputs.empty()) throw DisconnectedError("graph has no output node");
  topological_order();

  IndexedGraph ig(*this);
  auto sweep = [&](const std::vector<std::string>& seeds, bool forward) {
    std::vector<bool> seen(static_cast<std::size_t>(ig.n()), false);
    std::deque<int> queue;
    for (const auto& s : seeds) {
      int i = ig.index.at(s);
      if (!seen[i]) seen[i] = true, queue.push_back(i);
    }
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int v : forward ? ig.out[u] : ig.in[u])
        if (!seen[v]) seen[v] = true, queue.push_back(v);
    }
    return seen;
  };
  auto from_inputs = sweep(inputs, true);
  auto to_outputs = sweep(outputs, false);
  for (int v = 0; v < ig.n(); ++v) {
    if (!from_inputs[v])
      throw DisconnectedError("node '" + ig.ids[v] + "' is not reachable from any input");
    if (!to_outputs[v])
      throw DisconnectedError("node '" + ig.ids[v] + "' does not reach any output");
  }
}

IndexedGraph::IndexedGraph(const NetworkGraph& g) {
  ids.reserve(g.size());
  for (const auto& n : g.nodes()) {
    index.emplace(n.id, static_cast<int>(ids.size()));
    ids.push_back(n.id);
  }
  out.resize(ids.size());
  in.resize(ids.size());
  for (const auto& [s, d] : g.edges) {
    auto si = index.find(s);
    auto di = index.find(d);
    if (si == index.end() || di == index.end()) continue;
    out[si->second].push_back(di->second);
    in[di->second].push_back(si->second);
  }
}

std::vector<std::vector<bool>> transitive_closure(const IndexedGraph& g) {
  const int n = g.n();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int s = 0; s < n; ++s) {
    std::vector<int> stack(g.out[s].begin(), g.out[s].end());
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      if (reach[s][u]) continue;
      reach[s][u] = true;
      for (int v : g.out[u])
        if (!reach[s][v]) stack.push_back(v);
    }
  }
  return reach;
}

}  // namespace archviz
