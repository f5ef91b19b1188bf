#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace archviz {

/// Spatial axes plus feature channels of one tensor, batch axis stripped.
/// Unknown spatial extents are std::nullopt. A tensor with no spatial axes
/// is a dense neuron vector and `channels` holds the neuron count.
struct TensorShape {
  std::vector<std::optional<long>> spatial;
  long channels = 1;
  bool is_dense = false;

  static TensorShape dense(long neurons) { return {{}, neurons, true}; }
  static TensorShape image(std::vector<std::optional<long>> spatial, long channels) {
    const bool dense = spatial.empty();
    return {std::move(spatial), channels, dense};
  }

  bool fully_known() const;
  /// Geometric mean of the spatial axes; nullopt for dense or unknown shapes.
  std::optional<double> extent() const;
  /// "224x224", "?x?x16", or "" for dense vectors.
  std::string spatial_label() const;

  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

using ParamValue = std::variant<long, double, std::string, bool, std::vector<long>>;

struct LayerNode {
  std::string id;
  std::string layer_type;
  std::string display_name;
  TensorShape in_shape;
  TensorShape out_shape;
  std::map<std::string, ParamValue> params;
  bool is_routing = false;

  friend bool operator==(const LayerNode&, const LayerNode&) = default;
};

using Edge = std::pair<std::string, std::string>;

/// Directed acyclic multigraph of layers. Node storage is ordered by
/// insertion so every algorithm sees the same deterministic node order.
class NetworkGraph {
 public:
  std::vector<Edge> edges;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  /// Throws SchemaError on duplicate id.
  LayerNode& add_node(LayerNode node);
  void remove_node(const std::string& id);

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  const LayerNode& node(const std::string& id) const;
  LayerNode& node(const std::string& id);
  const std::vector<LayerNode>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  /// Successor / predecessor ids, one entry per edge, in edge-list order.
  std::vector<std::string> successors(const std::string& id) const;
  std::vector<std::string> predecessors(const std::string& id) const;
  std::size_t out_degree(const std::string& id) const;
  std::size_t in_degree(const std::string& id) const;

  /// Kahn's algorithm with node insertion order as the tie-break.
  /// Throws CycleError.
  std::vector<std::string> topological_order() const;

  /// Throws CycleError, DisconnectedError, SchemaError.
  void validate_structure() const;

 private:
  std::vector<LayerNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  void reindex();
};

/// Adjacency in index form; convenient for algorithms that run hot loops.
struct IndexedGraph {
  std::vector<std::string> ids;
  std::unordered_map<std::string, int> index;
  std::vector<std::vector<int>> out;  // per edge, edge-list order
  std::vector<std::vector<int>> in;

  explicit IndexedGraph(const NetworkGraph& g);
  int n() const { return static_cast<int>(ids.size()); }
};

/// reach[u][v] for all node pairs (u reaches v through >= 1 edge).
std::vector<std::vector<bool>> transitive_closure(const IndexedGraph& g);

}  // namespace archviz
