#pragma once

#include <set>
#include <string>
#include <vector>

#include "archviz/graph.hpp"

namespace archviz {

struct LabelToggles {
  bool show_spatial_labels = true;
  bool show_channel_labels = true;
  bool show_io_placeholders = false;

  friend bool operator==(const LabelToggles&, const LabelToggles&) = default;
};

struct ViewState {
  std::set<std::string> hidden_types;
  /// Node ids (in the post-hiding graph) that get a routing node after them.
  std::vector<std::string> routing_insertions;
  LabelToggles labels;

  friend bool operator==(const ViewState&, const ViewState&) = default;
};

/// Removes every node of a hidden type and bridges its predecessors to its
/// successors. A bridged edge is not added when the same (pred, succ) edge
/// already exists. Throws DisconnectError when an input or output is hidden.
NetworkGraph hide_layer_types(const NetworkGraph& graph, const std::set<std::string>& hidden);

/// Inserts "<id>_route" after `node_id` and moves all its out-edges onto it.
/// Throws UnknownNodeError, NotASplitError (out-degree < 2).
NetworkGraph insert_routing_layer(const NetworkGraph& graph, const std::string& node_id);

/// Hiding followed by the routing insertions, in order.
NetworkGraph apply_view(const NetworkGraph& graph, const ViewState& view);

/// Maximal paths linked by edges u->v with out(u) = 1 and in(v) = 1, at
/// least two nodes long. Entry and exit may have any outer degree.
std::vector<std::vector<std::string>> sequential_chains(const NetworkGraph& graph);

}  // namespace archviz
