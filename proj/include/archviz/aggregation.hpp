#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "archviz/graph.hpp"

namespace archviz {

struct AggregationDef {
  std::string id;
  std::string name;
  /// Layer types or ids of other defs.
  std::vector<std::string> sequence;
  bool active = true;
  std::optional<std::string> color;

  friend bool operator==(const AggregationDef&, const AggregationDef&) = default;
};

/// Defs in insertion order. Mutators return a new state.
class AggregationState {
 public:
  const std::vector<AggregationDef>& defs() const { return defs_; }
  bool contains(const std::string& id) const;
  /// Throws UnknownAggregationError.
  const AggregationDef& def(const std::string& id) const;

  /// Ids of defs referenced directly by `id`'s sequence.
  std::vector<std::string> children(const std::string& id) const;
  /// Ids of defs whose sequence references `id` directly.
  std::vector<std::string> parents(const std::string& id) const;
  /// (parent, child) pairs.
  std::vector<std::pair<std::string, std::string>> dependency_edges() const;
  /// Children before parents, insertion order among independent defs.
  std::vector<std::string> dependency_order() const;

  /// Throws InvalidAggregationError (duplicate id, sequence shorter than 2,
  /// reference cycle).
  AggregationState add(AggregationDef def) const;
  /// Deactivation also deactivates every def that depends on `id`;
  /// activation also activates everything `id` depends on.
  AggregationState set_active(const std::string& id, bool active) const;
  /// Removes `id` and, transitively, every def that references it.
  AggregationState remove(const std::string& id) const;

  friend bool operator==(const AggregationState&, const AggregationState&) = default;

 private:
  std::vector<AggregationDef> defs_;
  std::size_t position(const std::string& id) const;
};

/// Maximal paths used for matching. Besides plain chain links (out(u) = 1,
/// in(v) = 1) a Routing node with out-degree >= 2 links directly to the join
/// that closes its split when the region in between is single-entry,
/// single-exit ("hop"). `hop_interior[i]` holds the region skipped between
/// nodes[i] and nodes[i + 1] (empty for plain links).
struct Run {
  std::vector<std::string> nodes;
  std::vector<std::vector<std::string>> hop_interior;
};

std::vector<Run> aggregation_runs(const NetworkGraph& graph);

struct Candidate {
  std::vector<std::string> sequence;
  int count = 0;
  /// Nodes absorbed by the counted occurrences, hop interiors included.
  int covered = 0;
};

/// Most frequent contiguous type subsequence (length >= 2) over all runs,
/// counted greedily left to right without overlap. Ties: more nodes
/// covered, then lexicographically smallest. Nothing if the best count < 2.
std::optional<Candidate> detect_auto_aggregation(const NetworkGraph& graph);

/// Greedy non-overlapping count of `pattern` in `types`; the start indices.
std::vector<std::size_t> greedy_occurrences(const std::vector<std::string>& types,
                                            const std::vector<std::string>& pattern);

/// What an aggregate node replaced; members may be aggregates themselves.
struct AggregateInfo {
  std::string def_id;
  std::vector<LayerNode> members;
  std::vector<Edge> internal_edges;
  std::string entry;
  std::string exit;
};

struct AggregatedGraph {
  NetworkGraph graph;
  std::map<std::string, AggregateInfo> aggregates;

  bool is_aggregate(const std::string& id) const { return aggregates.count(id) != 0; }
};

/// Active defs replace every greedy match, children before parents.
AggregatedGraph apply_aggregations(const NetworkGraph& graph, const AggregationState& state);

/// Replaces aggregates by their members recursively.
NetworkGraph expand_aggregates(const AggregatedGraph& aggregated);

/// `rounds` times: detect on the currently aggregated graph and add the
/// winner as an active def ("auto_1", "auto_2", ...). Stops early when
/// nothing repeats.
AggregationState auto_aggregate(const NetworkGraph& graph, AggregationState state, int rounds);

}  // namespace archviz
