#include "archviz/aggregation.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "archviz/error.hpp"

namespace archviz {

// ---- state -----------------------------------------------------------------

std::size_t AggregationState::position(const std::string& id) const {
  for (std::size_t i = 0; i < defs_.size(); ++i)
    if (defs_[i].id == id) return i;
  throw UnknownAggregationError("no aggregation '" + id + "'");
}

bool AggregationState::contains(const std::string& id) const {
  return std::any_of(defs_.begin(), defs_.end(), [&](const auto& d) { return d.id == id; });
}

const AggregationDef& AggregationState::def(const std::string& id) const {
  return defs_[position(id)];
}

std::vector<std::string> AggregationState::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& ref : def(id).sequence)
    if (contains(ref) && std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(ref);
  return out;
}

std::vector<std::string> AggregationState::parents(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& d : defs_)
    if (std::find(d.sequence.begin(), d.sequence.end(), id) != d.sequence.end())
      out.push_back(d.id);
  return out;
}

std::vector<std::pair<std::string, std::string>> AggregationState::dependency_edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& d : defs_)
    for (const auto& c : children(d.id)) out.emplace_back(d.id, c);
  return out;
}

std::vector<std::string> AggregationState::dependency_order() const {
  std::vector<std::string> order;
  std::set<std::string> done, open;
  std::function<void(const std::string&)> visit = [&](const std::string& id) {
    if (done.count(id)) return;
    if (open.count(id)) throw InvalidAggregationError("aggregation '" + id + "' references itself");
    open.insert(id);
    for (const auto& c : children(id)) visit(c);
    open.erase(id);
    done.insert(id);
    order.push_back(id);
  };
  for (const auto& d : defs_) visit(d.id);
  return order;
}

AggregationState AggregationState::add(AggregationDef def) const {
  if (def.id.empty()) throw InvalidAggregationError("aggregation id must not be empty");
  if (contains(def.id)) throw InvalidAggregationError("aggregation '" + def.id + "' already exists");
  if (def.sequence.size() < 2)
    throw InvalidAggregationError("aggregation '" + def.id + "' needs at least two elements");
  if (def.name.empty()) def.name = def.id;
  AggregationState next = *this;
  next.defs_.push_back(std::move(def));
  next.dependency_order();  // throws on cycles
  // An active def may not sit on top of an inactive one.
  const auto& added = next.defs_.back();
  if (added.active)
    return next.set_active(added.id, true);
  return next;
}

AggregationState AggregationState::set_active(const std::string& id, bool active) const {
  position(id);
  AggregationState next = *this;
  std::vector<std::string> stack{id};
  std::set<std::string> seen;
  while (!stack.empty()) {
    const std::string cur = stack.back();
    stack.pop_back();
    if (!seen.insert(cur).second) continue;
    next.defs_[next.position(cur)].active = active;
    for (const auto& other : active ? children(cur) : parents(cur)) stack.push_back(other);
  }
  return next;
}

AggregationState AggregationState::remove(const std::string& id) const {
  position(id);
  std::set<std::string> doomed;
  std::vector<std::string> stack{id};
  while (!stack.empty()) {
    const std::string cur = stack.back();
    stack.pop_back();
    if (!doomed.insert(cur).second) continue;
    for (const auto& p : parents(cur)) stack.push_back(p);
  }
  AggregationState next;
  for (const auto& d : defs_)
    if (!doomed.count(d.id)) next.defs_.push_back(d);
  return next;
}

// ---- runs ------------------------------------------------------------------

std::vector<Run> aggregation_runs(const NetworkGraph& graph) {
  const IndexedGraph ig(graph);
  const int n = ig.n();
  const auto reach = transitive_closure(ig);

  std::vector<int> topo_pos(n);
  {
    const auto order = graph.topological_order();
    for (int i = 0; i < n; ++i) topo_pos[ig.index.at(order[i])] = i;
  }
  std::vector<int> by_topo(n);
  for (int v = 0; v < n; ++v) by_topo[topo_pos[v]] = v;

  std::vector<int> next(n, -1);
  std::vector<std::vector<int>> interior(n);
  std::vector<bool> hop_entered(n, false);

  for (int t = 0; t < n; ++t) {
    const int r = by_topo[t];
    const auto& node = graph.node(ig.ids[r]);
    if (!node.is_routing || ig.out[r].size() < 2) continue;
    for (int s = t + 1; s < n; ++s) {
      const int j = by_topo[s];
      if (!reach[r][j]) continue;
      std::vector<bool> in_region(n, false);
      std::vector<int> region;
      for (int s2 = t + 1; s2 < s; ++s2) {
        const int x = by_topo[s2];
        if (reach[r][x] && reach[x][j]) {
          in_region[x] = true;
          region.push_back(x);
        }
      }
      auto inside_or = [&](int x, int extra) { return x == extra || in_region[x]; };
      bool closed = std::all_of(ig.out[r].begin(), ig.out[r].end(),
                                [&](int x) { return inside_or(x, j); }) &&
                    std::all_of(ig.in[j].begin(), ig.in[j].end(),
                                [&](int x) { return inside_or(x, r); });
      for (int x : region) {
        if (!closed) break;
        closed = std::all_of(ig.in[x].begin(), ig.in[x].end(),
                             [&](int y) { return inside_or(y, r); }) &&
                 std::all_of(ig.out[x].begin(), ig.out[x].end(),
                             [&](int y) { return inside_or(y, j); });
      }
      if (!closed) continue;
      if (!hop_entered[j]) {
        next[r] = j;
        interior[r] = region;
        hop_entered[j] = true;
      }
      break;
    }
  }

  for (int u = 0; u < n; ++u) {
    if (next[u] >= 0 || ig.out[u].size() != 1) continue;
    const int v = ig.out[u][0];
    if (ig.in[v].size() == 1 && !hop_entered[v]) next[u] = v;
  }
  std::vector<bool> has_prev(n, false);
  for (int u = 0; u < n; ++u)
    if (next[u] >= 0) has_prev[next[u]] = true;

  std::vector<Run> runs;
  for (int u = 0; u < n; ++u) {
    if (has_prev[u] || next[u] < 0) continue;
    Run run;
    for (int v = u; v >= 0; v = next[v]) {
      run.nodes.push_back(ig.ids[v]);
      if (next[v] >= 0) {
        std::vector<std::string> ids;
        for (int x : interior[v]) ids.push_back(ig.ids[x]);
        run.hop_interior.push_back(std::move(ids));
      }
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

// ---- detection ---------------------------------------------------------------

std::vector<std::size_t> greedy_occurrences(const std::vector<std::string>& types,
                                            const std::vector<std::string>& pattern) {
  std::vector<std::size_t> starts;
  const std::size_t m = pattern.size();
  if (m == 0) return starts;
  for (std::size_t i = 0; i + m <= types.size();) {
    if (std::equal(pattern.begin(), pattern.end(), types.begin() + static_cast<std::ptrdiff_t>(i))) {
      starts.push_back(i);
      i += m;
    } else {
      ++i;
    }
  }
  return starts;
}

namespace {

std::vector<std::string> run_types(const NetworkGraph& g, const Run& run) {
  std::vector<std::string> types;
  for (const auto& id : run.nodes) types.push_back(g.node(id).layer_type);
  return types;
}

int occurrence_size(const Run& run, std::size_t start, std::size_t length) {
  int size = static_cast<int>(length);
  for (std::size_t k = start; k + 1 < start + length; ++k)
    size += static_cast<int>(run.hop_interior[k].size());
  return size;
}

}  // namespace

std::optional<Candidate> detect_auto_aggregation(const NetworkGraph& graph) {
  const auto runs = aggregation_runs(graph);
  std::vector<std::vector<std::string>> types;
  for (const auto& r : runs) types.push_back(run_types(graph, r));

  std::set<std::vector<std::string>> candidates;
  for (const auto& t : types)
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t len = 2; i + len <= t.size(); ++len)
        candidates.emplace(t.begin() + static_cast<std::ptrdiff_t>(i),
                           t.begin() + static_cast<std::ptrdiff_t>(i + len));

  std::optional<Candidate> best;
  // std::set iterates in lexicographic order, so strict comparisons keep the
  // smallest tuple among equals.
  for (const auto& seq : candidates) {
    Candidate c{seq, 0, 0};
    for (std::size_t r = 0; r < runs.size(); ++r) {
      for (auto start : greedy_occurrences(types[r], seq)) {
        ++c.count;
        c.covered += occurrence_size(runs[r], start, seq.size());
      }
    }
    if (!best || c.count > best->count ||
        (c.count == best->count && c.covered > best->covered))
      best = std::move(c);
  }
  if (!best || best->count < 2) return std::nullopt;
  return best;
}

// ---- application -------------------------------------------------------------

namespace {

struct Occurrence {
  std::vector<std::string> members;
  std::string entry;
  std::string exit;
};

std::optional<Occurrence> first_occurrence(const NetworkGraph& g,
                                           const std::vector<std::string>& pattern) {
  for (const auto& run : aggregation_runs(g)) {
    const auto starts = greedy_occurrences(run_types(g, run), pattern);
    if (starts.empty()) continue;
    const std::size_t s = starts.front();
    Occurrence occ;
    occ.entry = run.nodes[s];
    occ.exit = run.nodes[s + pattern.size() - 1];
    for (std::size_t k = s; k < s + pattern.size(); ++k) {
      occ.members.push_back(run.nodes[k]);
      if (k + 1 < s + pattern.size())
        occ.members.insert(occ.members.end(), run.hop_interior[k].begin(),
                           run.hop_interior[k].end());
    }
    return occ;
  }
  return std::nullopt;
}

std::string fresh_id(const NetworkGraph& g, const AggregatedGraph& ag, const std::string& base) {
  for (int k = 1;; ++k) {
    std::string id = base + "_" + std::to_string(k);
    if (!g.contains(id) && !ag.aggregates.count(id)) return id;
  }
}

/// Rebuilds `g` with the nodes in `remove` replaced by `replacement`, placed
/// where the first removed node sat.
NetworkGraph splice_nodes(const NetworkGraph& g, const std::set<std::string>& remove,
                          const std::vector<LayerNode>& replacement) {
  NetworkGraph out;
  bool placed = false;
  for (const auto& n : g.nodes()) {
    if (!remove.count(n.id)) {
      out.add_node(n);
      continue;
    }
    if (!placed) {
      for (const auto& r : replacement) out.add_node(r);
      placed = true;
    }
  }
  return out;
}

void replace_id(std::vector<std::string>& ids, const std::set<std::string>& from,
                const std::string& to) {
  std::vector<std::string> out;
  for (const auto& id : ids) {
    const std::string& v = from.count(id) ? to : id;
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  ids = std::move(out);
}

}  // namespace

AggregatedGraph apply_aggregations(const NetworkGraph& graph, const AggregationState& state) {
  AggregatedGraph ag{graph, {}};
  for (const auto& def_id : state.dependency_order()) {
    const auto& def = state.def(def_id);
    if (!def.active) continue;
    while (auto occ = first_occurrence(ag.graph, def.sequence)) {
      NetworkGraph& g = ag.graph;
      const std::set<std::string> members(occ->members.begin(), occ->members.end());

      AggregateInfo info;
      info.def_id = def.id;
      info.entry = occ->entry;
      info.exit = occ->exit;
      for (const auto& n : g.nodes())
        if (members.count(n.id)) info.members.push_back(n);

      LayerNode agg;
      agg.id = fresh_id(g, ag, def.id);
      agg.layer_type = def.id;
      agg.display_name = def.name;
      agg.in_shape = g.node(occ->entry).in_shape;
      agg.out_shape = g.node(occ->exit).out_shape;

      std::vector<Edge> edges;
      for (const auto& e : g.edges) {
        const bool from_in = members.count(e.first) != 0;
        const bool to_in = members.count(e.second) != 0;
        if (from_in && to_in) {
          info.internal_edges.push_back(e);
        } else if (to_in) {
          edges.emplace_back(e.first, agg.id);
        } else if (from_in) {
          edges.emplace_back(agg.id, e.second);
        } else {
          edges.push_back(e);
        }
      }
      NetworkGraph next = splice_nodes(g, members, {agg});
      next.edges = std::move(edges);
      next.inputs = g.inputs;
      next.outputs = g.outputs;
      replace_id(next.inputs, members, agg.id);
      replace_id(next.outputs, members, agg.id);
      ag.aggregates.emplace(agg.id, std::move(info));
      g = std::move(next);
    }
  }
  return ag;
}

NetworkGraph expand_aggregates(const AggregatedGraph& aggregated) {
  NetworkGraph g = aggregated.graph;
  for (;;) {
    auto it = std::find_if(g.nodes().begin(), g.nodes().end(),
                           [&](const LayerNode& n) { return aggregated.is_aggregate(n.id); });
    if (it == g.nodes().end()) return g;
    const std::string id = it->id;
    const auto& info = aggregated.aggregates.at(id);

    std::vector<Edge> edges;
    for (const auto& e : g.edges) {
      if (e.second == id) {
        edges.emplace_back(e.first, info.entry);
      } else if (e.first == id) {
        edges.emplace_back(info.exit, e.second);
      } else {
        edges.push_back(e);
      }
    }
    edges.insert(edges.end(), info.internal_edges.begin(), info.internal_edges.end());
    NetworkGraph next = splice_nodes(g, {id}, info.members);
    next.edges = std::move(edges);
    next.inputs = g.inputs;
    next.outputs = g.outputs;
    std::replace(next.inputs.begin(), next.inputs.end(), id, info.entry);
    std::replace(next.outputs.begin(), next.outputs.end(), id, info.exit);
    g = std::move(next);
  }
}

AggregationState auto_aggregate(const NetworkGraph& graph, AggregationState state, int rounds) {
  for (int round = 0; round < rounds; ++round) {
    const auto current = apply_aggregations(graph, state);
    const auto found = detect_auto_aggregation(current.graph);
    if (!found) break;
    int k = 1;
    while (state.contains("auto_" + std::to_string(k))) ++k;
    AggregationDef def;
    def.id = "auto_" + std::to_string(k);
    def.name = "Block " + std::to_string(k);
    def.sequence = found->sequence;
    state = state.add(std::move(def));
  }
  return state;
}

}  // namespace archviz
