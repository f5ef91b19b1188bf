#include "archviz/layout.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "archviz/error.hpp"

namespace archviz {

namespace {

// Network simplex on one connected component (Gansner et al. 1993).
class Simplex {
 public:
  Simplex(int n, std::vector<RankEdge> edges) : n_(n), edges_(std::move(edges)), rank_(n, 0) {}

  std::vector<int> solve() {
    init_rank();
    feasible_tree();
    const std::size_t limit = 64 * (edges_.size() + 1) * static_cast<std::size_t>(n_ + 1);
    std::size_t start = 0;
    for (std::size_t iter = 0; iter < limit; ++iter) {
      compute_cut_values();
      const int leave = leave_edge(start);
      if (leave < 0) break;
      start = static_cast<std::size_t>(leave) + 1;
      exchange(leave, enter_edge(leave));
    }
    const int lo = *std::min_element(rank_.begin(), rank_.end());
    for (int& r : rank_) r -= lo;
    return rank_;
  }

 private:
  int n_;
  std::vector<RankEdge> edges_;
  std::vector<int> rank_;
  std::vector<bool> tree_;
  std::vector<int> cut_;
  std::vector<int> lim_, low_, parent_edge_;

  int slack(const RankEdge& e) const { return rank_[e.head] - rank_[e.tail] - 1; }

  void init_rank() {
    std::vector<int> indeg(n_, 0);
    std::vector<std::vector<int>> out(n_);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      ++indeg[edges_[i].head];
      out[edges_[i].tail].push_back(static_cast<int>(i));
    }
    std::vector<int> queue;
    for (int v = 0; v < n_; ++v)
      if (indeg[v] == 0) queue.push_back(v);
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const int u = queue[q];
      for (int ei : out[u]) {
        const int v = edges_[ei].head;
        rank_[v] = std::max(rank_[v], rank_[u] + 1);
        if (--indeg[v] == 0) queue.push_back(v);
      }
    }
  }

  void feasible_tree() {
    tree_.assign(edges_.size(), false);
    std::vector<bool> in_tree(n_, false);
    in_tree[0] = true;
    int size = 1;
    while (size < n_) {
      bool grown = true;
      while (grown) {
        grown = false;
        for (std::size_t i = 0; i < edges_.size(); ++i) {
          const auto& e = edges_[i];
          if (tree_[i] || in_tree[e.tail] == in_tree[e.head] || slack(e) != 0) continue;
          tree_[i] = true;
          in_tree[e.tail] = in_tree[e.head] = true;
          ++size;
          grown = true;
        }
      }
      if (size == n_) break;
      int best = -1;
      for (std::size_t i = 0; i < edges_.size(); ++i) {
        const auto& e = edges_[i];
        if (in_tree[e.tail] == in_tree[e.head]) continue;
        if (best < 0 || slack(e) < slack(edges_[best])) best = static_cast<int>(i);
      }
      const auto& e = edges_[best];
      const int delta = in_tree[e.tail] ? slack(e) : -slack(e);
      for (int v = 0; v < n_; ++v)
        if (in_tree[v]) rank_[v] += delta;
    }
  }

  // Postorder numbering of the tree rooted at node 0: node x lies in the
  // subtree of c iff low[c] <= lim[x] <= lim[c].
  void number_tree() {
    std::vector<std::vector<int>> adj(n_);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (!tree_[i]) continue;
      adj[edges_[i].tail].push_back(static_cast<int>(i));
      adj[edges_[i].head].push_back(static_cast<int>(i));
    }
    lim_.assign(n_, -1);
    low_.assign(n_, 0);
    parent_edge_.assign(n_, -1);
    int counter = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    std::vector<bool> seen(n_, false);
    seen[0] = true;
    low_[0] = 0;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == 0) low_[v] = counter;
      if (next < adj[v].size()) {
        const int ei = adj[v][next++];
        const int w = edges_[ei].tail == v ? edges_[ei].head : edges_[ei].tail;
        if (seen[w]) continue;
        seen[w] = true;
        parent_edge_[w] = ei;
        stack.emplace_back(w, 0);
        continue;
      }
      lim_[v] = counter++;
      stack.pop_back();
    }
  }

  int child_of(int tree_edge) const {
    const auto& e = edges_[tree_edge];
    return parent_edge_[e.tail] == tree_edge ? e.tail : e.head;
  }

  bool in_subtree(int c, int x) const { return low_[c] <= lim_[x] && lim_[x] <= lim_[c]; }

  void compute_cut_values() {
    number_tree();
    cut_.assign(edges_.size(), 0);
    for (std::size_t t = 0; t < edges_.size(); ++t) {
      if (!tree_[t]) continue;
      const int c = child_of(static_cast<int>(t));
      const bool tail_side_is_sub = edges_[t].tail == c;
      int value = 0;
      for (const auto& f : edges_) {
        const bool a = in_subtree(c, f.tail);
        const bool b = in_subtree(c, f.head);
        if (a == b) continue;
        // Positive when f points from the tail component to the head one.
        const bool tail_to_head = tail_side_is_sub ? a : b;
        value += tail_to_head ? f.weight : -f.weight;
      }
      cut_[t] = value;
    }
  }

  int leave_edge(std::size_t start) const {
    const std::size_t m = edges_.size();
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = (start + k) % m;
      if (tree_[i] && cut_[i] < 0) return static_cast<int>(i);
    }
    return -1;
  }

  int enter_edge(int leave) const {
    const int c = child_of(leave);
    const bool tail_side_is_sub = edges_[leave].tail == c;
    int best = -1;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      if (tree_[i]) continue;
      const auto& f = edges_[i];
      const bool a = in_subtree(c, f.tail);
      const bool b = in_subtree(c, f.head);
      if (a == b) continue;
      const bool head_to_tail = tail_side_is_sub ? b : a;
      if (!head_to_tail) continue;
      if (best < 0 || slack(f) < slack(edges_[best])) best = static_cast<int>(i);
    }
    return best;
  }

  void exchange(int leave, int enter) {
    const int c = child_of(leave);
    const bool tail_side_is_sub = edges_[leave].tail == c;
    const int delta = slack(edges_[enter]);
    for (int v = 0; v < n_; ++v)
      if (in_subtree(c, v) == tail_side_is_sub) rank_[v] -= delta;
    tree_[leave] = false;
    tree_[enter] = true;
  }
};

}  // namespace

std::vector<int> network_simplex(int n, const std::vector<RankEdge>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> out(n);
  for (const auto& e : edges) {
    if (e.tail == e.head) throw CycleError("self loop in ranking graph");
    parent[find(e.tail)] = find(e.head);
    ++indeg[e.head];
    out[e.tail].push_back(e.head);
  }
  {
    std::vector<int> queue;
    for (int v = 0; v < n; ++v)
      if (indeg[v] == 0) queue.push_back(v);
    for (std::size_t q = 0; q < queue.size(); ++q)
      for (int w : out[queue[q]])
        if (--indeg[w] == 0) queue.push_back(w);
    if (static_cast<int>(queue.size()) != n) throw CycleError("ranking graph has a cycle");
  }

  std::vector<int> ranks(n, 0);
  std::map<int, std::vector<int>> components;
  for (int v = 0; v < n; ++v) components[find(v)].push_back(v);
  for (const auto& [root, members] : components) {
    std::vector<int> local(n, -1);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
    std::vector<RankEdge> sub;
    for (const auto& e : edges)
      if (local[e.tail] >= 0) sub.push_back({local[e.tail], local[e.head], e.weight});
    const auto r = Simplex(static_cast<int>(members.size()), std::move(sub)).solve();
    for (std::size_t i = 0; i < members.size(); ++i) ranks[members[i]] = r[i];
  }
  return ranks;
}

std::map<std::string, int> assign_ranks(const NetworkGraph& graph) {
  const IndexedGraph ig(graph);
  std::map<std::pair<int, int>, int> merged;
  for (const auto& [s, d] : graph.edges) ++merged[{ig.index.at(s), ig.index.at(d)}];
  std::vector<RankEdge> edges;
  for (const auto& [key, w] : merged) edges.push_back({key.first, key.second, w});
  const auto r = network_simplex(ig.n(), edges);
  std::map<std::string, int> ranks;
  for (int v = 0; v < ig.n(); ++v) ranks[ig.ids[v]] = r[v];
  return ranks;
}

long total_edge_length(const NetworkGraph& graph, const std::map<std::string, int>& ranks) {
  long total = 0;
  for (const auto& [s, d] : graph.edges) total += ranks.at(d) - ranks.at(s);
  return total;
}

LayeredGraph build_layered(const NetworkGraph& graph, const std::map<std::string, int>& ranks) {
  const IndexedGraph ig(graph);
  LayeredGraph lg;
  lg.real = ig.n();
  for (int v = 0; v < ig.n(); ++v) lg.rank.push_back(ranks.at(ig.ids[v]));
  lg.out.resize(lg.real);
  lg.in.resize(lg.real);
  auto link = [&](int a, int b) {
    lg.out[a].push_back(b);
    lg.in[b].push_back(a);
  };
  for (const auto& [s, d] : graph.edges) {
    const int u = ig.index.at(s);
    const int v = ig.index.at(d);
    std::vector<int> chain;
    int prev = u;
    for (int r = lg.rank[u] + 1; r < lg.rank[v]; ++r) {
      const int id = lg.size();
      lg.rank.push_back(r);
      lg.out.emplace_back();
      lg.in.emplace_back();
      link(prev, id);
      chain.push_back(id);
      prev = id;
    }
    link(prev, v);
    lg.chains.push_back(std::move(chain));
  }
  return lg;
}

long count_crossings(const LayeredGraph& lg) {
  std::vector<int> pos(lg.size(), 0);
  for (const auto& layer : lg.layers)
    for (std::size_t i = 0; i < layer.size(); ++i) pos[layer[i]] = static_cast<int>(i);
  long crossings = 0;
  for (const auto& layer : lg.layers) {
    std::vector<std::pair<int, int>> segs;
    for (int u : layer)
      for (int v : lg.out[u]) segs.emplace_back(pos[u], pos[v]);
    for (std::size_t i = 0; i < segs.size(); ++i)
      for (std::size_t j = i + 1; j < segs.size(); ++j) {
        const auto [a1, b1] = segs[i];
        const auto [a2, b2] = segs[j];
        if ((a1 < a2 && b1 > b2) || (a1 > a2 && b1 < b2)) ++crossings;
      }
  }
  return crossings;
}

namespace {

void sweep(LayeredGraph& lg, bool down) {
  std::vector<double> pos(lg.size(), 0);
  for (const auto& layer : lg.layers)
    for (std::size_t i = 0; i < layer.size(); ++i) pos[layer[i]] = static_cast<double>(i);
  const int ranks = static_cast<int>(lg.layers.size());
  for (int k = 1; k < ranks; ++k) {
    auto& layer = lg.layers[down ? k : ranks - 1 - k];
    std::vector<std::pair<double, int>> keyed;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const auto& nbrs = down ? lg.in[layer[i]] : lg.out[layer[i]];
      double key = static_cast<double>(i);
      if (!nbrs.empty()) {
        double sum = 0;
        for (int w : nbrs) sum += pos[w];
        key = sum / static_cast<double>(nbrs.size());
      }
      keyed.emplace_back(key, layer[i]);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < layer.size(); ++i) {
      layer[i] = keyed[i].second;
      pos[layer[i]] = static_cast<double>(i);
    }
  }
}

}  // namespace

void order_layers(LayeredGraph& lg) {
  const int max_rank = lg.rank.empty() ? -1 : *std::max_element(lg.rank.begin(), lg.rank.end());
  lg.layers.assign(max_rank + 1, {});

  std::vector<bool> seen(lg.size(), false);
  auto dfs = [&](int root) {
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    seen[root] = true;
    lg.layers[lg.rank[root]].push_back(root);
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == lg.out[v].size()) {
        stack.pop_back();
        continue;
      }
      const int w = lg.out[v][next++];
      if (seen[w]) continue;
      seen[w] = true;
      lg.layers[lg.rank[w]].push_back(w);
      stack.emplace_back(w, 0);
    }
  };
  for (int v = 0; v < lg.real; ++v)
    if (lg.in[v].empty() && !seen[v]) dfs(v);
  for (int v = 0; v < lg.size(); ++v)
    if (!seen[v]) dfs(v);

  long best = count_crossings(lg);
  for (int pass = 0; pass < 8 && best > 0; ++pass) {
    for (bool down : {true, false}) {
      LayeredGraph trial = lg;
      sweep(trial, down);
      const long c = count_crossings(trial);
      if (c < best) {
        best = c;
        lg.layers = std::move(trial.layers);
      }
    }
  }
}

std::map<std::string, int> order_within_ranks(const NetworkGraph& graph,
                                              const std::map<std::string, int>& ranks) {
  LayeredGraph lg = build_layered(graph, ranks);
  order_layers(lg);
  std::map<std::string, int> order;
  for (const auto& layer : lg.layers) {
    int k = 0;
    for (int v : layer)
      if (v < lg.real) order[graph.nodes()[v].id] = k++;
  }
  return order;
}

namespace {

/// Weighted least squares z minimizing sum w (z - t)^2 subject to z being
/// nondecreasing (pool adjacent violators).
std::vector<double> isotonic(const std::vector<double>& t, const std::vector<double>& w) {
  struct Block {
    double sum_wt, sum_w;
    std::size_t len;
    double value() const { return sum_wt / sum_w; }
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < t.size(); ++i) {
    blocks.push_back({w[i] * t[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value() >= blocks.back().value()) {
      const Block b = blocks.back();
      blocks.pop_back();
      blocks.back().sum_wt += b.sum_wt;
      blocks.back().sum_w += b.sum_w;
      blocks.back().len += b.len;
    }
  }
  std::vector<double> z;
  for (const auto& b : blocks) z.insert(z.end(), b.len, b.value());
  return z;
}

/// Vertical offsets of every edge's handle centres relative to the node
/// centres. Handles stack in the order of their peers in the adjacent layer.
std::vector<std::pair<double, double>> port_offsets(const LayeredGraph& lg, const NetworkGraph& graph,
                                                    const std::vector<PortLengths>& ports,
                                                    double gap) {
  const std::size_t m = graph.edges.size();
  std::vector<std::pair<double, double>> off(m, {0.0, 0.0});
  if (ports.size() != m) return off;
  std::vector<int> pos(lg.size(), 0);
  for (const auto& layer : lg.layers)
    for (std::size_t i = 0; i < layer.size(); ++i) pos[layer[i]] = static_cast<int>(i);
  const IndexedGraph ig(graph);
  std::vector<std::vector<std::pair<int, int>>> outs(lg.real), ins(lg.real);  // (peer pos, edge)
  for (std::size_t e = 0; e < m; ++e) {
    const int u = ig.index.at(graph.edges[e].first);
    const int v = ig.index.at(graph.edges[e].second);
    const auto& c = lg.chains[e];
    outs[u].emplace_back(pos[c.empty() ? v : c.front()], static_cast<int>(e));
    ins[v].emplace_back(pos[c.empty() ? u : c.back()], static_cast<int>(e));
  }
  auto stack = [&](std::vector<std::pair<int, int>>& side, bool source) {
    std::sort(side.begin(), side.end());
    auto len = [&](int e) { return source ? ports[e].source : ports[e].target; };
    double total = gap * static_cast<double>(side.size() > 0 ? side.size() - 1 : 0);
    for (const auto& [p, e] : side) total += len(e);
    double top = -total / 2;
    for (const auto& [p, e] : side) {
      (source ? off[e].first : off[e].second) = top + len(e) / 2;
      top += len(e) + gap;
    }
  };
  for (int v = 0; v < lg.real; ++v) {
    stack(outs[v], true);
    stack(ins[v], false);
  }
  return off;
}

/// Moves nodes vertically, keeping order and separation, so that connected
/// handles line up. Long-edge slots weigh most so skips run straight.
void straighten(const LayeredGraph& lg, const NetworkGraph& graph,
                const std::function<double(int)>& height, double v_gap,
                const std::vector<PortLengths>& ports, double port_gap, std::vector<double>& y) {
  struct Link {
    int peer;
    double delta;  // wanted y[self] = y[peer] + delta
    double weight;
  };
  std::vector<std::vector<Link>> links(lg.size());
  const auto off = port_offsets(lg, graph, ports, port_gap);
  const IndexedGraph ig(graph);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    std::vector<int> path{ig.index.at(graph.edges[e].first)};
    path.insert(path.end(), lg.chains[e].begin(), lg.chains[e].end());
    path.push_back(ig.index.at(graph.edges[e].second));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const int a = path[i], b = path[i + 1];
      const double oa = i == 0 ? off[e].first : 0;
      const double ob = i + 2 == path.size() ? off[e].second : 0;
      const double w = (a >= lg.real ? 1 : 0) + (b >= lg.real ? 1 : 0);
      const double weight = w == 2 ? 8 : w == 1 ? 2 : 1;
      // y[a] + oa == y[b] + ob
      links[a].push_back({b, ob - oa, weight});
      links[b].push_back({a, oa - ob, weight});
    }
  }
  auto place = [&](const std::vector<int>& layer) {
    std::vector<double> t, w;
    double shift = 0;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const int v = layer[i];
      if (i > 0) shift += (height(layer[i - 1]) + height(v)) / 2 + v_gap;
      double sw = 1e-6, swt = 1e-6 * y[v];
      for (const auto& l : links[v]) {
        sw += l.weight;
        swt += l.weight * (y[l.peer] + l.delta);
      }
      t.push_back(swt / sw - shift);
      w.push_back(sw);
    }
    const auto z = isotonic(t, w);
    shift = 0;
    for (std::size_t i = 0; i < layer.size(); ++i) {
      if (i > 0) shift += (height(layer[i - 1]) + height(layer[i])) / 2 + v_gap;
      y[layer[i]] = z[i] + shift;
    }
  };
  for (int iter = 0; iter < 40; ++iter) {
    for (const auto& layer : lg.layers) place(layer);
    for (auto it = lg.layers.rbegin(); it != lg.layers.rend(); ++it) place(*it);
  }
  // Tidy round-off so equal targets print identically.
  for (double& v : y) v = std::round(v * 1e6) / 1e6;
}

}  // namespace

LayoutResult layout_graph(const NetworkGraph& graph, const std::map<std::string, NodeBox>& boxes,
                          const Spacing& spacing, const std::vector<PortLengths>& ports,
                          double port_gap) {
  LayoutResult result;
  result.rank = assign_ranks(graph);
  LayeredGraph lg = build_layered(graph, result.rank);
  order_layers(lg);

  auto box = [&](int v) {
    if (v >= lg.real) return NodeBox{};
    auto it = boxes.find(graph.nodes()[v].id);
    return it == boxes.end() ? NodeBox{} : it->second;
  };

  const std::size_t ranks = lg.layers.size();
  result.band_width.assign(ranks, 0);
  result.band_left.assign(ranks, 0);
  for (std::size_t r = 0; r < ranks; ++r)
    for (int v : lg.layers[r]) result.band_width[r] = std::max(result.band_width[r], box(v).width);
  for (std::size_t r = 1; r < ranks; ++r)
    result.band_left[r] = result.band_left[r - 1] + result.band_width[r - 1] + spacing.h_gap;

  std::vector<double> y(lg.size(), 0);
  for (std::size_t r = 0; r < ranks; ++r) {
    const auto& layer = lg.layers[r];
    double total = spacing.v_gap * static_cast<double>(layer.size() - 1);
    for (int v : layer) total += box(v).height;
    double cursor = -total / 2;
    for (int v : layer) {
      y[v] = cursor + box(v).height / 2;
      cursor += box(v).height + spacing.v_gap;
    }
  }
  straighten(lg, graph, [&](int v) { return box(v).height; }, spacing.v_gap, ports, port_gap, y);

  for (std::size_t r = 0; r < ranks; ++r) {
    int k = 0;
    for (int v : lg.layers[r]) {
      if (v >= lg.real) continue;
      const auto& id = graph.nodes()[v].id;
      result.order[id] = k++;
      result.x[id] = result.band_left[r] + result.band_width[r] / 2;
      result.y[id] = y[v];
    }
  }
  for (const auto& chain : lg.chains) {
    std::vector<double> lane;
    for (int v : chain) lane.push_back(y[v]);
    result.lanes.push_back(std::move(lane));
  }
  return result;
}

}  // namespace archviz
