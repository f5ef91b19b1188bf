#pragma once

// Brute-force reference implementations used to check the library.

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracles {

/// Minimum of sum (r[v] - r[u]) over edges subject to r[v] >= r[u] + 1, by
/// branch and bound over ranks 0..n-1 in topological order. Nodes must be
/// numbered topologically (every edge goes from a lower to a higher index).
inline long min_total_edge_length(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> preds(n);
  for (auto [u, v] : edges) preds[v].push_back(u);
  std::vector<int> later_edges(n + 1, 0);  // edges whose head index >= i
  for (int i = n - 1; i >= 0; --i)
    later_edges[i] = later_edges[i + 1] + static_cast<int>(preds[i].size());

  std::vector<int> r(n, 0);
  long best = LONG_MAX;
  auto go = [&](auto&& self, int v, long cost) -> void {
    if (cost + later_edges[v] >= best) return;
    if (v == n) {
      best = cost;
      return;
    }
    int lo = 0;
    for (int p : preds[v]) lo = std::max(lo, r[p] + 1);
    for (int rv = lo; rv < n; ++rv) {
      long add = 0;
      for (int p : preds[v]) add += rv - r[p];
      if (cost + add + later_edges[v + 1] >= best) break;  // add grows with rv
      r[v] = rv;
      self(self, v + 1, cost + add);
    }
  };
  go(go, 0, 0);
  return best;
}

/// Greedy non-overlapping occurrence count.
inline int greedy_count(const std::vector<std::string>& seq, const std::vector<std::string>& pat) {
  int count = 0;
  for (std::size_t i = 0; i + pat.size() <= seq.size();) {
    if (std::equal(pat.begin(), pat.end(), seq.begin() + static_cast<long>(i))) {
      ++count;
      i += pat.size();
    } else {
      ++i;
    }
  }
  return count;
}

struct Detection {
  std::vector<std::string> sequence;
  int count = 0;
};

/// Every contiguous subsequence of every chain, scored by (count, length,
/// reverse lexicographic) with no shortcuts.
inline Detection detect(const std::vector<std::vector<std::string>>& chains) {
  Detection best;
  for (const auto& chain : chains)
    for (std::size_t i = 0; i < chain.size(); ++i)
      for (std::size_t j = i + 2; j <= chain.size(); ++j) {
        std::vector<std::string> pat(chain.begin() + static_cast<long>(i),
                                     chain.begin() + static_cast<long>(j));
        int count = 0;
        for (const auto& c : chains) count += greedy_count(c, pat);
        const bool better =
            count > best.count ||
            (count == best.count &&
             (pat.size() > best.sequence.size() ||
              (pat.size() == best.sequence.size() && pat < best.sequence)));
        if (better) best = {pat, count};
      }
  if (best.count < 2) return {};
  return best;
}

inline double circular_distance(double a, double b) {
  const double d = std::fmod(std::fabs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

/// Best achievable minimum circular distance over integer hues 0..359.
inline double maximin_hue_distance(const std::vector<double>& hues) {
  double best = -1;
  for (int h = 0; h < 360; ++h) {
    double nearest = 360;
    for (double e : hues) nearest = std::min(nearest, circular_distance(h, e));
    best = std::max(best, nearest);
  }
  return best;
}

}  // namespace oracles
