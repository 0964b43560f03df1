#pragma once

// Spatial clustering: per connected component, a maximum spanning tree is cut
// recursively at the edge whose removal lowers the edge-weight variance the
// most, until every piece has variance <= theta.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dispatchlab/sharegraph.hpp"

namespace dispatchlab {

/// Population variance of the weights; 0 for an empty set.
inline double edge_weight_variance(std::span<const std::int64_t> weights) {
  if (weights.empty()) return 0.0;
  __int128 s1 = 0;
  __int128 s2 = 0;
  for (std::int64_t w : weights) {
    s1 += w;
    s2 += static_cast<__int128>(w) * w;
  }
  const auto n = static_cast<__int128>(weights.size());
  // n^2 * sigma is an exact integer.
  const __int128 scaled = n * s2 - s1 * s1;
  return static_cast<double>(static_cast<long double>(scaled) / (static_cast<long double>(n) * n));
}

inline double edge_weight_variance(const SpatialShareabilityGraph& g) {
  std::vector<std::int64_t> w;
  w.reserve(g.edge_count());
  for (const auto& [k, x] : g.edges()) w.push_back(x);
  return edge_weight_variance(w);
}

/// Prim's algorithm from the smallest vertex. Among equal-weight crossing edges
/// the smaller canonical key wins.
inline SpatialShareabilityGraph max_spanning_tree(const SpatialShareabilityGraph& g) {
  if (g.empty()) throw std::invalid_argument("max_spanning_tree: empty graph");
  const auto adj = g.adjacency();
  struct Candidate {
    std::int64_t weight;
    EdgeKey key;
    CellId to;
    bool operator<(const Candidate& o) const {
      // priority_queue pops the largest: heavier first, then smaller key.
      if (weight != o.weight) return weight < o.weight;
      return o.key < key;
    }
  };
  SpatialShareabilityGraph tree;
  std::set<CellId> in_tree;
  std::priority_queue<Candidate> pq;
  auto absorb = [&](CellId c) {
    in_tree.insert(c);
    tree.add_vertex(c);
    for (const auto& [n, w] : adj.at(c)) {
      if (!in_tree.count(n)) pq.push({w, EdgeKey::of(c, n), n});
    }
  };
  absorb(*g.vertices().begin());
  while (!pq.empty()) {
    const Candidate c = pq.top();
    pq.pop();
    if (in_tree.count(c.to)) continue;
    tree.add_edge_weight(c.key.u, c.key.v, c.weight);
    absorb(c.to);
  }
  if (in_tree.size() != g.vertex_count()) {
    throw std::invalid_argument("max_spanning_tree: graph is disconnected");
  }
  return tree;
}

struct ClusterSet {
  std::vector<SpatialShareabilityGraph> clusters;  // ordered by smallest vertex

  std::size_t size() const { return clusters.size(); }

  std::int64_t retained_weight() const {
    std::int64_t s = 0;
    for (const auto& c : clusters) s += c.total_weight();
    return s;
  }

  double max_variance() const {
    double m = 0.0;
    for (const auto& c : clusters) m = std::max(m, edge_weight_variance(c));
    return m;
  }

  /// cell -> index into `clusters`.
  std::unordered_map<CellId, int, CellIdHash> assignment() const {
    std::unordered_map<CellId, int, CellIdHash> out;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (const CellId& c : clusters[i].vertices()) out[c] = static_cast<int>(i);
    }
    return out;
  }
};

struct VarianceReport {
  struct Step {
    int step = 0;
    std::optional<EdgeKey> deleted;  // empty for the initial state
    double max_variance = 0.0;       // over all current pieces after this step
  };
  std::vector<Step> steps;

  /// Steps after which the max variance went up.
  int non_monotone_steps() const {
    int n = 0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
      if (steps[i].max_variance > steps[i - 1].max_variance) ++n;
    }
    return n;
  }
  int deletions() const { return steps.empty() ? 0 : static_cast<int>(steps.size()) - 1; }
};

namespace detail {

struct TreeStats {
  __int128 n = 0;
  __int128 s1 = 0;
  __int128 s2 = 0;
};

inline TreeStats stats_of(const SpatialShareabilityGraph& t) {
  TreeStats s;
  for (const auto& [k, w] : t.edges()) {
    ++s.n;
    s.s1 += w;
    s.s2 += static_cast<__int128>(w) * w;
  }
  return s;
}

inline bool within_bound(const TreeStats& s, double theta) {
  if (s.n == 0) return true;
  const long double scaled = static_cast<long double>(s.n * s.s2 - s.s1 * s.s1);
  return scaled <= static_cast<long double>(theta) * static_cast<long double>(s.n) * static_cast<long double>(s.n);
}

/// Edge whose removal leaves the smallest variance. (n-1)^2 * sigma(E \ {e}) is an
/// exact integer and the denominator is common to every candidate, so the
/// comparison is done in integers; ties go to the smallest key.
inline EdgeKey best_cut(const SpatialShareabilityGraph& t, const TreeStats& s) {
  const __int128 m = s.n - 1;
  std::optional<EdgeKey> best;
  __int128 best_score = 0;
  for (const auto& [k, w] : t.edges()) {
    const __int128 rest1 = s.s1 - w;
    const __int128 rest2 = s.s2 - static_cast<__int128>(w) * w;
    const __int128 score = m == 0 ? 0 : m * rest2 - rest1 * rest1;
    if (!best || score < best_score) {
      best = k;
      best_score = score;
    }
  }
  return *best;
}

/// The two trees left after removing `cut`.
inline std::pair<SpatialShareabilityGraph, SpatialShareabilityGraph> split_tree(
    const SpatialShareabilityGraph& t, const EdgeKey& cut) {
  std::map<CellId, std::vector<std::pair<CellId, std::int64_t>>> adj;
  for (const CellId& v : t.vertices()) adj[v];
  for (const auto& [k, w] : t.edges()) {
    if (k == cut) continue;
    adj[k.u].emplace_back(k.v, w);
    adj[k.v].emplace_back(k.u, w);
  }
  auto grow = [&](CellId root) {
    SpatialShareabilityGraph part;
    std::vector<CellId> stack{root};
    std::set<CellId> seen{root};
    while (!stack.empty()) {
      const CellId c = stack.back();
      stack.pop_back();
      part.add_vertex(c);
      for (const auto& [n, w] : adj[c]) {
        if (c < n) part.add_edge_weight(c, n, w);
        if (seen.insert(n).second) stack.push_back(n);
      }
    }
    return part;
  };
  return {grow(cut.u), grow(cut.v)};
}

inline void sort_clusters(std::vector<SpatialShareabilityGraph>& cs) {
  std::sort(cs.begin(), cs.end(), [](const auto& a, const auto& b) {
    return *a.vertices().begin() < *b.vertices().begin();
  });
}

/// Runs edge deletion over several trees at once, logging the max variance
/// across all current pieces after every deletion.
inline ClusterSet delete_edges(std::vector<SpatialShareabilityGraph> trees, double theta,
                               VarianceReport* report) {
  std::multiset<double> live;  // variance of every current piece
  for (const auto& t : trees) live.insert(edge_weight_variance(t));
  auto current_max = [&] { return live.empty() ? 0.0 : *live.rbegin(); };
  if (report) report->steps.push_back({0, std::nullopt, current_max()});

  ClusterSet out;
  std::vector<SpatialShareabilityGraph> stack(std::make_move_iterator(trees.rbegin()),
                                              std::make_move_iterator(trees.rend()));
  int step = 0;
  while (!stack.empty()) {
    SpatialShareabilityGraph t = std::move(stack.back());
    stack.pop_back();
    const TreeStats s = stats_of(t);
    if (within_bound(s, theta)) {
      out.clusters.push_back(std::move(t));
      continue;
    }
    const EdgeKey cut = best_cut(t, s);
    auto [a, b] = split_tree(t, cut);
    live.erase(live.find(edge_weight_variance(t)));
    live.insert(edge_weight_variance(a));
    live.insert(edge_weight_variance(b));
    if (report) report->steps.push_back({++step, cut, current_max()});
    // Depth-first: the piece holding the smaller vertex is processed next.
    if (*b.vertices().begin() < *a.vertices().begin()) std::swap(a, b);
    stack.push_back(std::move(b));
    stack.push_back(std::move(a));
  }
  sort_clusters(out.clusters);
  return out;
}

}  // namespace detail

/// Recursive variance-bounded edge deletion on one tree.
inline ClusterSet edge_delete(const SpatialShareabilityGraph& tree, double theta) {
  if (tree.empty()) return {};
  if (tree.edge_count() + 1 != tree.vertex_count()) {
    throw std::invalid_argument("edge_delete: input is not a tree");
  }
  return detail::delete_edges({tree}, theta, nullptr);
}

struct ClusteringResult {
  ClusterSet clusters;
  VarianceReport report;
};

/// Full clustering: maximum spanning forest, then edge deletion per tree.
inline ClusteringResult spatial_clustering(const SpatialShareabilityGraph& g, double theta) {
  if (theta < 0) throw std::invalid_argument("spatial_clustering: theta must be >= 0");
  std::vector<SpatialShareabilityGraph> forest;
  for (const auto& comp : connected_components(g)) forest.push_back(max_spanning_tree(comp));
  ClusteringResult r;
  r.clusters = detail::delete_edges(std::move(forest), theta, &r.report);
  return r;
}

}  // namespace dispatchlab
