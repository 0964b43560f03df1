#pragma once

// Spatial shareability graph: cells as vertices, edge weight = number of
// shareable order pairs whose origins lie in the two cells.

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dispatchlab/csv.hpp"
#include "dispatchlab/orders.hpp"

namespace dispatchlab {

/// Canonical undirected edge key, u < v.
struct EdgeKey {
  CellId u;
  CellId v;

  static EdgeKey of(CellId a, CellId b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }
  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct WeightedEdge {
  EdgeKey key;
  std::int64_t weight = 0;

  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

class SpatialShareabilityGraph {
 public:
  SpatialShareabilityGraph() = default;

  void add_vertex(CellId c) { vertices_.insert(c); }

  /// Adds `weight` to edge (a, b). Self-loops and non-positive weights are rejected.
  void add_edge_weight(CellId a, CellId b, std::int64_t weight) {
    if (a == b) throw std::invalid_argument("shareability graph has no self-loops");
    if (weight <= 0) throw std::invalid_argument("edge weight must be positive");
    vertices_.insert(a);
    vertices_.insert(b);
    edges_[EdgeKey::of(a, b)] += weight;
  }

  const std::set<CellId>& vertices() const { return vertices_; }
  const std::map<EdgeKey, std::int64_t>& edges() const { return edges_; }

  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return vertices_.empty(); }

  std::int64_t weight(CellId a, CellId b) const {
    auto it = edges_.find(EdgeKey::of(a, b));
    return it == edges_.end() ? 0 : it->second;
  }

  std::int64_t total_weight() const {
    std::int64_t s = 0;
    for (const auto& [k, w] : edges_) s += w;
    return s;
  }

  std::vector<WeightedEdge> edge_list() const {
    std::vector<WeightedEdge> out;
    out.reserve(edges_.size());
    for (const auto& [k, w] : edges_) out.push_back({k, w});
    return out;
  }

  /// Adjacency lists with neighbours in CellId order.
  std::map<CellId, std::vector<std::pair<CellId, std::int64_t>>> adjacency() const {
    std::map<CellId, std::vector<std::pair<CellId, std::int64_t>>> adj;
    for (const CellId& v : vertices_) adj[v];
    for (const auto& [k, w] : edges_) {
      adj[k.u].emplace_back(k.v, w);
      adj[k.v].emplace_back(k.u, w);
    }
    for (auto& [v, list] : adj) std::sort(list.begin(), list.end());
    return adj;
  }

  friend bool operator==(const SpatialShareabilityGraph&, const SpatialShareabilityGraph&) = default;

 private:
  std::set<CellId> vertices_;
  std::map<EdgeKey, std::int64_t> edges_;
};

/// Builds the graph from one period's orders. Pairs within one cell add no edge.
inline SpatialShareabilityGraph build_graph(std::span<const Order> orders, const ShareabilityParams& p) {
  SpatialShareabilityGraph g;
  std::map<CellId, std::vector<const Order*>> by_cell;
  for (const Order& o : orders) {
    g.add_vertex(o.origin);
    by_cell[o.origin].push_back(&o);
  }
  // Gate (a) of the predicate bounds origin separation, so only nearby cells can pair.
  for (const auto& [u, us] : by_cell) {
    for (const CellId& v : disk(u, p.max_copickup_cells)) {
      if (!(u < v)) continue;
      auto it = by_cell.find(v);
      if (it == by_cell.end()) continue;
      std::int64_t count = 0;
      for (const Order* a : us) {
        for (const Order* b : it->second) {
          if (shareable(*a, *b, p)) ++count;
        }
      }
      if (count > 0) g.add_edge_weight(u, v, count);
    }
  }
  return g;
}

/// Connected components, ordered by their smallest vertex.
inline std::vector<SpatialShareabilityGraph> connected_components(const SpatialShareabilityGraph& g) {
  const auto adj = g.adjacency();
  std::set<CellId> seen;
  std::vector<SpatialShareabilityGraph> out;
  for (const CellId& start : g.vertices()) {
    if (seen.count(start)) continue;
    SpatialShareabilityGraph comp;
    std::queue<CellId> frontier;
    frontier.push(start);
    seen.insert(start);
    while (!frontier.empty()) {
      const CellId c = frontier.front();
      frontier.pop();
      comp.add_vertex(c);
      for (const auto& [n, w] : adj.at(c)) {
        if (c < n) comp.add_edge_weight(c, n, w);
        if (seen.insert(n).second) frontier.push(n);
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

// ---- export / import ----------------------------------------------------

inline void write_graph_csv(std::ostream& os, const SpatialShareabilityGraph& g) {
  os << "u_q,u_r,v_q,v_r,weight\n";
  for (const auto& [k, w] : g.edges()) {
    os << k.u.q << ',' << k.u.r << ',' << k.v.q << ',' << k.v.r << ',' << w << '\n';
  }
}

inline void write_graph_dot(std::ostream& os, const SpatialShareabilityGraph& g) {
  auto name = [](CellId c) { return "\"" + std::to_string(c.q) + "," + std::to_string(c.r) + "\""; };
  os << "graph shareability {\n";
  for (const CellId& v : g.vertices()) os << "  " << name(v) << ";\n";
  for (const auto& [k, w] : g.edges()) {
    os << "  " << name(k.u) << " -- " << name(k.v) << " [weight=" << w << ", label=" << w << "];\n";
  }
  os << "}\n";
}

inline SpatialShareabilityGraph read_graph_csv(std::istream& in) {
  csv::Reader reader(in, "u_q,u_r,v_q,v_r,weight");
  SpatialShareabilityGraph g;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const std::size_t line = reader.line();
    const CellId u{csv::parse_number<int>(f[0], line, "u_q"), csv::parse_number<int>(f[1], line, "u_r")};
    const CellId v{csv::parse_number<int>(f[2], line, "v_q"), csv::parse_number<int>(f[3], line, "v_r")};
    const auto w = csv::parse_number<std::int64_t>(f[4], line, "weight");
    if (u == v) throw csv::ParseError(line, "self-loop edge");
    if (w <= 0) throw csv::ParseError(line, "edge weight must be positive");
    g.add_edge_weight(u, v, w);
  }
  return g;
}

}  // namespace dispatchlab
