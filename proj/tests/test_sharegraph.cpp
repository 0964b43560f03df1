#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "dispatchlab/sharegraph.hpp"
#include "test_util.hpp"

using namespace dispatchlab;
using testutil::order;

namespace {

std::map<EdgeKey, std::int64_t> brute_force_weights(const std::vector<Order>& orders, const ShareabilityParams& p) {
  std::map<EdgeKey, std::int64_t> w;
  for (std::size_t i = 0; i < orders.size(); ++i) {
    for (std::size_t j = i + 1; j < orders.size(); ++j) {
      if (orders[i].origin == orders[j].origin) continue;
      if (shareable(orders[i], orders[j], p)) ++w[EdgeKey::of(orders[i].origin, orders[j].origin)];
    }
  }
  return w;
}

struct UnionFind {
  std::map<CellId, CellId> parent;
  CellId find(CellId c) {
    if (!parent.count(c)) parent[c] = c;
    while (!(parent[c] == c)) c = parent[c] = parent[parent[c]];
    return c;
  }
  void unite(CellId a, CellId b) { parent[find(a)] = find(b); }
};

SpatialShareabilityGraph random_graph(std::uint64_t seed, int vertices, double p) {
  rng::Engine e(seed, rng::Tag::Test, 0);
  SpatialShareabilityGraph g;
  for (int i = 0; i < vertices; ++i) g.add_vertex({i, 0});
  for (int i = 0; i < vertices; ++i) {
    for (int j = i + 1; j < vertices; ++j) {
      if (e.uniform() < p) g.add_edge_weight({i, 0}, {j, 0}, 1 + static_cast<std::int64_t>(e.below(20)));
    }
  }
  return g;
}

}  // namespace

TEST(BuildGraph, NinePairsBetweenTwoCells) {
  std::vector<Order> orders;
  for (int i = 0; i < 3; ++i) orders.push_back(order(i + 1, {0, 0}, {6, 0}));
  for (int i = 0; i < 3; ++i) orders.push_back(order(i + 4, {1, 0}, {6, 0}));
  const auto g = build_graph(orders, {});
  EXPECT_EQ(g.vertex_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.weight({0, 0}, {1, 0}), 9);
}

TEST(BuildGraph, NoShareablePairsGivesIsolatedVertices) {
  std::vector<Order> orders{order(1, {0, 0}, {5, 0}), order(2, {20, 0}, {25, 0}), order(3, {-20, 0}, {-25, 0})};
  const auto g = build_graph(orders, {});
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, EmptyInput) { EXPECT_TRUE(build_graph({}, {}).empty()); }

TEST(BuildGraph, SameCellPairsAddNoEdge) {
  std::vector<Order> orders{order(1, {0, 0}, {5, 0}), order(2, {0, 0}, {5, 0})};
  const auto g = build_graph(orders, {});
  EXPECT_EQ(g.vertex_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, MatchesBruteForce) {
  for (int inst = 0; inst < 10; ++inst) {
    const auto orders = testutil::random_orders(100 + inst, 50 + 20 * inst, 4);
    for (const ShareabilityParams p : {ShareabilityParams{}, ShareabilityParams{0.5, 2}}) {
      const auto g = build_graph(orders, p);
      ASSERT_EQ(g.edges(), brute_force_weights(orders, p));
      std::set<CellId> origins;
      for (const auto& o : orders) origins.insert(o.origin);
      ASSERT_EQ(g.vertices(), origins);
    }
  }
}

TEST(BuildGraph, PermutationInvariant) {
  auto orders = testutil::random_orders(7, 200, 4);
  const auto g1 = build_graph(orders, {});
  std::reverse(orders.begin(), orders.end());
  rng::Engine e(8, rng::Tag::Test, 0);
  std::shuffle(orders.begin(), orders.end(), e);
  EXPECT_EQ(build_graph(orders, {}), g1);
}

TEST(SpatialGraph, RejectsBadEdges) {
  SpatialShareabilityGraph g;
  EXPECT_THROW(g.add_edge_weight({0, 0}, {0, 0}, 1), std::invalid_argument);
  EXPECT_THROW(g.add_edge_weight({0, 0}, {1, 0}, 0), std::invalid_argument);
}

TEST(Components, Basic) {
  SpatialShareabilityGraph g;
  g.add_edge_weight({0, 0}, {1, 0}, 2);
  g.add_edge_weight({1, 0}, {2, 0}, 2);
  EXPECT_EQ(connected_components(g).size(), 1u);
  g.add_edge_weight({5, 5}, {6, 5}, 1);
  const auto comps = connected_components(g);
  ASSERT_EQ(comps.size(), 2u);
  EXPECT_EQ(*comps[0].vertices().begin(), (CellId{0, 0}));
  EXPECT_EQ(comps[1].vertex_count(), 2u);
}

TEST(Components, MatchUnionFind) {
  for (int inst = 0; inst < 30; ++inst) {
    const auto g = random_graph(200 + inst, 30, 0.05 + 0.005 * inst);
    UnionFind uf;
    for (const CellId& v : g.vertices()) uf.find(v);
    for (const auto& [k, w] : g.edges()) uf.unite(k.u, k.v);
    std::set<CellId> roots;
    for (const CellId& v : g.vertices()) roots.insert(uf.find(v));
    const auto comps = connected_components(g);
    ASSERT_EQ(comps.size(), roots.size());
    std::size_t vs = 0;
    std::size_t es = 0;
    for (const auto& c : comps) {
      vs += c.vertex_count();
      es += c.edge_count();
      const CellId root = uf.find(*c.vertices().begin());
      for (const CellId& v : c.vertices()) ASSERT_EQ(uf.find(v), root);
    }
    ASSERT_EQ(vs, g.vertex_count());
    ASSERT_EQ(es, g.edge_count());
  }
}

TEST(GraphIo, CsvRoundTrip) {
  const auto orders = testutil::random_orders(31, 300, 5);
  const auto g = build_graph(orders, {});
  std::stringstream ss;
  write_graph_csv(ss, g);
  const auto back = read_graph_csv(ss);
  EXPECT_EQ(back.edges(), g.edges());
}

TEST(GraphIo, CsvErrorsCarryLineNumbers) {
  std::stringstream ss("u_q,u_r,v_q,v_r,weight\n0,0,1,0,3\n0,0,1,x,2\n");
  try {
    read_graph_csv(ss);
    FAIL();
  } catch (const csv::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::stringstream bad_header("a,b\n");
  EXPECT_THROW(read_graph_csv(bad_header), csv::ParseError);
  std::stringstream loop("u_q,u_r,v_q,v_r,weight\n1,1,1,1,3\n");
  EXPECT_THROW(read_graph_csv(loop), csv::ParseError);
}

TEST(GraphIo, DotMentionsEveryEdge) {
  SpatialShareabilityGraph g;
  g.add_edge_weight({0, 0}, {1, 0}, 4);
  std::stringstream ss;
  write_graph_dot(ss, g);
  const std::string s = ss.str();
  EXPECT_NE(s.find("graph shareability"), std::string::npos);
  EXPECT_NE(s.find("\"0,0\" -- \"1,0\" [weight=4"), std::string::npos);
}
