#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <limits>

#include "dispatchlab/orders.hpp"
#include "test_util.hpp"

using namespace dispatchlab;
using testutil::order;

namespace {

// All stop sequences with both pickups before both dropoffs.
struct OracleRoute {
  int total;
  int ride0;
  int ride1;
};

std::vector<OracleRoute> oracle_routes(const Order& a, const Order& b) {
  std::array<int, 4> perm{0, 1, 2, 3};  // 0,1 pickups of a,b; 2,3 dropoffs
  std::vector<OracleRoute> out;
  do {
    if (perm[0] >= 2 || perm[1] >= 2) continue;
    auto at = [&](int s) { return s == 0 ? a.origin : s == 1 ? b.origin : s == 2 ? a.dest : b.dest; };
    int pos[4];
    int run = 0;
    for (int k = 0; k < 4; ++k) {
      if (k > 0) run += hex_distance(at(perm[k - 1]), at(perm[k]));
      pos[perm[k]] = run;
    }
    out.push_back({run, pos[2] - pos[0], pos[3] - pos[1]});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace

TEST(Shareable, DuplicateOrderIsShareable) {
  const Order a = order(1, {0, 0}, {5, -2});
  Order b = a;
  b.id = 2;
  EXPECT_TRUE(shareable(a, b, {}));
  EXPECT_TRUE(shareable(a, a, {}));
}

TEST(Shareable, FarOriginsFailPickupGate) {
  const Order a = order(1, {0, 0}, {20, 0});
  const Order b = order(2, {10, 0}, {20, 0});
  EXPECT_FALSE(shareable(a, b, {0.25, 3}));
}

TEST(Shareable, DetourLimitBinds) {
  // Opposite directions from the same cell.
  const Order a = order(1, {0, 0}, {6, 0});
  const Order b = order(2, {0, 0}, {-6, 0});
  EXPECT_FALSE(shareable(a, b, {0.25, 3}));
  EXPECT_TRUE(shareable(a, b, {2.0, 3}));
}

TEST(Shareable, SymmetricOnRandomPairs) {
  auto orders = testutil::random_orders(11, 400, 6);
  for (std::size_t i = 0; i + 1 < orders.size(); i += 2) {
    for (const ShareabilityParams p : {ShareabilityParams{}, ShareabilityParams{0.5, 4}, ShareabilityParams{0.0, 2}}) {
      ASSERT_EQ(shareable(orders[i], orders[i + 1], p), shareable(orders[i + 1], orders[i], p));
    }
  }
}

TEST(Shareable, MatchesEnumeratedOrderings) {
  auto orders = testutil::random_orders(12, 600, 5);
  const ShareabilityParams p{0.25, 3};
  for (std::size_t i = 0; i + 1 < orders.size(); i += 2) {
    const Order& a = orders[i];
    const Order& b = orders[i + 1];
    bool expect = false;
    if (hex_distance(a.origin, b.origin) <= p.max_copickup_cells) {
      for (const auto& r : oracle_routes(a, b)) {
        if (r.ride0 <= 1.25 * a.solo_distance() + 1e-9 && r.ride1 <= 1.25 * b.solo_distance() + 1e-9) expect = true;
      }
    }
    ASSERT_EQ(shareable(a, b, p), expect);
  }
}

TEST(CombinedRoute, IdenticalOrders) {
  const Order a = order(1, {1, 1}, {4, -3});
  Order b = a;
  b.id = 2;
  const CombinedRoute r = combined_route_distance(a, b);
  EXPECT_EQ(r.total, a.solo_distance());
  EXPECT_EQ(r.detour1, 0);
  EXPECT_EQ(r.detour2, 0);
}

TEST(CombinedRoute, NestedTrip) {
  const CombinedRoute r = combined_route_distance(order(1, {0, 0}, {4, 0}), order(2, {1, 0}, {3, 0}));
  EXPECT_EQ(r.total, 4);
  EXPECT_EQ(r.detour1, 0);
  EXPECT_EQ(r.detour2, 0);
  EXPECT_EQ(r.stops[0].order, 1u);
  EXPECT_EQ(r.stops[3].order, 1u);
}

TEST(CombinedRoute, MinimalOverOrderingsAndBounded) {
  auto orders = testutil::random_orders(13, 1000, 8);
  for (std::size_t i = 0; i + 1 < orders.size(); i += 2) {
    const Order& a = orders[i];
    const Order& b = orders[i + 1];
    const CombinedRoute r = combined_route_distance(a, b);
    int best = std::numeric_limits<int>::max();
    for (const auto& o : oracle_routes(a, b)) best = std::min(best, o.total);
    ASSERT_EQ(r.total, best);
    ASSERT_GE(r.detour1, 0);
    ASSERT_GE(r.detour2, 0);
    const int s1 = a.solo_distance();
    const int s2 = b.solo_distance();
    const int d12 = hex_distance(a.origin, b.origin);
    ASSERT_GE(r.total, std::max(s1, s2));
    ASSERT_LE(r.total, 2 * d12 + std::max(s1, s2) + 2 * std::min(s1, s2));
  }
}

TEST(CombinedRoute, SequentialBoundDoesNotHoldForPooledRoutes) {
  // Both pickups precede both dropoffs, so opposite trips cost more than serving them one by one.
  const Order a = order(1, {0, 0}, {10, 0});
  const Order b = order(2, {0, 0}, {-10, 0});
  const CombinedRoute r = combined_route_distance(a, b);
  EXPECT_EQ(r.total, 30);
  EXPECT_GT(r.total, a.solo_distance() + b.solo_distance() + hex_distance(a.origin, b.origin));
}

TEST(Driver, CapacityAccounting) {
  Driver d = testutil::driver(1, {0, 0});
  EXPECT_TRUE(d.has_room());
  d.riders.push_back({1, 3, 0, true});
  d.riders.push_back({2, 3, 0, false});
  EXPECT_EQ(d.onboard(), 1);
  EXPECT_FALSE(d.has_room());
}
