#pragma once

// Orders, drivers and the pairwise shareability predicate.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "dispatchlab/hexgrid.hpp"

namespace dispatchlab {

using OrderId = std::uint64_t;
using DriverId = std::uint64_t;

struct Order {
  OrderId id = 0;
  CellId origin;
  CellId dest;
  double raise_time = 0.0;         // seconds
  std::optional<double> patience;  // seconds from raise to cancellation if undispatched
  // Copied from the pricing model when the order is created, for audit.
  double fare_per_cell = 0.0;
  double base_fare = 0.0;

  int solo_distance() const { return hex_distance(origin, dest); }

  friend bool operator==(const Order&, const Order&) = default;
};

enum class StopAction { Pickup, Dropoff };

struct Stop {
  CellId cell;
  StopAction action = StopAction::Pickup;
  OrderId order = 0;

  friend bool operator==(const Stop&, const Stop&) = default;
};

/// Ride bookkeeping for an order assigned to a driver.
struct Passenger {
  OrderId order = 0;
  int solo = 0;        // direct distance origin -> dest
  int ridden = 0;      // cells travelled since pickup
  bool picked = false;
  bool shared = false;  // paying the pooled fare

  friend bool operator==(const Passenger&, const Passenger&) = default;
};

enum class DriverStatus { Idle, Serving };

struct Driver {
  DriverId id = 0;
  CellId location;
  DriverStatus status = DriverStatus::Idle;
  int capacity = 2;
  std::vector<Stop> plan;
  std::vector<Passenger> riders;  // every order with a stop still in `plan`
  double progress = 0.0;          // fractional cells accumulated toward the next move

  int assigned() const { return static_cast<int>(riders.size()); }
  int onboard() const {
    return static_cast<int>(std::count_if(riders.begin(), riders.end(),
                                          [](const Passenger& p) { return p.picked; }));
  }
  bool has_room() const { return assigned() < capacity; }

  friend bool operator==(const Driver&, const Driver&) = default;
};

struct ShareabilityParams {
  double max_detour_frac = 0.25;
  int max_copickup_cells = 3;
};

/// A pooled two-order route: two pickups followed by two dropoffs.
struct CombinedRoute {
  int total = 0;    // cells from the first pickup to the last dropoff
  int detour1 = 0;  // extra cells experienced by the first order
  int detour2 = 0;
  std::array<Stop, 4> stops{};
};

namespace detail {

// Each ordering lists (order index, is_dropoff) for the four stops.
inline constexpr std::array<std::array<std::pair<int, bool>, 4>, 4> kPairOrderings{{
    {{{0, false}, {1, false}, {0, true}, {1, true}}},
    {{{0, false}, {1, false}, {1, true}, {0, true}}},
    {{{1, false}, {0, false}, {0, true}, {1, true}}},
    {{{1, false}, {0, false}, {1, true}, {0, true}}},
}};

inline CombinedRoute evaluate_ordering(const Order& a, const Order& b, int which) {
  const std::array<const Order*, 2> o{&a, &b};
  CombinedRoute route;
  std::array<int, 2> picked_at{};
  std::array<int, 2> ride{};
  int travelled = 0;
  for (int k = 0; k < 4; ++k) {
    const auto [idx, drop] = kPairOrderings[which][k];
    const CellId cell = drop ? o[idx]->dest : o[idx]->origin;
    if (k > 0) travelled += hex_distance(route.stops[k - 1].cell, cell);
    route.stops[k] = {cell, drop ? StopAction::Dropoff : StopAction::Pickup, o[idx]->id};
    if (drop) {
      ride[idx] = travelled - picked_at[idx];
    } else {
      picked_at[idx] = travelled;
    }
  }
  route.total = travelled;
  route.detour1 = ride[0] - a.solo_distance();
  route.detour2 = ride[1] - b.solo_distance();
  return route;
}

inline bool within_detour(int detour, int solo, double frac) {
  return detour <= frac * solo + 1e-9;
}

}  // namespace detail

/// Shortest of the four interleaved pickup/dropoff orderings.
/// Ties prefer the smaller total detour, then the earlier ordering.
inline CombinedRoute combined_route_distance(const Order& o1, const Order& o2) {
  CombinedRoute best = detail::evaluate_ordering(o1, o2, 0);
  for (int w = 1; w < 4; ++w) {
    CombinedRoute r = detail::evaluate_ordering(o1, o2, w);
    if (r.total < best.total ||
        (r.total == best.total && r.detour1 + r.detour2 < best.detour1 + best.detour2)) {
      best = r;
    }
  }
  return best;
}

/// Cheapest pooled route that respects both passengers' detour limits, if any.
/// Returns nullopt when the pickups are farther apart than the co-pickup radius.
inline std::optional<CombinedRoute> best_shared_route(const Order& o1, const Order& o2,
                                                      const ShareabilityParams& p) {
  if (hex_distance(o1.origin, o2.origin) > p.max_copickup_cells) return std::nullopt;
  std::optional<CombinedRoute> best;
  for (int w = 0; w < 4; ++w) {
    CombinedRoute r = detail::evaluate_ordering(o1, o2, w);
    if (!detail::within_detour(r.detour1, o1.solo_distance(), p.max_detour_frac) ||
        !detail::within_detour(r.detour2, o2.solo_distance(), p.max_detour_frac)) {
      continue;
    }
    if (!best || r.total < best->total ||
        (r.total == best->total && r.detour1 + r.detour2 < best->detour1 + best->detour2)) {
      best = r;
    }
  }
  return best;
}

inline bool shareable(const Order& o1, const Order& o2, const ShareabilityParams& p) {
  return best_shared_route(o1, o2, p).has_value();
}

}  // namespace dispatchlab
