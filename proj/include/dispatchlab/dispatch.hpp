#pragma once

// The dispatch "black box": matches active orders to vehicles and prices the
// result. The adaptive-interval machinery only ever sees the returned profit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dispatchlab/orders.hpp"

namespace dispatchlab {

struct PricingModel {
  double base_fare = 6.0;
  double fare_per_cell = 3.0;
  double shared_discount = 0.8;  // applied to each pooled passenger's distance fare
  double driver_pay_per_cell = 2.4;
  double driver_base_pay = 5.0;

  void validate() const {
    if (base_fare < 0 || fare_per_cell < 0 || driver_pay_per_cell < 0 || driver_base_pay < 0) {
      throw std::invalid_argument("pricing parameters must be non-negative");
    }
    if (!(shared_discount > 0.0 && shared_discount <= 1.0)) {
      throw std::invalid_argument("shared_discount must be in (0, 1]");
    }
  }
};

inline double solo_profit(const Order& o, const PricingModel& pm) {
  const int d = o.solo_distance();
  return pm.base_fare + pm.fare_per_cell * d - pm.driver_base_pay - pm.driver_pay_per_cell * d;
}

/// Both passengers pay a discounted distance fare plus the base fare; the driver
/// is paid once for the combined route.
inline double pooled_profit(const Order& a, const Order& b, const CombinedRoute& route,
                            const PricingModel& pm) {
  return pm.shared_discount * pm.fare_per_cell * (a.solo_distance() + b.solo_distance()) +
         2.0 * pm.base_fare - pm.driver_pay_per_cell * route.total - pm.driver_base_pay;
}

enum class AssignmentKind { Solo, Pooled, Insertion };

struct Assignment {
  AssignmentKind kind = AssignmentKind::Solo;
  std::optional<DriverId> driver;  // empty when the engine has no vehicle model
  std::vector<OrderId> orders;     // orders newly assigned by this dispatch
  std::vector<Stop> route;         // the driver's full plan after the assignment
  int paid_cells = 0;              // cells the driver is paid for
  int repriced_cells = 0;          // solo distance of riders moved onto the pooled fare
  double profit = 0.0;

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct DispatchResult {
  std::vector<Assignment> assignments;
  double profit = 0.0;
  std::vector<OrderId> served;    // sorted
  std::vector<OrderId> unserved;  // sorted

  friend bool operator==(const DispatchResult&, const DispatchResult&) = default;
};

/// Sum of per-assignment profits.
inline double profit(const DispatchResult& r) {
  double s = 0.0;
  for (const auto& a : r.assignments) s += a.profit;
  return s;
}

/// Reprices every assignment from its orders and paid distance.
inline double audit_profit(const DispatchResult& r, std::span<const Order> orders, const PricingModel& pm) {
  std::map<OrderId, const Order*> by_id;
  for (const Order& o : orders) by_id[o.id] = &o;
  double total = 0.0;
  for (const auto& a : r.assignments) {
    double revenue = 0.0;
    for (OrderId id : a.orders) {
      const Order& o = *by_id.at(id);
      const double discount = a.kind == AssignmentKind::Solo ? 1.0 : pm.shared_discount;
      revenue += pm.base_fare + discount * pm.fare_per_cell * o.solo_distance();
    }
    const double base = a.kind == AssignmentKind::Insertion ? 0.0 : pm.driver_base_pay;
    revenue -= (1.0 - pm.shared_discount) * pm.fare_per_cell * a.repriced_cells;
    total += revenue - pm.driver_pay_per_cell * a.paid_cells - base;
  }
  return total;
}

struct DispatchInput {
  std::span<const Order> active;
  std::span<const Driver> idle;     // all Idle
  std::span<const Driver> serving;  // considered only for in-trip insertion
};

/// Interface the simulator dispatches through. Implementations are stateless.
class DispatchEngine {
 public:
  virtual ~DispatchEngine() = default;
  virtual DispatchResult dispatch_pre(const DispatchInput& in) const = 0;
  virtual DispatchResult dispatch_in(const DispatchInput& in) const = 0;
  /// False when assignments carry no vehicle (override tables).
  virtual bool uses_drivers() const { return true; }
};

namespace detail {

inline void finalize(DispatchResult& r, std::span<const Order> active) {
  std::set<OrderId> served;
  for (const auto& a : r.assignments) served.insert(a.orders.begin(), a.orders.end());
  r.served.assign(served.begin(), served.end());
  r.unserved.clear();
  for (const Order& o : active) {
    if (!served.count(o.id)) r.unserved.push_back(o.id);
  }
  std::sort(r.unserved.begin(), r.unserved.end());
  r.profit = profit(r);
}

/// Nearest unused driver to `cell`; ties go to the smaller driver id.
inline std::optional<std::size_t> nearest_driver(std::span<const Driver> drivers,
                                                 const std::vector<bool>& used, CellId cell) {
  std::optional<std::size_t> best;
  int best_d = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < drivers.size(); ++i) {
    if (used[i]) continue;
    const int d = hex_distance(drivers[i].location, cell);
    if (d < best_d || (d == best_d && drivers[i].id < drivers[*best].id)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

inline int route_length(CellId start, std::span<const Stop> stops) {
  int len = 0;
  CellId at = start;
  for (const Stop& s : stops) {
    len += hex_distance(at, s.cell);
    at = s.cell;
  }
  return len;
}

inline std::vector<std::size_t> by_solo_profit(std::span<const Order> active, const std::vector<double>& solo,
                                               const std::vector<bool>& assigned) {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (!assigned[i]) rest.push_back(i);
  }
  std::sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    if (solo[a] != solo[b]) return solo[a] > solo[b];
    return active[a].id < active[b].id;
  });
  return rest;
}

struct Insertion {
  std::vector<Stop> plan;
  int added_cells = 0;
  int repriced_cells = 0;
  double score = 0.0;
};

/// Best splice of `o` into `d`'s remaining plan that keeps every rider's detour
/// within bounds.
inline std::optional<Insertion> best_insertion(const Driver& d, const Order& o, const PricingModel& pm,
                                               const ShareabilityParams& sp) {
  const int k = static_cast<int>(d.plan.size());
  const int old_len = route_length(d.location, d.plan);
  const double budget_o = (1.0 + sp.max_detour_frac) * o.solo_distance() + 1e-9;
  int repriced = 0;
  for (const Passenger& p : d.riders) {
    if (!p.shared) repriced += p.solo;
  }
  std::optional<Insertion> best;
  std::vector<Stop> plan;
  for (int i = 0; i <= k; ++i) {
    for (int j = i; j <= k; ++j) {
      plan.clear();
      plan.insert(plan.end(), d.plan.begin(), d.plan.begin() + i);
      plan.push_back({o.origin, StopAction::Pickup, o.id});
      plan.insert(plan.end(), d.plan.begin() + i, d.plan.begin() + j);
      plan.push_back({o.dest, StopAction::Dropoff, o.id});
      plan.insert(plan.end(), d.plan.begin() + j, d.plan.end());

      // Cumulative distance at each stop.
      std::vector<int> at(plan.size());
      int run = 0;
      CellId cur = d.location;
      for (std::size_t s = 0; s < plan.size(); ++s) {
        run += hex_distance(cur, plan[s].cell);
        cur = plan[s].cell;
        at[s] = run;
      }
      const int new_len = run;
      auto stop_index = [&](OrderId id, StopAction act) -> int {
        for (std::size_t s = 0; s < plan.size(); ++s) {
          if (plan[s].order == id && plan[s].action == act) return static_cast<int>(s);
        }
        return -1;
      };
      bool ok = at[stop_index(o.id, StopAction::Dropoff)] - at[stop_index(o.id, StopAction::Pickup)] <= budget_o;
      for (const Passenger& p : d.riders) {
        if (!ok) break;
        const double budget = (1.0 + sp.max_detour_frac) * p.solo + 1e-9;
        const int drop = at[stop_index(p.order, StopAction::Dropoff)];
        const int ride = p.picked ? p.ridden + drop : drop - at[stop_index(p.order, StopAction::Pickup)];
        ok = ride <= budget;
      }
      if (!ok) continue;
      const int added = new_len - old_len;
      const double score = pm.base_fare + pm.shared_discount * pm.fare_per_cell * o.solo_distance() -
                           (1.0 - pm.shared_discount) * pm.fare_per_cell * repriced -
                           pm.driver_pay_per_cell * added;
      if (!best || score > best->score) best = Insertion{plan, added, repriced, score};
    }
  }
  return best;
}

}  // namespace detail

/// Greedy pre-trip matcher: pooled pairs by descending profit, then solos.
inline DispatchResult dispatch_pre(std::span<const Order> active, std::span<const Driver> idle,
                                   const PricingModel& pm, const ShareabilityParams& sp) {
  DispatchResult r;
  const std::size_t n = active.size();
  std::vector<double> solo(n);
  for (std::size_t i = 0; i < n; ++i) solo[i] = solo_profit(active[i], pm);

  struct PairCandidate {
    double score;
    OrderId lo, hi;
    std::size_t i, j;
    CombinedRoute route;
  };
  std::vector<PairCandidate> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      auto route = best_shared_route(active[i], active[j], sp);
      if (!route) continue;
      const double score = pooled_profit(active[i], active[j], *route, pm);
      if (score <= std::max(solo[i], solo[j])) continue;
      const OrderId a = active[i].id;
      const OrderId b = active[j].id;
      pairs.push_back({score, std::min(a, b), std::max(a, b), i, j, *route});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const PairCandidate& x, const PairCandidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.lo != y.lo) return x.lo < y.lo;
    return x.hi < y.hi;
  });

  std::vector<bool> assigned(n, false);
  std::vector<bool> used(idle.size(), false);
  for (const auto& c : pairs) {
    if (assigned[c.i] || assigned[c.j]) continue;
    auto d = detail::nearest_driver(idle, used, c.route.stops[0].cell);
    if (!d) break;
    used[*d] = true;
    assigned[c.i] = assigned[c.j] = true;
    r.assignments.push_back({AssignmentKind::Pooled, idle[*d].id, {active[c.i].id, active[c.j].id},
                             {c.route.stops.begin(), c.route.stops.end()}, c.route.total, 0, c.score});
  }
  for (std::size_t i : detail::by_solo_profit(active, solo, assigned)) {
    if (solo[i] <= 0) break;
    auto d = detail::nearest_driver(idle, used, active[i].origin);
    if (!d) break;
    used[*d] = true;
    assigned[i] = true;
    const Order& o = active[i];
    r.assignments.push_back({AssignmentKind::Solo, idle[*d].id, {o.id},
                             {{o.origin, StopAction::Pickup, o.id}, {o.dest, StopAction::Dropoff, o.id}},
                             o.solo_distance(), 0, solo[i]});
  }
  detail::finalize(r, active);
  return r;
}

/// Pre-trip matching, then splicing orders into serving vehicles with room.
/// A solo assignment is replaced by an insertion only when that earns more, and
/// any driver freed that way is offered to the orders still waiting, so the
/// result never earns less than `dispatch_pre` on the same input.
inline DispatchResult dispatch_in(std::span<const Order> active, std::span<const Driver> idle,
                                  std::span<const Driver> serving, const PricingModel& pm,
                                  const ShareabilityParams& sp) {
  DispatchResult r = dispatch_pre(active, idle, pm, sp);
  if (serving.empty()) return r;

  std::map<OrderId, std::size_t> index_of;
  for (std::size_t i = 0; i < active.size(); ++i) index_of[active[i].id] = i;
  // Solo assignment position per order, if any.
  std::map<OrderId, std::size_t> solo_slot;
  for (std::size_t a = 0; a < r.assignments.size(); ++a) {
    if (r.assignments[a].kind == AssignmentKind::Solo) solo_slot[r.assignments[a].orders[0]] = a;
  }
  const std::set<OrderId> unserved(r.unserved.begin(), r.unserved.end());

  struct Candidate {
    double score;
    OrderId order;
    std::size_t driver;
    detail::Insertion ins;
  };
  std::vector<Candidate> cands;
  for (const Order& o : active) {
    const bool open = unserved.count(o.id) > 0;
    auto slot = solo_slot.find(o.id);
    if (!open && slot == solo_slot.end()) continue;
    const double floor = open ? 0.0 : r.assignments[slot->second].profit;
    for (std::size_t d = 0; d < serving.size(); ++d) {
      const Driver& drv = serving[d];
      if (!drv.has_room() || drv.plan.empty()) continue;
      if (hex_distance(drv.location, o.origin) > sp.max_copickup_cells) continue;
      auto ins = detail::best_insertion(drv, o, pm, sp);
      if (ins && ins->score > floor) cands.push_back({ins->score, o.id, d, std::move(*ins)});
    }
  }
  if (cands.empty()) return r;
  std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
    if (x.score != y.score) return x.score > y.score;
    if (x.order != y.order) return x.order < y.order;
    return serving[x.driver].id < serving[y.driver].id;
  });

  std::set<OrderId> inserted;
  std::vector<bool> driver_taken(serving.size(), false);
  std::vector<bool> drop_assignment(r.assignments.size(), false);
  std::vector<Assignment> added;
  for (auto& c : cands) {
    if (inserted.count(c.order) || driver_taken[c.driver]) continue;
    inserted.insert(c.order);
    driver_taken[c.driver] = true;
    if (auto slot = solo_slot.find(c.order); slot != solo_slot.end()) drop_assignment[slot->second] = true;
    added.push_back({AssignmentKind::Insertion, serving[c.driver].id, {c.order}, std::move(c.ins.plan),
                     c.ins.added_cells, c.ins.repriced_cells, c.score});
  }

  std::vector<Assignment> kept;
  std::set<DriverId> busy;
  for (std::size_t a = 0; a < r.assignments.size(); ++a) {
    if (drop_assignment[a]) continue;
    busy.insert(*r.assignments[a].driver);
    kept.push_back(std::move(r.assignments[a]));
  }
  // Offer drivers released from solo duty to the orders still waiting.
  std::vector<bool> used(idle.size(), false);
  for (std::size_t i = 0; i < idle.size(); ++i) used[i] = busy.count(idle[i].id) > 0;
  std::vector<bool> assigned(active.size(), true);
  std::vector<double> solo(active.size(), 0.0);
  for (OrderId id : r.unserved) {
    if (inserted.count(id)) continue;
    const std::size_t i = index_of.at(id);
    assigned[i] = false;
    solo[i] = solo_profit(active[i], pm);
  }
  for (std::size_t i : detail::by_solo_profit(active, solo, assigned)) {
    if (solo[i] <= 0) break;
    auto d = detail::nearest_driver(idle, used, active[i].origin);
    if (!d) break;
    used[*d] = true;
    const Order& o = active[i];
    kept.push_back({AssignmentKind::Solo, idle[*d].id, {o.id},
                    {{o.origin, StopAction::Pickup, o.id}, {o.dest, StopAction::Dropoff, o.id}},
                    o.solo_distance(), 0, solo[i]});
  }
  kept.insert(kept.end(), std::make_move_iterator(added.begin()), std::make_move_iterator(added.end()));
  r.assignments = std::move(kept);
  detail::finalize(r, active);
  return r;
}

/// The geometric greedy engine used by the simulator.
class GreedyEngine final : public DispatchEngine {
 public:
  GreedyEngine(PricingModel pm, ShareabilityParams sp) : pm_(pm), sp_(sp) { pm_.validate(); }

  DispatchResult dispatch_pre(const DispatchInput& in) const override {
    return dispatchlab::dispatch_pre(in.active, in.idle, pm_, sp_);
  }
  DispatchResult dispatch_in(const DispatchInput& in) const override {
    return dispatchlab::dispatch_in(in.active, in.idle, in.serving, pm_, sp_);
  }

  const PricingModel& pricing() const { return pm_; }
  const ShareabilityParams& shareability() const { return sp_; }

 private:
  PricingModel pm_;
  ShareabilityParams sp_;
};

/// Explicit profit tables in place of geometry and pricing. Vehicles are
/// unlimited and full after pooling, so in-trip dispatch equals pre-trip.
class TableEngine final : public DispatchEngine {
 public:
  std::map<std::pair<OrderId, OrderId>, double> pair_profit;  // key (lo, hi); presence = shareable
  std::map<OrderId, double> solo_profit;                      // missing = 0

  DispatchResult dispatch_pre(const DispatchInput& in) const override {
    DispatchResult r;
    const auto& active = in.active;
    const std::size_t n = active.size();
    std::vector<double> solo(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = solo_profit.find(active[i].id);
      solo[i] = it == solo_profit.end() ? 0.0 : it->second;
    }
    struct Cand {
      double score;
      OrderId lo, hi;
      std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const OrderId lo = std::min(active[i].id, active[j].id);
        const OrderId hi = std::max(active[i].id, active[j].id);
        auto it = pair_profit.find({lo, hi});
        if (it == pair_profit.end() || it->second <= std::max(solo[i], solo[j])) continue;
        cands.push_back({it->second, lo, hi, i, j});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.score != y.score) return x.score > y.score;
      if (x.lo != y.lo) return x.lo < y.lo;
      return x.hi < y.hi;
    });
    std::vector<bool> assigned(n, false);
    for (const auto& c : cands) {
      if (assigned[c.i] || assigned[c.j]) continue;
      assigned[c.i] = assigned[c.j] = true;
      r.assignments.push_back({AssignmentKind::Pooled, std::nullopt, {c.lo, c.hi}, {}, 0, 0, c.score});
    }
    for (std::size_t i : detail::by_solo_profit(active, solo, assigned)) {
      if (solo[i] <= 0) break;
      r.assignments.push_back({AssignmentKind::Solo, std::nullopt, {active[i].id}, {}, 0, 0, solo[i]});
    }
    detail::finalize(r, active);
    return r;
  }

  DispatchResult dispatch_in(const DispatchInput& in) const override { return dispatch_pre(in); }
  bool uses_drivers() const override { return false; }
};

}  // namespace dispatchlab
