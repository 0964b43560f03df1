#pragma once

// Hard inputs for online dispatching-time policies and a brute-force offline
// optimum over decision vectors.

#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispatchlab/dispatch.hpp"
#include "dispatchlab/simulator.hpp"

namespace dispatchlab {

/// Everything needed to replay a small experiment under any decision rule.
struct Scenario {
  SimConfig config;
  World world;
  CancellationModel cancel;
  std::shared_ptr<const DispatchEngine> engine;
  std::shared_ptr<const ValueTables> tables;  // only for bi_pre
};

/// Orders with exact timings plus explicit profit tables standing in for geometry.
struct AdversarialInstance {
  std::vector<Order> orders;
  std::shared_ptr<TableEngine> engine = std::make_shared<TableEngine>();
  int horizon_units = 1;
  double delta_t = 1.0;
};

/// One order raised in unit 1 and canceled during unit 2.
inline AdversarialInstance gen_single_cancel_instance(double profit_r, int horizon_units = 4, double delta_t = 1.0) {
  if (!(profit_r > 0)) throw std::invalid_argument("profit_r must be positive");
  if (horizon_units < 2) throw std::invalid_argument("horizon must cover the cancellation unit");
  AdversarialInstance inst;
  inst.horizon_units = horizon_units;
  inst.delta_t = delta_t;
  Order r;
  r.id = 1;
  r.raise_time = 0.5 * delta_t;
  r.patience = delta_t;
  inst.orders.push_back(r);
  inst.engine->solo_profit[r.id] = profit_r;
  return inst;
}

/// X_1..X_n: r_0 (id 0) raised in unit 1 and shareable with every r_k (id k,
/// raised in unit k); the r_k are mutually unshareable and never cancel. In X_i
/// r_0 cancels during unit i+1. Solo profits are zero.
inline std::vector<AdversarialInstance> gen_distribution_X(int n, std::span<const double> profits,
                                                           double delta_t = 1.0) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (profits.size() != static_cast<std::size_t>(n)) throw std::invalid_argument("need one pair profit per r_k");
  for (std::size_t k = 0; k < profits.size(); ++k) {
    if (profits[k] < 0) throw std::invalid_argument("profits must be non-negative");
    if (k > 0 && !(profits[k] > profits[k - 1])) throw std::invalid_argument("profits must be strictly increasing");
  }
  std::vector<AdversarialInstance> out;
  for (int i = 1; i <= n; ++i) {
    AdversarialInstance inst;
    inst.horizon_units = n;
    inst.delta_t = delta_t;
    Order r0;
    r0.id = 0;
    r0.raise_time = 0.0;
    r0.patience = (i + 0.5) * delta_t;
    inst.orders.push_back(r0);
    for (int k = 1; k <= n; ++k) {
      Order r;
      r.id = static_cast<OrderId>(k);
      r.raise_time = (k - 0.5) * delta_t;
      inst.orders.push_back(r);
      inst.engine->pair_profit[{0, r.id}] = profits[static_cast<std::size_t>(k - 1)];
      inst.engine->solo_profit[r.id] = 0.0;
    }
    inst.engine->solo_profit[0] = 0.0;
    out.push_back(std::move(inst));
  }
  return out;
}

/// Expected offline optimum over distribution X: the mean pair profit.
inline double expected_opt_distribution_X(std::span<const double> profits) {
  return std::accumulate(profits.begin(), profits.end(), 0.0) / static_cast<double>(profits.size());
}

inline Scenario make_scenario(const AdversarialInstance& inst, Policy policy, int beta, Mode mode = Mode::PreTrip) {
  Scenario s;
  s.config.delta_t = inst.delta_t;
  s.config.beta = beta;
  s.config.t_start = 0.0;
  s.config.t_end = inst.horizon_units * inst.delta_t;
  s.config.policy = policy;
  s.config.mode = mode;
  s.config.cancellation = CancellationSource::Auto;
  s.world.region = Region{{0, 0}, 0};
  s.world.clusters = ClusterMap::single(s.world.region);
  s.world.orders = inst.orders;
  std::stable_sort(s.world.orders.begin(), s.world.orders.end(),
                   [](const Order& a, const Order& b) { return a.raise_time < b.raise_time; });
  s.engine = inst.engine;
  return s;
}

inline Metrics run_scenario(const Scenario& s) {
  Simulation sim(s.config, s.world, s.cancel, *s.engine, s.tables.get());
  return sim.run();
}

inline Metrics run_scenario(Scenario s, Policy policy) {
  s.config.policy = policy;
  return run_scenario(s);
}

/// Decision vectors with x_N = 1 and no gap longer than beta (x_0 = 1 implicit).
inline std::vector<std::vector<int>> feasible_schedules(int n, int beta) {
  std::vector<std::vector<int>> out;
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  auto rec = [&](auto&& self, int j, int last) -> void {
    if (j > n) {
      out.push_back(x);
      return;
    }
    for (int v : {0, 1}) {
      if (j == n && v == 0) continue;
      if (v == 0 && j - last >= beta) continue;
      x[static_cast<std::size_t>(j - 1)] = v;
      self(self, j + 1, v ? j : last);
    }
  };
  if (n > 0) rec(rec, 1, 0);
  return out;
}

struct OptResult {
  double profit = 0.0;
  std::vector<int> decisions;
};

inline constexpr int kOptMaxUnits = 16;
inline constexpr int kOptMaxOrdersPerUnit = 6;

/// Exhaustive search over feasible decision vectors, each replayed in full.
/// Ties go to the lexicographically largest vector.
inline OptResult offline_opt(const Scenario& s) {
  const int n = s.config.units();
  if (n > kOptMaxUnits) throw std::invalid_argument("offline_opt: horizon exceeds " + std::to_string(kOptMaxUnits) + " units");
  std::vector<int> per_unit(static_cast<std::size_t>(n) + 1, 0);
  for (const Order& o : s.world.orders) {
    if (o.raise_time < s.config.t_start || o.raise_time >= s.config.t_end) continue;
    const auto u = static_cast<std::size_t>((o.raise_time - s.config.t_start) / s.config.delta_t);
    if (u < per_unit.size() && ++per_unit[u] > kOptMaxOrdersPerUnit) {
      throw std::invalid_argument("offline_opt: more than " + std::to_string(kOptMaxOrdersPerUnit) +
                                  " orders in one unit interval");
    }
  }
  OptResult best;
  bool have = false;
  Scenario replay = s;
  replay.config.policy = Policy::Schedule;
  replay.config.record_events = false;
  replay.config.record_increments = false;
  for (const auto& x : feasible_schedules(n, s.config.beta)) {
    replay.config.schedule = x;
    const double p = run_scenario(replay).total_profit;
    if (!have || p > best.profit || (p == best.profit && x > best.decisions)) {
      best = {p, x};
      have = true;
    }
  }
  return best;
}

}  // namespace dispatchlab
