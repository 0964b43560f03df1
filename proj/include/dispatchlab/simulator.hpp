#pragma once

// Discrete-time simulator. Time advances in unit intervals of delta_t seconds;
// orders are only dispatched at unit ends, each cluster following its own
// dispatching-time policy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dispatchlab/adaptive_interval.hpp"
#include "dispatchlab/dispatch.hpp"
#include "dispatchlab/rng.hpp"
#include "dispatchlab/spatial_cluster.hpp"

namespace dispatchlab {

enum class Policy { OneOverEPre, BIPre, OneOverEIn, UniformBase, WaitToDeadline, Schedule };
enum class Mode { PreTrip, InTrip };
/// Auto honours an order's recorded patience and falls back to the hazard.
enum class CancellationSource { Auto, Hazard };

inline const char* to_string(Policy p) {
  switch (p) {
    case Policy::OneOverEPre: return "one_over_e_pre";
    case Policy::BIPre: return "bi_pre";
    case Policy::OneOverEIn: return "one_over_e_in";
    case Policy::UniformBase: return "uniform";
    case Policy::WaitToDeadline: return "wait_to_deadline";
    case Policy::Schedule: return "schedule";
  }
  return "?";
}

inline Policy parse_policy(const std::string& s) {
  for (Policy p : {Policy::OneOverEPre, Policy::BIPre, Policy::OneOverEIn, Policy::UniformBase,
                   Policy::WaitToDeadline, Policy::Schedule}) {
    if (s == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown policy '" + s + "'");
}

inline const char* to_string(Mode m) { return m == Mode::PreTrip ? "pre_trip" : "in_trip"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "pre_trip") return Mode::PreTrip;
  if (s == "in_trip") return Mode::InTrip;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

struct CancellationModel {
  double delta_t = 0.0;
  std::vector<double> hazard;  // hazard[i - 1] is the probability for waiting unit i

  /// Beyond the observed support the last value holds.
  double at(int i) const {
    if (hazard.empty()) return 0.0;
    i = std::clamp(i, 1, static_cast<int>(hazard.size()));
    return hazard[static_cast<std::size_t>(i - 1)];
  }
};

/// hazard[i] = #canceled with wait in [(i-1)dt, i dt) / #canceled with wait >= (i-1)dt.
/// Orders without a recorded wait never canceled and do not enter the estimate.
inline CancellationModel estimate_cancellation_hazard(std::span<const Order> history, double delta_t) {
  if (history.empty()) throw std::invalid_argument("estimate_cancellation_hazard: no orders");
  if (!(delta_t > 0)) throw std::invalid_argument("estimate_cancellation_hazard: delta_t must be positive");
  std::vector<double> waits;
  for (const Order& o : history) {
    if (o.patience) waits.push_back(*o.patience);
  }
  CancellationModel m;
  m.delta_t = delta_t;
  if (waits.empty()) return m;
  std::vector<std::size_t> canc;
  for (double w : waits) {
    const auto bin = static_cast<std::size_t>(std::floor(w / delta_t));
    if (bin >= canc.size()) canc.resize(bin + 1, 0);
    ++canc[bin];
  }
  // Suffix sums give the at-risk counts.
  std::size_t at_risk = waits.size();
  m.hazard.resize(canc.size());
  for (std::size_t i = 0; i < canc.size(); ++i) {
    m.hazard[i] = at_risk == 0 ? 0.0 : static_cast<double>(canc[i]) / static_cast<double>(at_risk);
    at_risk -= canc[i];
  }
  return m;
}

struct SimConfig {
  double delta_t = 10.0;  // seconds
  int beta = 9;
  double t_start = 0.0;
  double t_end = 86400.0;
  Policy policy = Policy::UniformBase;
  Mode mode = Mode::PreTrip;
  PricingModel pricing;
  ShareabilityParams shareability;
  double theta = 50.0;
  std::uint64_t seed = 1;
  double speed_kmh = 30.0;
  CancellationSource cancellation = CancellationSource::Auto;
  std::vector<int> schedule;  // Policy::Schedule: x_1..x_N
  bool record_events = false;
  bool record_increments = false;

  int units() const {
    if (t_end <= t_start) return 0;
    return static_cast<int>(std::ceil((t_end - t_start) / delta_t - 1e-9));
  }

  void validate() const {
    if (!(delta_t > 0)) throw std::invalid_argument("delta_t must be positive");
    if (beta < 1) throw std::invalid_argument("beta must be >= 1");
    if (t_end < t_start) throw std::invalid_argument("horizon end precedes start");
    if (speed_kmh < 0) throw std::invalid_argument("speed_kmh must be non-negative");
    if (shareability.max_detour_frac < 0 || shareability.max_copickup_cells < 0) {
      throw std::invalid_argument("shareability parameters must be non-negative");
    }
    if (policy == Policy::OneOverEIn && mode != Mode::InTrip) {
      throw std::invalid_argument("one_over_e_in requires mode in_trip");
    }
    if (policy == Policy::Schedule && schedule.size() != static_cast<std::size_t>(units())) {
      throw std::invalid_argument("schedule length must equal the number of unit intervals");
    }
    pricing.validate();
  }
};

/// Cell -> cluster lookup. Index count() is the background cluster holding every
/// cell outside the extracted clusters.
class ClusterMap {
 public:
  ClusterMap() = default;

  static ClusterMap none(Region r) { return ClusterMap(r, 0); }

  static ClusterMap single(Region r) {
    ClusterMap m(r, 1);
    std::fill(m.dense_.begin(), m.dense_.end(), 0);
    return m;
  }

  /// Clusters smaller than `min_cells` are left to the background.
  static ClusterMap from_clusters(Region r, const ClusterSet& cs, std::size_t min_cells = 1) {
    ClusterMap m(r, 0);
    for (const auto& c : cs.clusters) {
      if (c.vertex_count() < min_cells) continue;
      bool any = false;
      for (const CellId& v : c.vertices()) {
        if (!r.contains(v)) continue;
        m.dense_[r.dense_index(v)] = m.count_;
        any = true;
      }
      if (any) ++m.count_;
    }
    return m;
  }

  int count() const { return count_; }
  int background() const { return count_; }
  const Region& region() const { return region_; }

  int of(CellId c) const {
    if (!region_.contains(c)) return count_;
    const int k = dense_[region_.dense_index(c)];
    return k < 0 ? count_ : k;
  }

  std::vector<std::pair<CellId, int>> assignments() const {
    std::vector<std::pair<CellId, int>> out;
    for (const CellId& c : region_.cells()) {
      const int k = of(c);
      if (k != count_) out.emplace_back(c, k);
    }
    return out;
  }

 private:
  ClusterMap(Region r, int count) : region_(r), count_(count), dense_(r.dense_size(), -1) {}

  Region region_;
  int count_ = 0;
  std::vector<int> dense_;
};

struct World {
  Region region;  // drivers walk inside it
  ClusterMap clusters;
  std::vector<Order> orders;  // sorted by raise_time
  std::vector<Driver> drivers;
  double cell_spacing_km = 0.8 * 1.7320508075688772;
};

/// Backward-induction tables keyed by (cluster, time bucket); -1 means "any".
struct ValueTables {
  int bucket_seconds = 0;  // 0 disables time-of-day buckets
  std::size_t min_samples = 1;
  std::map<std::pair<int, int>, ValueEstimateTable> tables;

  int bucket_of(double t) const {
    if (bucket_seconds <= 0) return -1;
    const double day = std::fmod(std::max(t, 0.0), 86400.0);
    return static_cast<int>(day / bucket_seconds);
  }

  /// Most specific table with enough samples; falls back toward the global one.
  const ValueEstimateTable& lookup(int cluster, double window_start) const {
    const int b = bucket_of(window_start);
    const std::pair<int, int> keys[] = {{cluster, b}, {cluster, -1}, {-1, b}, {-1, -1}};
    const ValueEstimateTable* fallback = nullptr;
    for (const auto& key : keys) {
      auto it = tables.find(key);
      if (it == tables.end()) continue;
      if (it->second.samples_at(1) >= min_samples) return it->second;
      if (!fallback) fallback = &it->second;
    }
    if (!fallback) throw std::invalid_argument("no value table for cluster " + std::to_string(cluster));
    return *fallback;
  }
};

struct ClusterMetrics {
  double profit = 0.0;
  long dispatched = 0;
  long canceled = 0;
  long dispatch_ops = 0;

  friend bool operator==(const ClusterMetrics&, const ClusterMetrics&) = default;
};

struct Metrics {
  int units = 0;
  double total_profit = 0.0;
  long raised = 0;
  long dispatched_orders = 0;
  long canceled_orders = 0;
  long served_orders = 0;  // dropped off
  long active_at_end = 0;
  long pooled_orders = 0;  // dispatched into a shared ride
  long dispatch_ops = 0;   // dispatches that assigned or attempted orders
  long idle_resets = 0;    // windows closed because the cluster had nothing to dispatch
  int max_window = 0;      // longest window, idle ones included
  std::map<int, long> interval_lengths;  // units -> count, non-empty dispatches
  std::vector<ClusterMetrics> per_cluster;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct Event {
  double t = 0.0;
  int cluster = 0;
  std::string event;
  std::string payload;
};

struct IncrementRecord {
  int cluster = 0;
  int t_l = 0;
  int offset = 0;
  double window_start = 0.0;  // seconds
  double value = 0.0;
};

struct WindowPath {
  int cluster = 0;
  double window_start = 0.0;
  std::vector<double> increments;
};

/// Windows that ran the full beta units, in log order.
inline std::vector<WindowPath> complete_windows(std::span<const IncrementRecord> log, int beta) {
  std::vector<WindowPath> out;
  std::map<std::pair<int, int>, WindowPath> open;
  for (const auto& r : log) {
    auto& w = open[{r.cluster, r.t_l}];
    if (r.offset == 1) {
      w = WindowPath{r.cluster, r.window_start, {}};
    }
    if (static_cast<int>(w.increments.size()) + 1 != r.offset) continue;
    w.increments.push_back(r.value);
    if (r.offset == beta) {
      out.push_back(std::move(w));
      open.erase({r.cluster, r.t_l});
    }
  }
  return out;
}

/// Estimates per-cluster, per-bucket and global tables from complete windows.
inline ValueTables build_value_tables(std::span<const WindowPath> paths, int beta, int bucket_seconds,
                                      std::size_t min_samples) {
  ValueTables vt;
  vt.bucket_seconds = bucket_seconds;
  vt.min_samples = min_samples;
  std::map<std::pair<int, int>, std::vector<std::vector<double>>> groups;
  for (const auto& p : paths) {
    if (static_cast<int>(p.increments.size()) != beta) continue;
    const int b = vt.bucket_of(p.window_start);
    groups[{p.cluster, -1}].push_back(p.increments);
    groups[{-1, -1}].push_back(p.increments);
    if (b >= 0) {
      groups[{p.cluster, b}].push_back(p.increments);
      groups[{-1, b}].push_back(p.increments);
    }
  }
  for (const auto& [key, samples] : groups) vt.tables[key] = estimate_value_table(samples, beta);
  return vt;
}

class Simulation {
 public:
  Simulation(SimConfig cfg, const World& world, CancellationModel cancel, const DispatchEngine& engine,
             const ValueTables* tables = nullptr)
      : cfg_(std::move(cfg)),
        world_(world),
        cancel_(std::move(cancel)),
        engine_(engine),
        tables_(tables),
        cancel_stream_(cfg_.seed, rng::Tag::Cancellation),
        walk_stream_(cfg_.seed, rng::Tag::DriverWalk) {
    cfg_.validate();
    if (cfg_.policy == Policy::BIPre && !tables_) throw std::invalid_argument("bi_pre needs value tables");
    if (!std::is_sorted(world_.orders.begin(), world_.orders.end(),
                        [](const Order& a, const Order& b) { return a.raise_time < b.raise_time; })) {
      throw std::invalid_argument("world orders must be sorted by raise_time");
    }
    N_ = cfg_.units();
    speed_ = cfg_.speed_kmh * cfg_.delta_t / 3600.0 / world_.cell_spacing_km;
    if (speed_ >= 64.0) throw std::invalid_argument("driver speed exceeds 64 cells per unit interval");
    K_ = world_.clusters.count();
    drivers_ = world_.drivers;
    for (std::size_t i = 0; i < drivers_.size(); ++i) driver_index_[drivers_[i].id] = i;
    clusters_.resize(static_cast<std::size_t>(K_) + 1);
    metrics_.units = N_;
    metrics_.per_cluster.resize(static_cast<std::size_t>(K_) + 1);
    // Skip orders raised before the horizon.
    while (next_order_ < world_.orders.size() && world_.orders[next_order_].raise_time < cfg_.t_start) {
      ++next_order_;
    }
    if (N_ == 0) finish();
  }

  int units() const { return N_; }
  int now() const { return j_; }
  bool done() const { return j_ >= N_; }
  const Metrics& metrics() const { return metrics_; }
  const std::vector<Event>& events() const { return events_; }
  const std::vector<IncrementRecord>& increments() const { return increment_log_; }
  const std::vector<Driver>& drivers() const { return drivers_; }
  int cluster_count() const { return K_; }
  std::size_t active_count() const {
    std::size_t n = 0;
    for (const auto& c : clusters_) n += c.active.size();
    return n;
  }

  void step() {
    if (done()) throw std::logic_error("simulation already finished");
    ++j_;
    const double t_end = unit_end(j_);
    admit(t_end);
    cancel_all(t_end);
    bucket_drivers();
    for (int k = 0; k <= K_; ++k) decide(k);
    for (Driver& d : drivers_) advance(d, static_cast<std::uint64_t>(j_), &metrics_.served_orders);
    if (j_ == N_) finish();
  }

  const Metrics& run() {
    while (!done()) step();
    return metrics_;
  }

 private:
  struct Shadow {
    std::vector<Order> active;
    std::vector<Driver> drivers;
    std::unordered_map<DriverId, std::size_t> index;
    double sum = 0.0;
  };

  struct ClusterState {
    int t_l = 0;
    std::vector<Order> active;
    std::vector<Order> fresh;  // admitted this unit
    std::vector<double> increments;
    std::vector<Driver> snapshot;  // idle supply at the window's first unit, minus later unit dispatches
    double unit_sum = 0.0;
    std::optional<Shadow> shadow;
    std::vector<std::size_t> idle;     // driver indices this unit
    std::vector<std::size_t> serving;  // with room, in-trip mode only

    void reset(int j) {
      t_l = j;
      increments.clear();
      snapshot.clear();
      unit_sum = 0.0;
      shadow.reset();
    }
  };

  double unit_end(int j) const { return std::min(cfg_.t_start + j * cfg_.delta_t, cfg_.t_end); }

  bool in_trip_increments(Policy p) const {
    return p == Policy::OneOverEIn || (cfg_.mode == Mode::InTrip && p != Policy::OneOverEPre && p != Policy::BIPre);
  }

  void log_event(double t, int cluster, std::string event, std::string payload) {
    if (cfg_.record_events) events_.push_back({t, cluster, std::move(event), std::move(payload)});
  }

  void admit(double t_end) {
    for (auto& c : clusters_) c.fresh.clear();
    while (next_order_ < world_.orders.size() && world_.orders[next_order_].raise_time < t_end) {
      const Order& o = world_.orders[next_order_++];
      const int k = world_.clusters.of(o.origin);
      auto& c = clusters_[static_cast<std::size_t>(k)];
      c.active.push_back(o);
      c.fresh.push_back(o);
      ++metrics_.raised;
      log_event(o.raise_time, k, "raise", std::to_string(o.id));
    }
  }

  bool cancels(const Order& o, double t_end) const {
    if (cfg_.cancellation == CancellationSource::Auto && o.patience) {
      return o.raise_time + *o.patience <= t_end;
    }
    const double w = t_end - o.raise_time;
    const int i = std::max(1, static_cast<int>(std::ceil(w / cfg_.delta_t - 1e-9)));
    const double h = cancel_.at(i);
    return h > 0.0 && cancel_stream_.uniform(o.id, static_cast<std::uint64_t>(i)) < h;
  }

  void cancel_all(double t_end) {
    for (int k = 0; k <= K_; ++k) {
      auto& c = clusters_[static_cast<std::size_t>(k)];
      auto canceled = [&](const Order& o) { return cancels(o, t_end); };
      for (const Order& o : c.active) {
        if (canceled(o)) {
          ++metrics_.canceled_orders;
          ++metrics_.per_cluster[static_cast<std::size_t>(k)].canceled;
          log_event(t_end, k, "cancel", std::to_string(o.id));
        }
      }
      std::erase_if(c.active, canceled);
      std::erase_if(c.fresh, canceled);
    }
  }

  void bucket_drivers() {
    for (auto& c : clusters_) {
      c.idle.clear();
      c.serving.clear();
    }
    if (!engine_.uses_drivers()) return;
    for (std::size_t i = 0; i < drivers_.size(); ++i) {
      const Driver& d = drivers_[i];
      auto& c = clusters_[static_cast<std::size_t>(world_.clusters.of(d.location))];
      if (d.status == DriverStatus::Idle) {
        c.idle.push_back(i);
      } else if (cfg_.mode == Mode::InTrip && d.has_room()) {
        c.serving.push_back(i);
      }
    }
  }

  DispatchResult run_engine(std::span<const Order> active, std::span<const Driver> idle,
                            std::span<const Driver> serving) const {
    DispatchInput in{active, idle, serving};
    return cfg_.mode == Mode::InTrip ? engine_.dispatch_in(in) : engine_.dispatch_pre(in);
  }

  std::vector<Driver> gather(const std::vector<std::size_t>& idx) const {
    std::vector<Driver> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(drivers_[i]);
    return out;
  }

  /// Applies a dispatch to a fleet and removes the dispatched orders from `active`.
  static void commit(const DispatchResult& r, std::vector<Driver>& drivers,
                     const std::unordered_map<DriverId, std::size_t>& index, std::vector<Order>& active) {
    std::map<OrderId, const Order*> by_id;
    for (const Order& o : active) by_id[o.id] = &o;
    for (const auto& a : r.assignments) {
      if (!a.driver) continue;
      Driver& d = drivers[index.at(*a.driver)];
      if (a.kind != AssignmentKind::Insertion) d.riders.clear();
      for (OrderId id : a.orders) d.riders.push_back({id, by_id.at(id)->solo_distance(), 0, false, false});
      if (a.kind != AssignmentKind::Solo) {
        for (Passenger& p : d.riders) p.shared = true;
      }
      if (d.assigned() > d.capacity) throw std::logic_error("dispatch exceeded vehicle capacity");
      d.plan = a.route;
      d.status = DriverStatus::Serving;
    }
    std::erase_if(active, [&](const Order& o) { return std::binary_search(r.served.begin(), r.served.end(), o.id); });
  }

  void settle(Driver& d, long* served) const {
    while (!d.plan.empty() && d.plan.front().cell == d.location) {
      const Stop s = d.plan.front();
      d.plan.erase(d.plan.begin());
      auto it = std::find_if(d.riders.begin(), d.riders.end(), [&](const Passenger& p) { return p.order == s.order; });
      if (it == d.riders.end()) continue;
      if (s.action == StopAction::Pickup) {
        it->picked = true;
      } else {
        d.riders.erase(it);
        if (served) ++*served;
      }
    }
    if (d.plan.empty()) {
      d.status = DriverStatus::Idle;
      d.riders.clear();
    }
  }

  /// One unit of movement: along the plan when serving, a random walk otherwise.
  void advance(Driver& d, std::uint64_t unit, long* served) const {
    d.progress += speed_;
    settle(d, served);
    std::uint64_t m = 0;
    while (d.progress >= 1.0) {
      d.progress -= 1.0;
      if (!d.plan.empty()) {
        d.location = step_toward(d.location, d.plan.front().cell);
        for (Passenger& p : d.riders) {
          if (p.picked) ++p.ridden;
        }
        settle(d, served);
      } else {
        std::array<CellId, 6> options{};
        std::size_t n = 0;
        for (const CellId& nb : neighbors(d.location)) {
          if (world_.region.contains(nb)) options[n++] = nb;
        }
        if (n > 0) {
          const double u = walk_stream_.uniform(d.id, unit * 64 + m);
          d.location = options[std::min(n - 1, static_cast<std::size_t>(u * static_cast<double>(n)))];
        }
      }
      ++m;
    }
  }

  void record_dispatch(int k, const DispatchResult& r, int length) {
    auto& cm = metrics_.per_cluster[static_cast<std::size_t>(k)];
    metrics_.total_profit += r.profit;
    cm.profit += r.profit;
    const auto n = static_cast<long>(r.served.size());
    metrics_.dispatched_orders += n;
    cm.dispatched += n;
    ++metrics_.dispatch_ops;
    ++cm.dispatch_ops;
    ++metrics_.interval_lengths[length];
    metrics_.max_window = std::max(metrics_.max_window, length);
    for (const auto& a : r.assignments) {
      if (a.kind != AssignmentKind::Solo) metrics_.pooled_orders += static_cast<long>(a.orders.size());
      if (!a.driver) metrics_.served_orders += static_cast<long>(a.orders.size());
    }
    if (cfg_.record_events) {
      std::string payload = "profit=" + std::to_string(r.profit) + ";orders=";
      for (std::size_t i = 0; i < r.served.size(); ++i) payload += (i ? " " : "") + std::to_string(r.served[i]);
      log_event(unit_end(j_), k, "dispatch", payload);
    }
  }

  Decision decide_policy(Policy p, const ClusterState& c, int k) const {
    const WindowState s{c.t_l, j_, cfg_.beta, N_, c.increments};
    switch (p) {
      case Policy::OneOverEPre: return one_over_e_pre_adi(s);
      case Policy::OneOverEIn: return one_over_e_in_adi(s);
      case Policy::BIPre: return bi_pre_adi(s, tables_->lookup(k, cfg_.t_start + c.t_l * cfg_.delta_t));
      case Policy::WaitToDeadline: return wait_to_deadline(s);
      case Policy::Schedule: {
        if (j_ == window_deadline(s)) return {true, Reason::DeadlineForced};
        return {cfg_.schedule[static_cast<std::size_t>(j_ - 1)] != 0, Reason::RunningMax};
      }
      case Policy::UniformBase: return uniform_baseline(j_);
    }
    return {true, Reason::DeadlineForced};
  }

  Shadow make_shadow(int k, const ClusterState& c, const DispatchResult& first) const {
    Shadow sh;
    sh.active = c.active;
    for (int pass = 0; pass < 2; ++pass) {
      const auto& list = pass == 0 ? c.idle : c.serving;
      for (std::size_t i : list) {
        sh.index[drivers_[i].id] = sh.drivers.size();
        sh.drivers.push_back(drivers_[i]);
      }
    }
    // Serving vehicles without room are part of the cluster too.
    if (cfg_.mode == Mode::InTrip) {
      for (const Driver& d : drivers_) {
        if (d.status == DriverStatus::Serving && !d.has_room() && world_.clusters.of(d.location) == k) {
          sh.index[d.id] = sh.drivers.size();
          sh.drivers.push_back(d);
        }
      }
    }
    commit(first, sh.drivers, sh.index, sh.active);
    sh.sum = first.profit;
    return sh;
  }

  /// Advances the every-unit counterfactual by one unit and dispatches it.
  void shadow_step(int k, ClusterState& c, double t_end) const {
    Shadow& sh = *c.shadow;
    for (Driver& d : sh.drivers) advance(d, static_cast<std::uint64_t>(j_ - 1), nullptr);
    sh.active.insert(sh.active.end(), c.fresh.begin(), c.fresh.end());
    std::erase_if(sh.active, [&](const Order& o) { return cancels(o, t_end); });
    std::vector<Driver> idle;
    std::vector<Driver> serving;
    for (const Driver& d : sh.drivers) {
      if (world_.clusters.of(d.location) != k) continue;
      if (d.status == DriverStatus::Idle) {
        idle.push_back(d);
      } else if (d.has_room()) {
        serving.push_back(d);
      }
    }
    const DispatchResult r = run_engine(sh.active, idle, serving);
    commit(r, sh.drivers, sh.index, sh.active);
    sh.sum += r.profit;
  }

  /// Drops the drivers a dispatch used from a supply snapshot.
  static void release(std::vector<Driver>& supply, const DispatchResult& r) {
    std::erase_if(supply, [&](const Driver& d) {
      return std::any_of(r.assignments.begin(), r.assignments.end(),
                         [&](const Assignment& a) { return a.driver == d.id; });
    });
  }

  void decide(int k) {
    auto& c = clusters_[static_cast<std::size_t>(k)];
    const Policy p = k == K_ ? Policy::UniformBase : cfg_.policy;
    const int length = j_ - c.t_l;
    if (c.active.empty()) {
      ++metrics_.idle_resets;
      metrics_.max_window = std::max(metrics_.max_window, length);
      c.reset(j_);
      return;
    }
    const std::vector<Driver> idle = gather(c.idle);
    const std::vector<Driver> serving = gather(c.serving);
    const DispatchResult r = run_engine(c.active, idle, serving);
    if (p == Policy::UniformBase) {
      apply(k, c, r, length);
      return;
    }
    const double t_end = unit_end(j_);
    const bool in_trip = in_trip_increments(p);
    double inc = 0.0;
    if (length == 1) {
      if (in_trip) {
        c.shadow = make_shadow(k, c, r);
      } else {
        c.snapshot = idle;
        release(c.snapshot, r);
        c.unit_sum = r.profit;
      }
    } else if (in_trip) {
      shadow_step(k, c, t_end);
      inc = in_adi_profit_increment(r.profit, c.shadow->sum);
    } else {
      const DispatchResult alone = engine_.dispatch_pre({c.fresh, c.snapshot, {}});
      release(c.snapshot, alone);
      c.unit_sum += alone.profit;
      inc = r.profit - c.unit_sum;
    }
    c.increments.push_back(inc);
    if (cfg_.record_increments) {
      increment_log_.push_back({k, c.t_l, length, cfg_.t_start + c.t_l * cfg_.delta_t, inc});
    }
    if (decide_policy(p, c, k).dispatch) apply(k, c, r, length);
  }

  void apply(int k, ClusterState& c, const DispatchResult& r, int length) {
    commit(r, drivers_, driver_index_, c.active);
    record_dispatch(k, r, length);
    c.reset(j_);
  }

  void finish() {
    metrics_.active_at_end = 0;
    for (const auto& c : clusters_) metrics_.active_at_end += static_cast<long>(c.active.size());
  }

  SimConfig cfg_;
  const World& world_;
  CancellationModel cancel_;
  const DispatchEngine& engine_;
  const ValueTables* tables_;
  rng::StreamFamily cancel_stream_;
  rng::StreamFamily walk_stream_;
  int N_ = 0;
  int K_ = 0;
  int j_ = 0;
  double speed_ = 0.0;
  std::size_t next_order_ = 0;
  std::vector<Driver> drivers_;
  std::unordered_map<DriverId, std::size_t> driver_index_;
  std::vector<ClusterState> clusters_;
  Metrics metrics_;
  std::vector<Event> events_;
  std::vector<IncrementRecord> increment_log_;
};

inline Metrics run(const SimConfig& cfg, const World& world, const CancellationModel& cancel,
                   const DispatchEngine& engine, const ValueTables* tables = nullptr) {
  Simulation sim(cfg, world, cancel, engine, tables);
  return sim.run();
}

// ---- output ----------------------------------------------------------------

inline void write_metrics_csv(std::ostream& os, const Metrics& m) {
  os.precision(17);
  os << "metric,value\n";
  os << "units," << m.units << '\n';
  os << "total_profit," << m.total_profit << '\n';
  os << "raised," << m.raised << '\n';
  os << "dispatched_orders," << m.dispatched_orders << '\n';
  os << "canceled_orders," << m.canceled_orders << '\n';
  os << "served_orders," << m.served_orders << '\n';
  os << "active_at_end," << m.active_at_end << '\n';
  os << "pooled_orders," << m.pooled_orders << '\n';
  os << "dispatch_ops," << m.dispatch_ops << '\n';
  os << "idle_resets," << m.idle_resets << '\n';
  os << "max_window," << m.max_window << '\n';
}

inline void write_cluster_metrics_csv(std::ostream& os, const Metrics& m) {
  os.precision(17);
  os << "cluster,profit,dispatched,canceled,dispatch_ops\n";
  for (std::size_t k = 0; k < m.per_cluster.size(); ++k) {
    const auto& c = m.per_cluster[k];
    os << k << ',' << c.profit << ',' << c.dispatched << ',' << c.canceled << ',' << c.dispatch_ops << '\n';
  }
}

inline void write_interval_csv(std::ostream& os, const Metrics& m) {
  os << "length_units,count\n";
  for (const auto& [len, n] : m.interval_lengths) os << len << ',' << n << '\n';
}

inline void write_events_csv(std::ostream& os, std::span<const Event> events) {
  os.precision(12);
  os << "t,cluster,event,payload\n";
  for (const auto& e : events) os << e.t << ',' << e.cluster << ',' << e.event << ',' << e.payload << '\n';
}

inline void write_increments_csv(std::ostream& os, std::span<const IncrementRecord> log) {
  os.precision(17);
  os << "cluster,t_l,offset,window_start,increment\n";
  for (const auto& r : log) {
    os << r.cluster << ',' << r.t_l << ',' << r.offset << ',' << r.window_start << ',' << r.value << '\n';
  }
}

inline std::vector<IncrementRecord> read_increments_csv(std::istream& in) {
  csv::Reader reader(in, "cluster,t_l,offset,window_start,increment");
  std::vector<IncrementRecord> out;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    out.push_back({csv::parse_number<int>(f[0], line, "cluster"), csv::parse_number<int>(f[1], line, "t_l"),
                   csv::parse_number<int>(f[2], line, "offset"), csv::parse_number<double>(f[3], line, "window_start"),
                   csv::parse_number<double>(f[4], line, "increment")});
  }
  return out;
}

}  // namespace dispatchlab
