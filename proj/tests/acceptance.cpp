// Acceptance checks. Prints one PASS/FAIL line per criterion.
// Usage: acceptance [list], e.g. "1-6,9" or "7,8". Default runs all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dispatchlab/harness.hpp"

using namespace dispatchlab;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1 -----------------------------------------------------------

IntensityProfile wide_city() {
  IntensityProfile p;
  p.region = {{0, 0}, 26};
  p.decay = 0.8;
  p.kernel_radius = 9;
  rng::Engine e(77, rng::Tag::Test, 1);
  for (int q = -20; q <= 20; q += 8) {
    for (int r = -20; r <= 20; r += 8) {
      const CellId c{q, r};
      if (p.region.contains(c)) p.hotspots.push_back({c, 0.5 + e.uniform(), {}});
    }
  }
  p.time_curve = two_peak_curve();
  return p;
}

std::vector<Order> peak_orders(const IntensityProfile& p, std::size_t n, std::uint64_t seed) {
  std::vector<Order> out;
  for (const Order& o : generate_orders(p, n, seed)) {
    if (o.raise_time >= 7 * 3600.0 && o.raise_time < 10 * 3600.0) out.push_back(o);
  }
  return out;
}

void check_clusters(Outcome& out, const std::string& name, const SpatialShareabilityGraph& g, const ClusterSet& cs,
                    double theta) {
  std::set<CellId> seen;
  bool disjoint = true, connected = true, bounded = true;
  double worst = 0;
  for (const auto& c : cs.clusters) {
    for (const CellId& v : c.vertices()) {
      if (!seen.insert(v).second) disjoint = false;
    }
    if (connected_components(c).size() != 1) connected = false;
    worst = std::max(worst, edge_weight_variance(c));
    if (edge_weight_variance(c) > theta + 1e-9) bounded = false;
  }
  bool covers = seen.size() == g.vertex_count();
  for (const CellId& v : g.vertices()) covers = covers && seen.count(v);
  out.check(connected, name + ": every cluster connected");
  out.check(disjoint && covers, name + fmt(": clusters partition %zu vertices", g.vertex_count()));
  out.check(bounded, name + fmt(": max variance %.3f <= %.0f over %zu clusters", worst, theta, cs.size()));
}

Outcome criterion1() {
  Outcome out;
  const ShareabilityParams sp;
  {
    const auto orders = peak_orders(default_city(), 20000, 11);
    const auto g = build_graph(orders, sp);
    out.check(orders.size() >= 5000, fmt("default city peak orders %zu >= 5000", orders.size()));
    check_clusters(out, "default city", g, spatial_clustering(g, 50.0).clusters, 50.0);
  }
  {
    const auto orders = peak_orders(wide_city(), 40000, 12);
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = build_graph(orders, sp);
    const auto r = spatial_clustering(g, 50.0);
    const double dt = seconds_since(t0);
    out.check(orders.size() >= 5000, fmt("wide city peak orders %zu >= 5000", orders.size()));
    out.check(g.vertex_count() >= 2000, fmt("wide city graph has %zu >= 2000 cells", g.vertex_count()));
    check_clusters(out, "wide city", g, r.clusters, 50.0);
    out.check(dt < 10.0, fmt("graph + clustering %.2f s < 10 s", dt));
  }
  return out;
}

// ---- criterion 2 -----------------------------------------------------------

Outcome criterion2() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  int exact = 0;
  for (int inst = 0; inst < 20; ++inst) {
    rng::Engine e(200 + inst, rng::Tag::Test, 2);
    const int n = 50 + static_cast<int>(e.below(451));
    const int span = 2 + static_cast<int>(e.below(5));
    ShareabilityParams sp;
    sp.max_detour_frac = 0.1 + 0.4 * e.uniform();
    sp.max_copickup_cells = 1 + static_cast<int>(e.below(4));
    std::vector<Order> orders;
    for (int i = 0; i < n; ++i) {
      Order o;
      o.id = static_cast<OrderId>(i + 1);
      o.origin = {static_cast<int>(e.below(2 * span + 1)) - span, static_cast<int>(e.below(2 * span + 1)) - span};
      o.dest = {static_cast<int>(e.below(4 * span + 1)) - 2 * span, static_cast<int>(e.below(4 * span + 1)) - 2 * span};
      orders.push_back(o);
    }
    std::map<EdgeKey, std::int64_t> brute;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Order& a = orders[static_cast<std::size_t>(i)];
        const Order& b = orders[static_cast<std::size_t>(j)];
        if (a.origin == b.origin) continue;
        if (shareable(a, b, sp)) ++brute[EdgeKey::of(a.origin, b.origin)];
      }
    }
    const auto g = build_graph(orders, sp);
    exact += g.edges() == brute ? 1 : 0;
  }
  const double dt = seconds_since(t0);
  out.check(exact == 20, fmt("%d of 20 instances match the pairwise count exactly", exact));
  out.check(dt < 5.0, fmt("%.2f s < 5 s", dt));
  return out;
}

// ---- criterion 3 -----------------------------------------------------------

// Observation length of the rule for a window of beta units.
int skip_for(int beta) {
  static const int table[] = {0, 0, 0, 1, 1, 1, 2, 2};
  if (beta <= 7) return table[beta];
  return static_cast<int>(std::ceil(beta / std::numbers::e)) - 1;
}

// First offset after the observation phase beating every earlier value, else beta.
int reference_stop(const std::vector<double>& x) {
  const int beta = static_cast<int>(x.size());
  for (int k = skip_for(beta) + 1; k < beta; ++k) {
    bool best = true;
    for (int j = 1; j < k; ++j) best = best && x[static_cast<std::size_t>(k - 1)] > x[static_cast<std::size_t>(j - 1)];
    if (best) return k;
  }
  return beta;
}

int policy_stop(const std::vector<double>& x, const std::function<Decision(const WindowState&)>& rule) {
  const int beta = static_cast<int>(x.size());
  for (int k = 1; k <= beta; ++k) {
    const std::vector<double> prefix(x.begin(), x.begin() + k);
    if (rule(WindowState{100, 100 + k, beta, 100000, prefix}).dispatch) return k;
  }
  return -1;
}

Outcome criterion3() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  long cases = 0, mismatches = 0;
  for (int beta = 1; beta <= 7; ++beta) {
    std::vector<double> x(static_cast<std::size_t>(beta));
    std::iota(x.begin(), x.end(), 1.0);
    do {
      ++cases;
      const int ref = reference_stop(x);
      if (policy_stop(x, one_over_e_pre_adi) != ref) ++mismatches;
      if (policy_stop(x, one_over_e_in_adi) != ref) ++mismatches;
    } while (std::next_permutation(x.begin(), x.end()));
  }
  out.check(mismatches == 0, fmt("%ld rank permutations (beta 1..7), %ld mismatches", cases, mismatches));
  rng::Engine e(3, rng::Tag::Test, 3);
  const int trials = 50000;
  int hits = 0;
  std::vector<double> x(20);
  for (int t = 0; t < trials; ++t) {
    for (auto& v : x) v = e.uniform();
    const auto argmax = std::max_element(x.begin(), x.end()) - x.begin() + 1;
    hits += policy_stop(x, one_over_e_pre_adi) == argmax ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / trials;
  out.check(p >= 0.33 - 0.02, fmt("P(stop at argmax), beta 20: %.4f >= 0.31", p));
  const double dt = seconds_since(t0);
  out.check(dt < 30.0, fmt("%.2f s < 30 s", dt));
  return out;
}

// ---- criterion 4 -----------------------------------------------------------

Outcome criterion4() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::vector<double>> hand{{6, 0}, {2, 10}};
  const auto t = estimate_value_table(hand, 2);
  out.check(t.at(1) == 5.5 && t.at(2) == 5.0, fmt("worked example v_bar = (%g, %g), expected (5.5, 5)", t.at(1), t.at(2)));
  const int beta = 10, windows = 10000;
  auto draw = [&](std::uint64_t stream) {
    rng::Engine e(4, rng::Tag::Test, stream);
    std::vector<std::vector<double>> w(windows, std::vector<double>(beta));
    for (auto& path : w) {
      for (auto& v : path) v = e.uniform();
    }
    return w;
  };
  const auto train = draw(1);
  const auto eval = draw(2);
  const auto table = estimate_value_table(train, beta);
  double bi = 0, oe = 0;
  for (const auto& path : eval) {
    bi += path[static_cast<std::size_t>(policy_stop(path, [&](const WindowState& s) { return bi_pre_adi(s, table); }) - 1)];
    oe += path[static_cast<std::size_t>(policy_stop(path, one_over_e_pre_adi) - 1)];
  }
  bi /= windows;
  oe /= windows;
  out.check(bi >= oe, fmt("mean realized increment, beta %d: BI %.4f >= 1/e %.4f", beta, bi, oe));
  const double dt = seconds_since(t0);
  out.check(dt < 30.0, fmt("%.2f s < 30 s", dt));
  return out;
}

// ---- criterion 5 -----------------------------------------------------------

std::shared_ptr<ValueTables> flat_tables(int beta, double v) {
  auto vt = std::make_shared<ValueTables>();
  ValueEstimateTable t;
  t.beta = beta;
  t.v_bar.assign(static_cast<std::size_t>(beta), v);
  t.sample_counts.assign(static_cast<std::size_t>(beta), 1);
  vt->tables[{-1, -1}] = t;
  return vt;
}

// Half the scenarios use explicit profit tables, half the geometric engine.
Scenario random_scenario(int index) {
  rng::Engine e(500 + index, rng::Tag::Scenario, 0);
  const int n = 4 + static_cast<int>(e.below(9));
  const int beta = 1 + static_cast<int>(e.below(4));
  const double dt = index % 2 ? 30.0 : 1.0;
  Scenario s;
  s.config.delta_t = dt;
  s.config.beta = beta;
  s.config.t_start = 0;
  s.config.t_end = n * dt;
  s.config.cancellation = CancellationSource::Auto;
  s.config.seed = static_cast<std::uint64_t>(index + 1);
  s.world.region = Region{{0, 0}, 3};
  s.world.clusters = ClusterMap::single(s.world.region);
  std::vector<CellId> cells = disk({0, 0}, 3);
  OrderId id = 1;
  for (int u = 0; u < n; ++u) {
    const int k = static_cast<int>(e.below(5));
    for (int i = 0; i < k; ++i) {
      Order o;
      o.id = id++;
      o.raise_time = (u + 0.05 + 0.9 * e.uniform()) * dt;
      o.origin = cells[e.below(cells.size())];
      do {
        o.dest = cells[e.below(cells.size())];
      } while (o.dest == o.origin);
      if (e.uniform() < 0.4) o.patience = (0.5 + 3.0 * e.uniform()) * dt;
      s.world.orders.push_back(o);
    }
  }
  std::stable_sort(s.world.orders.begin(), s.world.orders.end(),
                   [](const Order& a, const Order& b) { return a.raise_time < b.raise_time; });
  if (index % 2 == 0) {
    auto engine = std::make_shared<TableEngine>();
    for (const Order& o : s.world.orders) engine->solo_profit[o.id] = 1 + 4 * e.uniform();
    for (OrderId a = 1; a < id; ++a) {
      for (OrderId b = a + 1; b < id; ++b) {
        if (e.uniform() < 0.5) engine->pair_profit[{a, b}] = 2 + 10 * e.uniform();
      }
    }
    s.engine = engine;
  } else {
    const int drivers = 1 + static_cast<int>(e.below(4));
    for (int i = 0; i < drivers; ++i) {
      Driver d;
      d.id = static_cast<DriverId>(i + 1);
      d.location = cells[e.below(cells.size())];
      s.world.drivers.push_back(d);
    }
    s.engine = std::make_shared<GreedyEngine>(s.config.pricing, s.config.shareability);
  }
  s.tables = flat_tables(beta, 4 * e.uniform());
  return s;
}

Outcome criterion5() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Policy> policies{Policy::UniformBase, Policy::OneOverEPre, Policy::BIPre, Policy::WaitToDeadline,
                                     Policy::OneOverEIn};
  std::map<Policy, int> equal, above;
  int max_orders = 0;
  for (int i = 0; i < 50; ++i) {
    Scenario pre = random_scenario(i);
    max_orders = std::max(max_orders, static_cast<int>(pre.world.orders.size()));
    Scenario in = pre;
    in.config.mode = Mode::InTrip;
    const double opt_pre = offline_opt(pre).profit;
    const double opt_in = offline_opt(in).profit;
    for (Policy p : policies) {
      const bool intrip = p == Policy::OneOverEIn;
      const double v = run_scenario(intrip ? in : pre, p).total_profit;
      const double opt = intrip ? opt_in : opt_pre;
      const double tol = 1e-9 * std::max(1.0, std::abs(opt));
      if (v > opt + tol) ++above[p];
      if (std::abs(v - opt) <= tol) ++equal[p];
    }
  }
  for (Policy p : policies) {
    out.check(above[p] == 0 && equal[p] >= 1,
              fmt("%-16s above OPT in %d of 50, equal in %d", to_string(p), above[p], equal[p]));
  }
  const double dt = seconds_since(t0);
  out.check(dt < 120.0, fmt("%.2f s < 120 s", dt));
  return out;
}

// ---- criterion 6 -----------------------------------------------------------

double wait_ratio(int n) {
  std::vector<double> profits(static_cast<std::size_t>(n));
  std::iota(profits.begin(), profits.end(), 1.0);
  double sum = 0;
  for (const auto& inst : gen_distribution_X(n, profits)) {
    sum += run_scenario(make_scenario(inst, Policy::WaitToDeadline, n)).total_profit;
  }
  return sum / n / (n * (n + 1) / 2.0 / n);
}

Outcome criterion6() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const double r = 5.0;
  const auto inst = gen_single_cancel_instance(r);
  for (Policy p : {Policy::OneOverEPre, Policy::BIPre, Policy::WaitToDeadline, Policy::OneOverEIn}) {
    auto s = make_scenario(inst, p, 3, p == Policy::OneOverEIn ? Mode::InTrip : Mode::PreTrip);
    s.tables = flat_tables(3, 1.0);
    const double v = run_scenario(s).total_profit;
    out.check(v == 0.0, fmt("single cancel: %s scores %g", to_string(p), v));
  }
  const double opt = offline_opt(make_scenario(inst, Policy::WaitToDeadline, 3)).profit;
  out.check(opt == r, fmt("single cancel: OPT %g == profit_r %g", opt, r));
  {
    std::vector<double> profits(10);
    std::iota(profits.begin(), profits.end(), 1.0);
    double opt_sum = 0;
    for (const auto& x : gen_distribution_X(10, profits)) {
      opt_sum += offline_opt(make_scenario(x, Policy::WaitToDeadline, 10)).profit;
    }
    out.check(std::abs(opt_sum / 10 - 5.5) < 1e-12, fmt("X, n=10: exhaustive OPT mean %.12g == 5.5", opt_sum / 10));
  }
  const double r10 = wait_ratio(10);
  out.check(std::abs(r10 - 10.0 / 55.0) < 1e-12, fmt("X, n=10: wait-to-deadline ratio %.12f == 10/55", r10));
  for (int n : {20, 40}) {
    const double rn = wait_ratio(n);
    out.check(rn < 0.1 && std::abs(rn - 2.0 / (n + 1)) < 1e-12, fmt("X, n=%d: ratio %.6f < 0.1", n, rn));
  }
  const double dt = seconds_since(t0);
  out.check(dt < 10.0, fmt("%.2f s < 10 s", dt));
  return out;
}

// ---- criteria 7 and 8 ------------------------------------------------------

bool runs_conserve(const SweepResult& r) {
  for (const auto& x : r.runs) {
    const Metrics& m = x.metrics;
    if (m.dispatched_orders + m.canceled_orders + m.active_at_end != m.raised || m.max_window > x.beta) return false;
  }
  return true;
}

SweepResult sweep(const Pipeline& p, const std::string& variable, std::vector<double> values,
                  const std::vector<std::string>& policies) {
  SweepConfig s = p.cfg.sweep;
  s.variable = variable;
  s.values = std::move(values);
  s.policies.clear();
  for (const auto& label : policies) s.policies.push_back(parse_policy_spec(label));
  return run_sweep(p, s);
}

void report_cells(Outcome& out, const SweepResult& r) {
  for (const auto& c : r.cells) {
    out.notes.push_back(fmt("     %-16s %s=%-4g mean %.1f +- %.1f", c.policy.c_str(), r.variable.c_str(), c.value,
                            c.profit.mean, c.profit.stderr_));
  }
}

void check_greater(Outcome& out, const std::vector<double>& a, const std::vector<double>& b, const std::string& what) {
  const PairedTest t = paired_t_test_greater(a, b);
  out.check(t.mean_diff > 0 && t.p < 0.05, fmt("%s: mean diff %+.1f, t %.2f, p %.4g", what.c_str(), t.mean_diff, t.t, t.p));
}

Outcome criterion7() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig base = parse_config(std::string());
  out.notes.push_back(fmt("     workload: %zu orders, %zu drivers, %zu seeds", base.data.num_orders,
                          base.data.num_drivers, base.sweep.seeds.size()));
  {
    ExperimentConfig cfg = base;
    cfg.sim.mode = Mode::PreTrip;
    cfg.beta_delta_t = 90;
    const Pipeline p = prepare_pipeline(cfg);
    const auto r = sweep(p, "delta_t", {10, 20, 30}, {"uniform", "one_over_e_pre", "bi_pre"});
    report_cells(out, r);
    out.check(runs_conserve(r), "pre-trip runs conserve orders and respect beta");
    for (double v : r.values) {
      for (const char* pol : {"one_over_e_pre", "bi_pre"}) {
        check_greater(out, r.profits(pol, v), r.profits("uniform", v), fmt("%s > uniform at dt=%g", pol, v));
      }
    }
  }
  {
    ExperimentConfig cfg = base;
    cfg.sim.mode = Mode::InTrip;
    cfg.sim.delta_t = 2;
    const Pipeline p = prepare_pipeline(cfg);
    const auto online = sweep(p, "beta_delta_t", {30, 60, 90}, {"one_over_e_in"});
    // Uniform baselines dispatch every unit, so beta does not enter them.
    const std::vector<std::string> uniforms{"uniform:dt=2", "uniform:dt=4", "uniform:dt=6", "uniform:dt=8"};
    const auto fixed = sweep(p, "beta_delta_t", {90}, uniforms);
    report_cells(out, online);
    report_cells(out, fixed);
    out.check(runs_conserve(online) && runs_conserve(fixed), "in-trip runs conserve orders and respect beta");
    for (double v : online.values) {
      for (const auto& u : uniforms) {
        check_greater(out, online.profits("one_over_e_in", v), fixed.profits(u, 90),
                      fmt("one_over_e_in > %s at beta*dt=%g", u.c_str(), v));
      }
    }
  }
  const double dt = seconds_since(t0);
  out.notes.push_back(fmt("     %.1f s", dt));
  return out;
}

double criterion7_seconds = 0.0;

Outcome criterion8() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = parse_config(std::string());
  cfg.sim.mode = Mode::PreTrip;
  cfg.sim.delta_t = 20;
  const Pipeline p = prepare_pipeline(cfg);
  const auto r = sweep(p, "beta_delta_t", {30, 45, 60, 75, 90}, {"one_over_e_pre"});
  report_cells(out, r);
  out.check(runs_conserve(r), "runs conserve orders and respect beta");
  std::vector<double> means;
  for (const auto& c : r.cells) means.push_back(c.profit.mean);
  const double rho = spearman(r.values, means);
  out.check(rho >= 0.6, fmt("Spearman(beta*dt, mean profit) %.3f >= 0.6", rho));
  const double dt = seconds_since(t0);
  out.check(criterion7_seconds + dt < 900.0, fmt("criteria 7 + 8: %.1f s < 900 s", criterion7_seconds + dt));
  return out;
}

// ---- criterion 9 -----------------------------------------------------------

Outcome criterion9() {
  Outcome out;
  ExperimentConfig cfg = parse_config(
      "[sim]\nt_start = 25200\nt_end = 32400\n[data]\nnum_orders = 3000\nnum_drivers = 60\n"
      "[training]\nseeds = 2\nmin_samples = 5\n");
  const Pipeline p = prepare_pipeline(cfg);
  struct Case {
    Policy policy;
    Mode mode;
    double dt;
  };
  const std::vector<Case> cases{{Policy::UniformBase, Mode::PreTrip, 10}, {Policy::OneOverEPre, Mode::PreTrip, 10},
                                {Policy::BIPre, Mode::PreTrip, 20},       {Policy::WaitToDeadline, Mode::PreTrip, 30},
                                {Policy::UniformBase, Mode::InTrip, 4},   {Policy::OneOverEIn, Mode::InTrip, 2}};
  for (const auto& k : cases) {
    for (std::uint64_t seed : {1u, 2u}) {
      SimConfig c = cfg.sim;
      c.policy = k.policy;
      c.mode = k.mode;
      c.delta_t = k.dt;
      c.beta = cfg.beta_for(k.dt);
      c.seed = seed;
      std::optional<ValueTables> vt;
      if (k.policy == Policy::BIPre) vt = train_tables(p, c);
      const World w = make_world(p, seed);
      const Metrics a = run_once(p, c, w, vt ? &*vt : nullptr);
      const Metrics b = run_once(p, c, make_world(p, seed), vt ? &*vt : nullptr);
      const auto in_horizon = std::count_if(w.orders.begin(), w.orders.end(), [&](const Order& o) {
        return o.raise_time >= c.t_start && o.raise_time < c.t_end;
      });
      const bool conserved =
          a.dispatched_orders + a.canceled_orders + a.active_at_end == a.raised && a.raised == in_horizon;
      out.check(a == b && conserved && a.max_window <= c.beta,
                fmt("%-16s %s dt=%g seed %d: identical %d, conserved %d, max window %d <= beta %d", to_string(k.policy),
                    to_string(k.mode), k.dt, static_cast<int>(seed), a == b, conserved, a.max_window, c.beta));
    }
  }
  return out;
}

std::set<int> parse_selection(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    const int lo = std::stoi(item.substr(0, dash));
    const int hi = dash == std::string::npos ? lo : std::stoi(item.substr(dash + 1));
    for (int i = lo; i <= hi; ++i) out.insert(i);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::set<int> selected = parse_selection(argc > 1 ? argv[1] : "1-9");
  const std::vector<std::pair<int, std::function<Outcome()>>> all{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
      {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, criterion9}};
  const char* titles[] = {"",
                          "clustering validity",
                          "graph weights vs pairwise count",
                          "1/e stopping rule",
                          "backward-induction table",
                          "offline optimum dominance",
                          "hardness instances",
                          "profit vs uniform baselines",
                          "profit trend in beta*dt",
                          "determinism and conservation"};
  bool ok = true;
  for (const auto& [id, run] : all) {
    if (!selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    if (id == 7) criterion7_seconds = dt;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << titles[id]
              << fmt("  (%.1f s)", dt) << '\n';
    for (const auto& n : o.notes) std::cout << "  " << n << '\n';
    std::cout.flush();
    ok = ok && o.pass;
  }
  return ok ? 0 : 1;
}
