#pragma once

// Subcommands behind the dispatchlab CLI. Each writes its outputs under `out`
// and returns a process exit code: 0 iff every output was written and every
// invariant check passed.

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "dispatchlab/adversarial.hpp"
#include "dispatchlab/config.hpp"
#include "dispatchlab/datagen.hpp"
#include "dispatchlab/harness.hpp"
#include "dispatchlab/sharegraph.hpp"
#include "dispatchlab/simulator.hpp"
#include "dispatchlab/spatial_cluster.hpp"

namespace dispatchlab {

namespace cmd_detail {

inline std::ofstream open_out(const std::filesystem::path& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
  return os;
}

inline void write_clusters_csv(std::ostream& os, const ClusterSet& cs) {
  os << "q,r,cluster\n";
  for (std::size_t i = 0; i < cs.clusters.size(); ++i) {
    for (const CellId& c : cs.clusters[i].vertices()) os << c.q << ',' << c.r << ',' << i << '\n';
  }
}

inline void write_cluster_summary_csv(std::ostream& os, const ClusterSet& cs) {
  os << "cluster,cells,edges,total_weight,variance\n";
  os.precision(12);
  for (std::size_t i = 0; i < cs.clusters.size(); ++i) {
    const auto& g = cs.clusters[i];
    os << i << ',' << g.vertex_count() << ',' << g.edge_count() << ',' << g.total_weight() << ','
       << edge_weight_variance(g) << '\n';
  }
}

inline void write_variance_curve_csv(std::ostream& os, const VarianceReport& r) {
  os << "step,u_q,u_r,v_q,v_r,max_variance\n";
  os.precision(12);
  for (const auto& s : r.steps) {
    os << s.step << ',';
    if (s.deleted) {
      os << s.deleted->u.q << ',' << s.deleted->u.r << ',' << s.deleted->v.q << ',' << s.deleted->v.r;
    } else {
      os << ",,,";
    }
    os << ',' << s.max_variance << '\n';
  }
}

}  // namespace cmd_detail

/// Shareability graph, clusters, and variance curves of the historical orders.
inline int cmd_cluster(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = prepare_pipeline(cfg);
  const ClusterSet& cs = p.clustering.clusters;
  {
    auto os = cmd_detail::open_out(out, "graph.csv");
    write_graph_csv(os, p.graph);
  }
  {
    auto os = cmd_detail::open_out(out, "graph.dot");
    write_graph_dot(os, p.graph);
  }
  {
    auto os = cmd_detail::open_out(out, "clusters.csv");
    cmd_detail::write_clusters_csv(os, cs);
  }
  {
    auto os = cmd_detail::open_out(out, "cluster_summary.csv");
    cmd_detail::write_cluster_summary_csv(os, cs);
  }
  {
    auto os = cmd_detail::open_out(out, "variance_curve.csv");
    cmd_detail::write_variance_curve_csv(os, p.clustering.report);
  }
  {
    auto os = cmd_detail::open_out(out, "theta_curve.csv");
    os << "theta,clusters,max_variance,retained_weight\n";
    os.precision(12);
    for (double theta : cfg.cluster.theta_curve) {
      const auto r = spatial_clustering(p.graph, theta);
      os << theta << ',' << r.clusters.size() << ',' << r.clusters.max_variance() << ','
         << r.clusters.retained_weight() << '\n';
    }
  }
  int bad = 0;
  std::size_t cells = 0;
  for (const auto& c : cs.clusters) {
    cells += c.vertex_count();
    if (edge_weight_variance(c) > cfg.cluster.theta + 1e-9) ++bad;
    if (connected_components(c).size() != 1) ++bad;
  }
  if (cells != p.graph.vertex_count()) ++bad;
  log << "orders " << p.history.size() << ", cells " << p.graph.vertex_count() << ", edges " << p.graph.edge_count()
      << ", clusters " << cs.size() << ", max variance " << cs.max_variance() << '\n';
  if (bad) log << "invariant violations: " << bad << '\n';
  return bad ? 1 : 0;
}

/// One run at [sim] seed.
inline int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = prepare_pipeline(cfg);
  const World w = make_world(p, cfg.sim.seed);
  std::optional<ValueTables> tables;
  if (cfg.sim.policy == Policy::BIPre) tables = train_tables(p, cfg.sim);
  const GreedyEngine engine(cfg.sim.pricing, cfg.sim.shareability);
  Simulation sim(cfg.sim, w, hazard_for(p, cfg.sim.delta_t), engine, tables ? &*tables : nullptr);
  const Metrics& m = sim.run();
  {
    auto os = cmd_detail::open_out(out, "metrics.csv");
    write_metrics_csv(os, m);
  }
  {
    auto os = cmd_detail::open_out(out, "cluster_metrics.csv");
    write_cluster_metrics_csv(os, m);
  }
  {
    auto os = cmd_detail::open_out(out, "intervals.csv");
    write_interval_csv(os, m);
  }
  if (cfg.sim.record_events) {
    auto os = cmd_detail::open_out(out, "events.csv");
    write_events_csv(os, sim.events());
  }
  if (cfg.sim.record_increments) {
    auto os = cmd_detail::open_out(out, "increments.csv");
    write_increments_csv(os, sim.increments());
  }
  const bool conserved = m.dispatched_orders + m.canceled_orders + m.active_at_end == m.raised;
  const bool bounded = m.max_window <= cfg.sim.beta;
  log << to_string(cfg.sim.policy) << " seed " << cfg.sim.seed << ": profit " << m.total_profit << ", raised "
      << m.raised << ", dispatched " << m.dispatched_orders << ", canceled " << m.canceled_orders << '\n';
  if (!conserved) log << "conservation violated\n";
  if (!bounded) log << "a dispatching interval exceeded beta\n";
  return conserved && bounded ? 0 : 1;
}

inline int cmd_sweep(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const Pipeline p = prepare_pipeline(cfg);
  const SweepResult r = run_sweep(p, cfg.sweep);
  std::vector<Comparison> cs;
  for (const auto& [a, b] : cfg.sweep.compare) {
    for (double v : r.values) cs.push_back(r.compare(a, b, v));
  }
  {
    auto os = cmd_detail::open_out(out, "sweep.csv");
    write_sweep_csv(os, r);
  }
  {
    auto os = cmd_detail::open_out(out, "runs.csv");
    write_runs_csv(os, r);
  }
  {
    auto os = cmd_detail::open_out(out, "comparisons.csv");
    write_comparisons_csv(os, cs);
  }
  {
    auto os = cmd_detail::open_out(out, "sweep.svg");
    write_sweep_svg(os, r, "mean total profit vs " + r.variable + " (" + to_string(cfg.sim.mode) + ")");
  }
  int bad = 0;
  for (const auto& run : r.runs) {
    const Metrics& m = run.metrics;
    if (m.dispatched_orders + m.canceled_orders + m.active_at_end != m.raised || m.max_window > run.beta) ++bad;
  }
  for (const auto& c : r.cells) {
    log << c.policy << ' ' << r.variable << '=' << c.value << ": " << c.profit.mean << " +- " << c.profit.stderr_
        << '\n';
  }
  for (const auto& c : cs) log << c.a << " > " << c.b << " at " << c.value << ": p=" << c.test.p << '\n';
  if (bad) log << "invariant violations: " << bad << '\n';
  return bad ? 1 : 0;
}

/// Value tables from a logged increment file, or from fresh training runs.
inline int cmd_estimate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  std::vector<IncrementRecord> incs;
  if (cfg.estimate.increments_file) {
    std::ifstream in(*cfg.estimate.increments_file);
    if (!in) throw std::runtime_error("cannot open increments file '" + *cfg.estimate.increments_file + "'");
    incs = read_increments_csv(in);
  } else {
    const Pipeline p = prepare_pipeline(cfg);
    incs = training_increments(p, cfg.sim);
    auto os = cmd_detail::open_out(out, "increments.csv");
    write_increments_csv(os, incs);
  }
  const ValueTables vt = tables_from_increments(incs, cfg.sim.beta, cfg.training);
  {
    auto os = cmd_detail::open_out(out, "value_tables.csv");
    write_value_tables(os, vt);
  }
  {
    auto os = cmd_detail::open_out(out, "value_table.csv");
    write_value_table(os, vt.tables.at({-1, -1}));
  }
  log << "windows " << vt.tables.at({-1, -1}).samples_at(1) << ", tables " << vt.tables.size() << ", beta "
      << cfg.sim.beta << '\n';
  return 0;
}

/// Hard-instance suite and ratio report.
inline int cmd_adversary(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const auto& a = cfg.adversary;
  int bad = 0;
  const auto single = gen_single_cancel_instance(a.profit_r, std::max(4, a.beta + 1));
  {
    auto os = cmd_detail::open_out(out, "single_cancel.csv");
    os << "policy,profit,opt_profit\n";
    auto base = make_scenario(single, Policy::WaitToDeadline, a.beta);
    const double opt = offline_opt(base).profit;
    auto tables = std::make_shared<ValueTables>();
    ValueEstimateTable t;
    t.beta = a.beta;
    t.v_bar.assign(static_cast<std::size_t>(a.beta), a.profit_r);
    t.sample_counts.assign(static_cast<std::size_t>(a.beta), 1);
    tables->tables[{-1, -1}] = t;
    base.tables = tables;
    for (Policy p : {Policy::UniformBase, Policy::OneOverEPre, Policy::BIPre, Policy::WaitToDeadline}) {
      const double v = run_scenario(base, p).total_profit;
      os << to_string(p) << ',' << v << ',' << opt << '\n';
      if (v > opt + 1e-9) ++bad;
    }
  }
  const auto rows = distribution_x_report(a.n_values);
  {
    auto os = cmd_detail::open_out(out, "distribution_x.csv");
    write_adversary_csv(os, rows);
  }
  {
    auto os = cmd_detail::open_out(out, "instances.csv");
    os << "instance,kind,key,value,patience\n";
    write_instance_csv(os, "single_cancel", single);
    if (!a.n_values.empty()) {
      const int n = a.n_values.front();
      const auto xs = gen_distribution_X(n, adversary_profits("linear", n));
      for (std::size_t i = 0; i < xs.size(); ++i) {
        write_instance_csv(os, "X" + std::to_string(i + 1) + "_n" + std::to_string(n), xs[i]);
      }
    }
  }
  for (const auto& r : rows) {
    if (r.mean_profit > r.opt_mean + 1e-9) ++bad;
    log << r.family << " n=" << r.n << ' ' << r.policy << ": ratio " << r.ratio << '\n';
  }
  if (bad) log << "policies beat the offline optimum: " << bad << '\n';
  return bad ? 1 : 0;
}

/// Synthetic evaluation orders (seed [sim] seed), history and fleet.
inline int cmd_gen_data(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
  const HexGrid grid(cfg.data.hex_edge_km, {cfg.data.origin_lat, cfg.data.origin_lon});
  const auto orders = generate_orders(cfg.profile, cfg.data.num_orders, cfg.sim.seed);
  const auto history = generate_orders(cfg.profile, cfg.data.history_orders, cfg.data.history_seed);
  const auto drivers = generate_drivers(cfg.profile, cfg.data.num_drivers, cfg.sim.seed, cfg.data.driver_capacity);
  {
    auto os = cmd_detail::open_out(out, "orders.csv");
    write_orders(os, orders, grid);
  }
  {
    auto os = cmd_detail::open_out(out, "history.csv");
    write_orders(os, history, grid);
  }
  {
    auto os = cmd_detail::open_out(out, "drivers.csv");
    os << "driver_id,q,r,capacity\n";
    for (const auto& d : drivers) os << d.id << ',' << d.location.q << ',' << d.location.r << ',' << d.capacity << '\n';
  }
  log << "orders " << orders.size() << ", history " << history.size() << ", drivers " << drivers.size() << '\n';
  return 0;
}

}  // namespace dispatchlab
