#pragma once

// Experiment orchestration: world construction, value-table training, seeded
// sweeps on a worker pool, paired statistics and SVG charts.

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dispatchlab/adversarial.hpp"
#include "dispatchlab/config.hpp"
#include "dispatchlab/datagen.hpp"
#include "dispatchlab/sharegraph.hpp"
#include "dispatchlab/simulator.hpp"
#include "dispatchlab/spatial_cluster.hpp"

namespace dispatchlab {

// ---- worker pool -----------------------------------------------------------

/// DISPATCHLAB_THREADS when set to a positive integer, else the hardware count.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DISPATCHLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(0..n-1) on a bounded pool. The exception of the lowest failing index
/// is rethrown after all workers stop.
template <typename F>
void parallel_for(std::size_t n, F&& f, unsigned workers = worker_count()) {
  if (n == 0) return;
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---- statistics ------------------------------------------------------------

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  return s;
}

struct PairedTest {
  std::size_t n = 0;
  double mean_diff = 0.0;
  double t = 0.0;
  double p = 1.0;  // one-sided, H1: mean(a - b) > 0
};

inline PairedTest paired_t_test_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("paired test needs equal-length samples");
  PairedTest r;
  r.n = a.size();
  if (r.n < 2) throw std::invalid_argument("paired test needs at least two pairs");
  std::vector<double> d(r.n);
  for (std::size_t i = 0; i < r.n; ++i) d[i] = a[i] - b[i];
  const Summary s = summarize(d);
  r.mean_diff = s.mean;
  if (s.stderr_ == 0.0) {
    r.t = s.mean > 0 ? std::numeric_limits<double>::infinity() : (s.mean < 0 ? -std::numeric_limits<double>::infinity() : 0.0);
    r.p = s.mean > 0 ? 0.0 : 1.0;
    return r;
  }
  r.t = s.mean / s.stderr_;
  const boost::math::students_t dist(static_cast<double>(r.n - 1));
  r.p = boost::math::cdf(boost::math::complement(dist, r.t));
  return r;
}

/// Ranks starting at 1; ties share their average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

/// Pearson correlation of average ranks; 0 when either side is constant.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman needs equal-length samples");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---- pipeline --------------------------------------------------------------

/// Everything shared by the runs of one experiment.
struct Pipeline {
  ExperimentConfig cfg;
  HexGrid grid;
  Region region;
  std::vector<Order> history;
  std::optional<std::vector<Order>> file_orders;
  SpatialShareabilityGraph graph;
  ClusteringResult clustering;
  ClusterMap clusters;
};

/// Smallest region around cell (0, 0) holding every endpoint.
inline Region covering_region(std::span<const Order> orders) {
  int radius = 0;
  for (const Order& o : orders) {
    radius = std::max({radius, hex_distance({0, 0}, o.origin), hex_distance({0, 0}, o.dest)});
  }
  return Region{{0, 0}, radius};
}

inline std::vector<Order> read_orders_file(const std::string& path, const HexGrid& grid) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open orders file '" + path + "'");
  try {
    return load_orders(in, grid);
  } catch (const csv::ParseError& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline Pipeline prepare_pipeline(const ExperimentConfig& cfg) {
  Pipeline p{cfg, HexGrid(cfg.data.hex_edge_km, {cfg.data.origin_lat, cfg.data.origin_lon}), {}, {}, {}, {}, {}, {}};
  if (cfg.data.orders_file) {
    p.file_orders = read_orders_file(*cfg.data.orders_file, p.grid);
    p.history = cfg.data.history_file ? read_orders_file(*cfg.data.history_file, p.grid) : *p.file_orders;
    std::vector<Order> all = p.history;
    all.insert(all.end(), p.file_orders->begin(), p.file_orders->end());
    p.region = covering_region(all);
  } else {
    p.region = cfg.profile.region;
    p.history = cfg.data.history_file ? read_orders_file(*cfg.data.history_file, p.grid)
                                      : generate_orders(cfg.profile, cfg.data.history_orders, cfg.data.history_seed);
  }
  p.graph = build_graph(p.history, cfg.sim.shareability);
  p.clustering = spatial_clustering(p.graph, cfg.cluster.theta);
  p.clusters = ClusterMap::from_clusters(p.region, p.clustering.clusters, cfg.cluster.min_cells);
  return p;
}

/// Orders and fleet for one seed. Synthetic orders are redrawn per seed; file
/// orders stay fixed and only the fleet placement varies.
inline World make_world(const Pipeline& p, std::uint64_t seed) {
  World w;
  w.region = p.region;
  w.clusters = p.clusters;
  w.cell_spacing_km = p.grid.center_spacing_km();
  const auto& d = p.cfg.data;
  if (p.file_orders) {
    w.orders = *p.file_orders;
    rng::Engine e(seed, rng::Tag::DriverGen, 1);
    const auto& pool = p.history.empty() ? *p.file_orders : p.history;
    for (std::size_t i = 0; i < d.num_drivers; ++i) {
      Driver drv;
      drv.id = i + 1;
      drv.capacity = d.driver_capacity;
      drv.location = pool.empty() ? p.region.center : pool[e.below(pool.size())].origin;
      w.drivers.push_back(drv);
    }
  } else {
    w.orders = generate_orders(p.cfg.profile, d.num_orders, seed);
    w.drivers = generate_drivers(p.cfg.profile, d.num_drivers, seed, d.driver_capacity);
  }
  return w;
}

inline CancellationModel hazard_for(const Pipeline& p, double delta_t) {
  if (p.history.empty()) return CancellationModel{delta_t, {}};
  return estimate_cancellation_hazard(p.history, delta_t);
}

/// Config of one sweep cell.
inline SimConfig sim_for(const ExperimentConfig& cfg, const PolicySpec& spec, const std::string& variable,
                         double value) {
  SimConfig c = cfg.sim;
  c.policy = spec.policy;
  c.record_events = false;
  c.record_increments = false;
  double bdt = cfg.beta_delta_t;
  if (variable == "delta_t") {
    c.delta_t = value;
  } else if (variable == "beta_delta_t") {
    bdt = value;
  } else {
    throw std::invalid_argument("unknown sweep variable '" + variable + "'");
  }
  if (spec.delta_t) c.delta_t = *spec.delta_t;
  c.beta = std::max(1, static_cast<int>(std::floor(bdt / c.delta_t + 1e-9)));
  return c;
}

// ---- value tables ----------------------------------------------------------

inline void write_value_tables(std::ostream& os, const ValueTables& vt) {
  os << "cluster,bucket,offset,v_bar,sample_count\n";
  os.precision(17);
  for (const auto& [key, t] : vt.tables) {
    for (int k = 1; k <= t.beta; ++k) {
      os << key.first << ',' << key.second << ',' << k << ',' << t.at(k) << ',' << t.samples_at(k) << '\n';
    }
  }
}

inline ValueTables read_value_tables(std::istream& in, int bucket_seconds, std::size_t min_samples) {
  csv::Reader reader(in, "cluster,bucket,offset,v_bar,sample_count");
  ValueTables vt;
  vt.bucket_seconds = bucket_seconds;
  vt.min_samples = min_samples;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    const std::pair<int, int> key{csv::parse_number<int>(f[0], line, "cluster"), csv::parse_number<int>(f[1], line, "bucket")};
    auto& t = vt.tables[key];
    const int k = csv::parse_number<int>(f[2], line, "offset");
    if (k != t.beta + 1) throw csv::ParseError(line, "offsets must run 1, 2, ... within each table");
    t.v_bar.push_back(csv::parse_number<double>(f[3], line, "v_bar"));
    t.sample_counts.push_back(csv::parse_number<std::size_t>(f[4], line, "sample_count"));
    t.beta = k;
  }
  if (vt.tables.empty()) throw std::invalid_argument("value table file is empty");
  return vt;
}

/// Increment log of wait-to-deadline runs on the training seeds.
inline std::vector<IncrementRecord> training_increments(const Pipeline& p, SimConfig c) {
  c.policy = Policy::WaitToDeadline;
  c.record_increments = true;
  c.record_events = false;
  const GreedyEngine engine(c.pricing, c.shareability);
  const CancellationModel cancel = hazard_for(p, c.delta_t);
  const auto& t = p.cfg.training;
  std::vector<std::vector<IncrementRecord>> logs(static_cast<std::size_t>(t.seeds));
  parallel_for(logs.size(), [&](std::size_t i) {
    SimConfig ci = c;
    ci.seed = t.seed_offset + i;
    const World w = make_world(p, ci.seed);
    Simulation sim(ci, w, cancel, engine);
    sim.run();
    logs[i] = sim.increments();
  });
  std::vector<IncrementRecord> all;
  for (auto& l : logs) all.insert(all.end(), l.begin(), l.end());
  return all;
}

inline ValueTables tables_from_increments(std::span<const IncrementRecord> log, int beta, const TrainingConfig& t) {
  const auto paths = complete_windows(log, beta);
  if (paths.empty()) throw std::runtime_error("training produced no complete windows of " + std::to_string(beta) + " units");
  return build_value_tables(paths, beta, t.bucket_seconds, t.min_samples);
}

inline ValueTables train_tables(const Pipeline& p, const SimConfig& c) {
  if (p.cfg.training.tables_file) {
    std::ifstream in(*p.cfg.training.tables_file);
    if (!in) throw std::runtime_error("cannot open tables file '" + *p.cfg.training.tables_file + "'");
    return read_value_tables(in, p.cfg.training.bucket_seconds, p.cfg.training.min_samples);
  }
  return tables_from_increments(training_increments(p, c), c.beta, p.cfg.training);
}

/// One evaluation run.
inline Metrics run_once(const Pipeline& p, const SimConfig& c, const World& w, const ValueTables* tables) {
  const GreedyEngine engine(c.pricing, c.shareability);
  return run(c, w, hazard_for(p, c.delta_t), engine, tables);
}

// ---- sweeps ----------------------------------------------------------------

struct RunRecord {
  std::string policy;
  double value = 0.0;
  std::uint64_t seed = 0;
  double delta_t = 0.0;
  int beta = 0;
  Metrics metrics;
};

struct SweepCell {
  std::string policy;
  double value = 0.0;
  Summary profit;
  Summary served;
  Summary canceled;
  Summary pooled;
};

struct Comparison {
  std::string a;
  std::string b;
  double value = 0.0;
  PairedTest test;
};

struct SweepResult {
  std::string variable;
  std::vector<double> values;
  std::vector<std::string> policies;
  std::vector<RunRecord> runs;  // policy-major, then value, then seed
  std::vector<SweepCell> cells;

  std::vector<double> profits(const std::string& policy, double value) const {
    std::vector<double> out;
    for (const auto& r : runs) {
      if (r.policy == policy && r.value == value) out.push_back(r.metrics.total_profit);
    }
    return out;
  }

  Comparison compare(const std::string& a, const std::string& b, double value) const {
    const auto pa = profits(a, value);
    const auto pb = profits(b, value);
    return {a, b, value, paired_t_test_greater(pa, pb)};
  }
};

inline SweepResult run_sweep(const Pipeline& p, const SweepConfig& spec) {
  SweepResult out;
  out.variable = spec.variable;
  out.values = spec.values;
  for (const auto& ps : spec.policies) out.policies.push_back(ps.label);

  std::vector<World> worlds(spec.seeds.size());
  parallel_for(worlds.size(), [&](std::size_t i) { worlds[i] = make_world(p, spec.seeds[i]); });

  // Value tables per distinct (delta_t, beta, mode) used by bi_pre cells.
  std::map<std::tuple<double, int, int>, ValueTables> tables;
  std::vector<SimConfig> needed;
  for (const auto& ps : spec.policies) {
    if (ps.policy != Policy::BIPre) continue;
    for (double v : spec.values) {
      const SimConfig c = sim_for(p.cfg, ps, spec.variable, v);
      const auto key = std::make_tuple(c.delta_t, c.beta, static_cast<int>(c.mode));
      if (!tables.count(key)) {
        tables[key];
        needed.push_back(c);
      }
    }
  }
  for (const SimConfig& c : needed) tables[{c.delta_t, c.beta, static_cast<int>(c.mode)}] = train_tables(p, c);

  for (const auto& ps : spec.policies) {
    for (double v : spec.values) {
      const SimConfig c = sim_for(p.cfg, ps, spec.variable, v);
      for (std::uint64_t s : spec.seeds) out.runs.push_back({ps.label, v, s, c.delta_t, c.beta, {}});
    }
  }
  std::vector<PolicySpec> spec_of;
  for (const auto& ps : spec.policies) {
    for (std::size_t k = 0; k < spec.values.size() * spec.seeds.size(); ++k) spec_of.push_back(ps);
  }
  parallel_for(out.runs.size(), [&](std::size_t i) {
    RunRecord& r = out.runs[i];
    SimConfig c = sim_for(p.cfg, spec_of[i], spec.variable, r.value);
    c.seed = r.seed;
    const std::size_t wi = i % spec.seeds.size();
    const ValueTables* vt = nullptr;
    if (c.policy == Policy::BIPre) vt = &tables.at({c.delta_t, c.beta, static_cast<int>(c.mode)});
    r.metrics = run_once(p, c, worlds[wi], vt);
  });

  for (const auto& label : out.policies) {
    for (double v : spec.values) {
      std::vector<double> profit, served, canceled, pooled;
      for (const auto& r : out.runs) {
        if (r.policy != label || r.value != v) continue;
        profit.push_back(r.metrics.total_profit);
        served.push_back(static_cast<double>(r.metrics.served_orders));
        canceled.push_back(static_cast<double>(r.metrics.canceled_orders));
        pooled.push_back(static_cast<double>(r.metrics.pooled_orders));
      }
      out.cells.push_back({label, v, summarize(profit), summarize(served), summarize(canceled), summarize(pooled)});
    }
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "policy,variable,value,n,mean_profit,stderr_profit,mean_served,mean_canceled,mean_pooled\n";
  os.precision(12);
  for (const auto& c : r.cells) {
    os << c.policy << ',' << r.variable << ',' << c.value << ',' << c.profit.n << ',' << c.profit.mean << ','
       << c.profit.stderr_ << ',' << c.served.mean << ',' << c.canceled.mean << ',' << c.pooled.mean << '\n';
  }
}

inline void write_runs_csv(std::ostream& os, const SweepResult& r) {
  os << "policy,variable,value,seed,delta_t,beta,total_profit,raised,dispatched,canceled,served,active_at_end,"
        "pooled,dispatch_ops,idle_resets,max_window\n";
  os.precision(12);
  for (const auto& x : r.runs) {
    const Metrics& m = x.metrics;
    os << x.policy << ',' << r.variable << ',' << x.value << ',' << x.seed << ',' << x.delta_t << ',' << x.beta << ','
       << m.total_profit << ',' << m.raised << ',' << m.dispatched_orders << ',' << m.canceled_orders << ','
       << m.served_orders << ',' << m.active_at_end << ',' << m.pooled_orders << ',' << m.dispatch_ops << ','
       << m.idle_resets << ',' << m.max_window << '\n';
  }
}

inline void write_comparisons_csv(std::ostream& os, std::span<const Comparison> cs) {
  os << "policy_a,policy_b,value,n,mean_diff,t,p_one_sided\n";
  os.precision(12);
  for (const auto& c : cs) {
    os << c.a << ',' << c.b << ',' << c.value << ',' << c.test.n << ',' << c.test.mean_diff << ',' << c.test.t << ','
       << c.test.p << '\n';
  }
}

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

/// Mean profit per policy against the swept variable, with stderr bars.
inline void write_sweep_svg(std::ostream& os, const SweepResult& r, const std::string& title) {
  const double W = 640, H = 420, L = 80, R = 170, T = 40, B = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& c : r.cells) {
    lo = std::min(lo, c.profit.mean - c.profit.stderr_);
    hi = std::max(hi, c.profit.mean + c.profit.stderr_);
  }
  if (r.cells.empty()) lo = 0, hi = 1;
  if (hi <= lo) hi = lo + 1;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double xmin = r.values.empty() ? 0 : *std::min_element(r.values.begin(), r.values.end());
  double xmax = r.values.empty() ? 1 : *std::max_element(r.values.begin(), r.values.end());
  if (xmax <= xmin) xmax = xmin + 1;
  auto X = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto Y = [&](double v) { return T + (hi - v) / (hi - lo) * (H - T - B); };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                            "#e377c2", "#7f7f7f"};
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << svg_escape(title) << "</text>\n";
  os << "<g class=\"axes\" stroke=\"black\"><line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
     << "\" y2=\"" << H - B << "\"/><line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\"/></g>\n";
  os << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (double v : r.values) {
    os << "<text x=\"" << X(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << v << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    os << "<text x=\"" << L - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << std::llround(v) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"12\">" << svg_escape(r.variable) << " (s)</text>\n";
  os << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 18 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">mean total profit</text>\n";
  for (std::size_t pi = 0; pi < r.policies.size(); ++pi) {
    const char* color = kColors[pi % std::size(kColors)];
    os << "<g class=\"series\" data-policy=\"" << svg_escape(r.policies[pi]) << "\" stroke=\"" << color
       << "\" fill=\"" << color << "\">\n<polyline fill=\"none\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& c : r.cells) {
      if (c.policy != r.policies[pi]) continue;
      os << (first ? "" : " ") << X(c.value) << ',' << Y(c.profit.mean);
      first = false;
    }
    os << "\"/>\n";
    for (const auto& c : r.cells) {
      if (c.policy != r.policies[pi]) continue;
      os << "<line x1=\"" << X(c.value) << "\" y1=\"" << Y(c.profit.mean - c.profit.stderr_) << "\" x2=\""
         << X(c.value) << "\" y2=\"" << Y(c.profit.mean + c.profit.stderr_) << "\"/>";
      os << "<circle cx=\"" << X(c.value) << "\" cy=\"" << Y(c.profit.mean) << "\" r=\"3\"/>\n";
    }
    const double ly = T + 14 + 18.0 * static_cast<double>(pi);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 32 << "\" y2=\"" << ly
       << "\" stroke-width=\"2\"/><text x=\"" << W - R + 38 << "\" y=\"" << ly + 4
       << "\" stroke=\"none\" fill=\"black\" font-family=\"sans-serif\" font-size=\"11\">"
       << svg_escape(r.policies[pi]) << "</text>\n</g>\n";
  }
  os << "</svg>\n";
}

// ---- adversarial report ----------------------------------------------------

struct AdversaryRow {
  std::string family;
  int n = 0;
  std::string policy;
  double mean_profit = 0.0;
  double opt_mean = 0.0;
  double ratio = 0.0;
  std::string opt_source;  // exhaustive or closed_form
};

inline std::vector<double> adversary_profits(const std::string& family, int n) {
  std::vector<double> p(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) p[static_cast<std::size_t>(k - 1)] = family == "geometric" ? std::ldexp(1.0, k) : k;
  return p;
}

inline constexpr int kExhaustiveAdversaryN = 12;

/// Mean profit of each policy over distribution X, against OPT. OPT is searched
/// exhaustively up to kExhaustiveAdversaryN units and uses the closed form beyond.
inline std::vector<AdversaryRow> distribution_x_report(std::span<const int> ns) {
  std::vector<AdversaryRow> rows;
  for (const std::string family : {"linear", "geometric"}) {
    for (int n : ns) {
      const auto profits = adversary_profits(family, n);
      const auto xs = gen_distribution_X(n, profits);
      double opt = 0.0;
      std::string source = "closed_form";
      if (n <= kExhaustiveAdversaryN) {
        source = "exhaustive";
        for (const auto& inst : xs) opt += offline_opt(make_scenario(inst, Policy::WaitToDeadline, n)).profit;
        opt /= n;
        if (std::abs(opt - expected_opt_distribution_X(profits)) > 1e-9 * std::max(1.0, opt)) {
          throw std::logic_error("offline optimum disagrees with the closed form on distribution X");
        }
      } else {
        opt = expected_opt_distribution_X(profits);
      }
      // Tables for bi_pre trained on the distribution's own wait-to-deadline windows.
      std::vector<std::vector<double>> paths;
      for (const auto& inst : xs) {
        auto s = make_scenario(inst, Policy::WaitToDeadline, n);
        s.config.record_increments = true;
        Simulation sim(s.config, s.world, s.cancel, *s.engine);
        sim.run();
        for (const auto& w : complete_windows(sim.increments(), n)) paths.push_back(w.increments);
      }
      auto vt = std::make_shared<ValueTables>();
      vt->tables[{-1, -1}] = estimate_value_table(paths, n);
      for (Policy p : {Policy::UniformBase, Policy::OneOverEPre, Policy::BIPre, Policy::WaitToDeadline}) {
        double sum = 0.0;
        for (const auto& inst : xs) {
          auto s = make_scenario(inst, p, n);
          s.tables = vt;
          sum += run_scenario(s).total_profit;
        }
        rows.push_back({family, n, to_string(p), sum / n, opt, sum / n / opt, source});
      }
    }
  }
  return rows;
}

inline void write_adversary_csv(std::ostream& os, std::span<const AdversaryRow> rows) {
  os << "family,n,policy,mean_profit,opt_mean,ratio,opt_source\n";
  os.precision(12);
  for (const auto& r : rows) {
    os << r.family << ',' << r.n << ',' << r.policy << ',' << r.mean_profit << ',' << r.opt_mean << ',' << r.ratio
       << ',' << r.opt_source << '\n';
  }
}

inline void write_instance_csv(std::ostream& os, const std::string& name, const AdversarialInstance& inst) {
  os.precision(12);
  for (const Order& o : inst.orders) {
    os << name << ",order," << o.id << ',' << o.raise_time << ',';
    if (o.patience) os << *o.patience;
    os << '\n';
  }
  for (const auto& [id, v] : inst.engine->solo_profit) os << name << ",solo," << id << ',' << v << ",\n";
  for (const auto& [k, v] : inst.engine->pair_profit) os << name << ",pair," << k.first << ' ' << k.second << ',' << v << ",\n";
}

}  // namespace dispatchlab
