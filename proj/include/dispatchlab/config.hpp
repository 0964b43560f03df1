#pragma once

// INI experiment configuration. Every section and key is optional; unknown
// sections or keys are rejected so typos fail loudly.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispatchlab/csv.hpp"
#include "dispatchlab/datagen.hpp"
#include "dispatchlab/simulator.hpp"

namespace dispatchlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A sweep column: a policy, optionally pinned to its own delta_t.
struct PolicySpec {
  Policy policy = Policy::UniformBase;
  std::optional<double> delta_t;
  std::string label;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// "uniform", "uniform:dt=4".
inline PolicySpec parse_policy_spec(const std::string& text) {
  PolicySpec s;
  s.label = std::string(csv::trim(text));
  const auto colon = s.label.find(':');
  s.policy = parse_policy(s.label.substr(0, colon));
  if (colon != std::string::npos) {
    const std::string opt = s.label.substr(colon + 1);
    if (opt.rfind("dt=", 0) != 0) throw ConfigError("policy option must be dt=<seconds>: '" + text + "'");
    try {
      s.delta_t = std::stod(opt.substr(3));
    } catch (const std::exception&) {
      throw ConfigError("bad dt in policy '" + text + "'");
    }
    if (!(*s.delta_t > 0)) throw ConfigError("policy dt must be positive: '" + text + "'");
  }
  return s;
}

struct DataConfig {
  std::optional<std::string> orders_file;   // evaluation orders; synthetic when absent
  std::optional<std::string> history_file;  // clustering and hazard input; defaults to orders_file
  std::size_t num_orders = 20000;
  std::size_t history_orders = 5000;
  std::uint64_t history_seed = 424242;
  std::size_t num_drivers = 300;
  int driver_capacity = 2;
  double hex_edge_km = 0.8;
  double origin_lat = 39.9042;
  double origin_lon = 116.4074;
};

struct ClusterConfig {
  double theta = 50.0;
  std::size_t min_cells = 3;  // smaller clusters join the background
  std::vector<double> theta_curve{10, 25, 50, 100, 200, 400};
};

struct TrainingConfig {
  int seeds = 3;
  std::uint64_t seed_offset = 1000000;
  int bucket_seconds = 0;
  std::size_t min_samples = 30;
  std::optional<std::string> tables_file;  // precomputed tables instead of training runs
};

struct SweepConfig {
  std::string variable = "delta_t";  // or beta_delta_t
  std::vector<double> values{10, 20, 30};
  std::vector<PolicySpec> policies;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> compare;  // (a, b): is a > b?
};

struct AdversaryConfig {
  std::vector<int> n_values{5, 10, 20, 40};
  double profit_r = 5.0;
  int beta = 3;
};

struct EstimateConfig {
  std::optional<std::string> increments_file;
};

struct ExperimentConfig {
  SimConfig sim;
  double beta_delta_t = 90.0;  // seconds; beta follows unless [sim] beta is given
  bool beta_explicit = false;
  DataConfig data;
  IntensityProfile profile = default_city();
  ClusterConfig cluster;
  TrainingConfig training;
  SweepConfig sweep;
  AdversaryConfig adversary;
  EstimateConfig estimate;
  std::string out_dir = "out";

  ExperimentConfig() {
    sim.cancellation = CancellationSource::Hazard;
    sim.beta = beta_for(sim.delta_t);
    sweep.policies = {parse_policy_spec("uniform"), parse_policy_spec("one_over_e_pre"), parse_policy_spec("bi_pre")};
    for (std::uint64_t s = 1; s <= 20; ++s) sweep.seeds.push_back(s);
  }

  int beta_for(double delta_t) const {
    return std::max(1, static_cast<int>(std::floor(beta_delta_t / delta_t + 1e-9)));
  }
};

namespace config_detail {

using boost::property_tree::ptree;

template <typename T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
  const std::string v(csv::trim(raw));
  auto fail = [&]() -> T { throw ConfigError("[" + section + "] " + key + ": cannot parse '" + v + "'"); };
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    return fail();
  } else {
    try {
      return csv::parse_number<T>(v, 0, key);
    } catch (const std::exception&) {
      return fail();
    }
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& section, const std::string& key, const std::string& raw) {
  std::vector<T> out;
  for (auto part : csv::split(raw)) {
    const std::string item(csv::trim(part));
    if (item.empty()) continue;
    out.push_back(parse_value<T>(section, key, item));
  }
  return out;
}

/// "1-20" or "1,2,5".
inline std::vector<std::uint64_t> parse_seeds(const std::string& raw) {
  std::vector<std::uint64_t> out;
  for (auto part : csv::split(raw)) {
    const std::string item(csv::trim(part));
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_value<std::uint64_t>("sweep", "seeds", item));
      continue;
    }
    const auto lo = parse_value<std::uint64_t>("sweep", "seeds", item.substr(0, dash));
    const auto hi = parse_value<std::uint64_t>("sweep", "seeds", item.substr(dash + 1));
    if (hi < lo) throw ConfigError("[sweep] seeds: empty range '" + item + "'");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const ptree* tree) : name_(std::move(name)), tree_(tree) {}

  template <typename T>
  bool get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!tree_) return false;
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return false;
    out = parse_value<T>(name_, key, *v);
    return true;
  }

  template <typename T>
  bool get(const std::string& key, std::optional<T>& out) {
    T v{};
    if (!get(key, v)) return false;
    out = v;
    return true;
  }

  std::optional<std::string> raw(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }

  void finish() const {
    if (!tree_) return;
    for (const auto& [key, child] : *tree_) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  std::string name_;
  const ptree* tree_;
  std::set<std::string> seen_;
};

}  // namespace config_detail

inline ExperimentConfig parse_config(std::istream& in) {
  using config_detail::ptree;
  using config_detail::Section;
  ptree root;
  try {
    boost::property_tree::ini_parser::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const std::set<std::string> known{"sim", "pricing", "shareability", "data", "synth", "cluster",
                                    "training", "sweep", "adversary", "estimate", "output"};
  for (const auto& [name, child] : root) {
    if (!known.count(name)) {
      throw ConfigError(child.empty() ? "key '" + name + "' outside any section" : "unknown section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    auto it = root.find(name);
    return Section(name, it == root.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig c;
  {
    Section s = section("sim");
    s.get("delta_t", c.sim.delta_t);
    c.beta_explicit = s.get("beta", c.sim.beta);
    const bool bdt = s.get("beta_delta_t", c.beta_delta_t);
    if (c.beta_explicit && bdt) throw ConfigError("[sim] give beta or beta_delta_t, not both");
    if (!(c.beta_delta_t > 0)) throw ConfigError("[sim] beta_delta_t must be positive");
    if (!c.beta_explicit) c.sim.beta = c.beta_for(c.sim.delta_t);
    s.get("t_start", c.sim.t_start);
    s.get("t_end", c.sim.t_end);
    if (auto v = s.raw("policy")) c.sim.policy = parse_policy(std::string(csv::trim(*v)));
    if (auto v = s.raw("mode")) c.sim.mode = parse_mode(std::string(csv::trim(*v)));
    if (auto v = s.raw("cancellation")) {
      const std::string m(csv::trim(*v));
      if (m == "auto") {
        c.sim.cancellation = CancellationSource::Auto;
      } else if (m == "hazard") {
        c.sim.cancellation = CancellationSource::Hazard;
      } else {
        throw ConfigError("[sim] cancellation must be auto or hazard");
      }
    }
    s.get("seed", c.sim.seed);
    s.get("speed_kmh", c.sim.speed_kmh);
    s.get("record_events", c.sim.record_events);
    s.get("record_increments", c.sim.record_increments);
    s.finish();
  }
  {
    Section s = section("pricing");
    s.get("base_fare", c.sim.pricing.base_fare);
    s.get("fare_per_cell", c.sim.pricing.fare_per_cell);
    s.get("shared_discount", c.sim.pricing.shared_discount);
    s.get("driver_pay_per_cell", c.sim.pricing.driver_pay_per_cell);
    s.get("driver_base_pay", c.sim.pricing.driver_base_pay);
    s.finish();
  }
  {
    Section s = section("shareability");
    s.get("max_detour_frac", c.sim.shareability.max_detour_frac);
    s.get("max_copickup_cells", c.sim.shareability.max_copickup_cells);
    s.finish();
  }
  {
    Section s = section("data");
    s.get("orders_file", c.data.orders_file);
    s.get("history_file", c.data.history_file);
    s.get("num_orders", c.data.num_orders);
    s.get("history_orders", c.data.history_orders);
    s.get("history_seed", c.data.history_seed);
    s.get("num_drivers", c.data.num_drivers);
    s.get("driver_capacity", c.data.driver_capacity);
    s.get("hex_edge_km", c.data.hex_edge_km);
    s.get("origin_lat", c.data.origin_lat);
    s.get("origin_lon", c.data.origin_lon);
    if (c.data.driver_capacity < 1) throw ConfigError("[data] driver_capacity must be >= 1");
    s.finish();
  }
  {
    Section s = section("synth");
    int radius = c.profile.region.radius;
    s.get("region_radius", radius);
    if (radius < 0) throw ConfigError("[synth] region_radius must be >= 0");
    c.profile.region.radius = radius;
    s.get("decay", c.profile.decay);
    s.get("kernel_radius", c.profile.kernel_radius);
    s.get("cancel_fraction", c.profile.cancel_fraction);
    s.get("mean_cancel_wait_s", c.profile.mean_cancel_wait_s);
    double peak = 3.0, day = 1.0, night = 0.4;
    const bool a = s.get("peak", peak), b = s.get("day", day), d = s.get("night", night);
    if (a || b || d) c.profile.time_curve = two_peak_curve(peak, day, night);
    s.finish();
    try {
      c.profile.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("[synth] ") + e.what());
    }
  }
  {
    Section s = section("cluster");
    s.get("theta", c.cluster.theta);
    s.get("min_cells", c.cluster.min_cells);
    if (auto v = s.raw("theta_curve")) c.cluster.theta_curve = config_detail::parse_list<double>("cluster", "theta_curve", *v);
    if (c.cluster.theta < 0) throw ConfigError("[cluster] theta must be >= 0");
    s.finish();
    c.sim.theta = c.cluster.theta;
  }
  {
    Section s = section("training");
    s.get("seeds", c.training.seeds);
    s.get("seed_offset", c.training.seed_offset);
    s.get("bucket_seconds", c.training.bucket_seconds);
    s.get("min_samples", c.training.min_samples);
    s.get("tables_file", c.training.tables_file);
    if (c.training.seeds < 1) throw ConfigError("[training] seeds must be >= 1");
    s.finish();
  }
  {
    Section s = section("sweep");
    s.get("variable", c.sweep.variable);
    if (c.sweep.variable != "delta_t" && c.sweep.variable != "beta_delta_t") {
      throw ConfigError("[sweep] variable must be delta_t or beta_delta_t");
    }
    if (auto v = s.raw("values")) c.sweep.values = config_detail::parse_list<double>("sweep", "values", *v);
    if (auto v = s.raw("policies")) {
      c.sweep.policies.clear();
      for (const auto& p : config_detail::parse_list<std::string>("sweep", "policies", *v)) {
        try {
          c.sweep.policies.push_back(parse_policy_spec(p));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(std::string("[sweep] policies: ") + e.what());
        }
      }
    }
    if (auto v = s.raw("seeds")) c.sweep.seeds = config_detail::parse_seeds(*v);
    if (auto v = s.raw("compare")) {
      for (const auto& item : config_detail::parse_list<std::string>("sweep", "compare", *v)) {
        const auto gt = item.find('>');
        if (gt == std::string::npos) throw ConfigError("[sweep] compare entries look like a>b: '" + item + "'");
        c.sweep.compare.emplace_back(std::string(csv::trim(item.substr(0, gt))),
                                     std::string(csv::trim(item.substr(gt + 1))));
      }
    }
    if (c.sweep.values.empty()) throw ConfigError("[sweep] values must be non-empty");
    if (c.sweep.seeds.empty()) throw ConfigError("[sweep] seeds must be non-empty");
    if (c.sweep.policies.empty()) throw ConfigError("[sweep] policies must be non-empty");
    for (double v : c.sweep.values) {
      if (!(v > 0)) throw ConfigError("[sweep] values must be positive");
    }
    std::set<std::string> labels;
    for (const auto& p : c.sweep.policies) {
      if (!labels.insert(p.label).second) throw ConfigError("[sweep] duplicate policy '" + p.label + "'");
    }
    for (const auto& [a, b] : c.sweep.compare) {
      if (!labels.count(a) || !labels.count(b)) throw ConfigError("[sweep] compare names an unlisted policy");
    }
    s.finish();
  }
  {
    Section s = section("adversary");
    if (auto v = s.raw("n_values")) c.adversary.n_values = config_detail::parse_list<int>("adversary", "n_values", *v);
    s.get("profit_r", c.adversary.profit_r);
    s.get("beta", c.adversary.beta);
    for (int n : c.adversary.n_values) {
      if (n < 1) throw ConfigError("[adversary] n_values must be >= 1");
    }
    if (c.adversary.beta < 1) throw ConfigError("[adversary] beta must be >= 1");
    s.finish();
  }
  {
    Section s = section("estimate");
    s.get("increments_file", c.estimate.increments_file);
    s.finish();
  }
  {
    Section s = section("output");
    s.get("dir", c.out_dir);
    s.finish();
  }
  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[sim] ") + e.what());
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace dispatchlab
