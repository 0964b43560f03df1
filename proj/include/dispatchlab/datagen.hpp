#pragma once

// Order files and the synthetic two-peak city used in place of real trip data.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dispatchlab/csv.hpp"
#include "dispatchlab/hexgrid.hpp"
#include "dispatchlab/orders.hpp"
#include "dispatchlab/rng.hpp"

namespace dispatchlab {

inline constexpr std::string_view kOrderHeader =
    "order_id,raise_ts,origin_lat,origin_lon,dest_lat,dest_lon,cancel_wait_s";

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline bool read_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  const auto* end = s.data() + digits;
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc{} || ptr != end) return false;
  s.remove_prefix(digits);
  return true;
}

inline bool eat(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace detail

/// Epoch seconds from "YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM]" or a
/// plain number of seconds.
inline std::optional<double> parse_timestamp(std::string_view s) {
  s = csv::trim(s);
  if (s.empty()) return std::nullopt;
  if (s.find('-', 1) == std::string_view::npos || s.size() < 19) {
    double v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
  }
  int y, mo, d, h, mi, se;
  if (!detail::read_int(s, 4, y) || !detail::eat(s, '-') || !detail::read_int(s, 2, mo) || !detail::eat(s, '-') ||
      !detail::read_int(s, 2, d)) {
    return std::nullopt;
  }
  if (!detail::eat(s, 'T') && !detail::eat(s, ' ')) return std::nullopt;
  if (!detail::read_int(s, 2, h) || !detail::eat(s, ':') || !detail::read_int(s, 2, mi) || !detail::eat(s, ':') ||
      !detail::read_int(s, 2, se)) {
    return std::nullopt;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) return std::nullopt;
  double frac = 0.0;
  if (!s.empty() && s.front() == '.') {
    std::size_t n = 1;
    while (n < s.size() && s[n] >= '0' && s[n] <= '9') ++n;
    if (n == 1) return std::nullopt;
    std::from_chars(s.data(), s.data() + n, frac);
    s.remove_prefix(n);
  }
  int offset = 0;
  if (detail::eat(s, 'Z')) {
  } else if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    const int sign = s.front() == '+' ? 1 : -1;
    s.remove_prefix(1);
    int oh, om;
    if (!detail::read_int(s, 2, oh) || !detail::eat(s, ':') || !detail::read_int(s, 2, om)) return std::nullopt;
    offset = sign * (oh * 3600 + om * 60);
  }
  if (!s.empty()) return std::nullopt;
  const std::int64_t days = detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return static_cast<double>(days * 86400 + h * 3600 + mi * 60 + se - offset) + frac;
}

struct LoadOptions {
  /// Subtracted from every timestamp; defaults to UTC midnight of the earliest order.
  std::optional<double> time_origin;
};

/// Parses an order file, sorted by raise time with ties broken by id.
inline std::vector<Order> load_orders(std::istream& in, const HexGrid& grid, const LoadOptions& opt = {}) {
  csv::Reader reader(in, kOrderHeader);
  struct Row {
    Order o;
    double ts;
  };
  std::vector<Row> rows;
  std::set<OrderId> ids;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    Row r;
    r.o.id = csv::parse_number<OrderId>(f[0], line, "order_id");
    if (!ids.insert(r.o.id).second) throw csv::ParseError(line, "duplicate order_id " + std::to_string(r.o.id));
    const auto ts = parse_timestamp(f[1]);
    if (!ts) throw csv::ParseError(line, "bad raise_ts '" + std::string(csv::trim(f[1])) + "'");
    r.ts = *ts;
    const GeoPoint o{csv::parse_number<double>(f[2], line, "origin_lat"), csv::parse_number<double>(f[3], line, "origin_lon")};
    const GeoPoint d{csv::parse_number<double>(f[4], line, "dest_lat"), csv::parse_number<double>(f[5], line, "dest_lon")};
    if (!o.valid() || !d.valid()) throw csv::ParseError(line, "coordinates out of range");
    r.o.origin = grid.point_to_cell(o);
    r.o.dest = grid.point_to_cell(d);
    if (!csv::trim(f[6]).empty()) {
      const double w = csv::parse_number<double>(f[6], line, "cancel_wait_s");
      if (!(w > 0)) throw csv::ParseError(line, "cancel_wait_s must be positive");
      r.o.patience = w;
    }
    rows.push_back(r);
  }
  double origin = 0.0;
  if (opt.time_origin) {
    origin = *opt.time_origin;
  } else if (!rows.empty()) {
    double first = rows.front().ts;
    for (const Row& r : rows) first = std::min(first, r.ts);
    origin = std::floor(first / 86400.0) * 86400.0;
  }
  std::vector<Order> out;
  out.reserve(rows.size());
  for (Row& r : rows) {
    r.o.raise_time = r.ts - origin;
    if (r.o.raise_time < 0) throw std::invalid_argument("order " + std::to_string(r.o.id) + " precedes time origin");
    out.push_back(r.o);
  }
  std::sort(out.begin(), out.end(), [](const Order& a, const Order& b) {
    if (a.raise_time != b.raise_time) return a.raise_time < b.raise_time;
    return a.id < b.id;
  });
  return out;
}

/// Writes raise_ts as epoch seconds (raise_time + epoch_offset) and coordinates
/// as cell centres.
inline void write_orders(std::ostream& os, std::span<const Order> orders, const HexGrid& grid,
                         double epoch_offset = 0.0) {
  os.precision(17);
  os << kOrderHeader << '\n';
  for (const Order& o : orders) {
    const GeoPoint a = grid.cell_center(o.origin);
    const GeoPoint b = grid.cell_center(o.dest);
    os << o.id << ',' << o.raise_time + epoch_offset << ',' << a.lat << ',' << a.lon << ',' << b.lat << ',' << b.lon
       << ',';
    if (o.patience) os << *o.patience;
    os << '\n';
  }
}

// ---- synthetic generator ---------------------------------------------------

struct Hotspot {
  CellId cell;
  double weight = 1.0;
  std::vector<double> destinations;  // weight per hotspot index; empty = proportional to hotspot weights
};

struct IntensityProfile {
  Region region{{0, 0}, 8};
  std::vector<Hotspot> hotspots;
  double decay = 0.55;      // per-cell weight decay^ring around a hotspot
  int kernel_radius = 5;    // rings beyond this get no mass
  std::vector<double> time_curve;  // 288 five-minute bins
  double cancel_fraction = 0.3;    // share of orders carrying a cancellation wait
  double mean_cancel_wait_s = 600.0;

  static constexpr int kBins = 288;
  static constexpr double kBinSeconds = 300.0;

  void validate() const {
    if (hotspots.empty()) throw std::invalid_argument("profile has no hotspots");
    for (const auto& h : hotspots) {
      if (h.weight < 0) throw std::invalid_argument("hotspot weight must be non-negative");
      if (!region.contains(h.cell)) throw std::invalid_argument("hotspot outside region");
      for (double w : h.destinations) {
        if (w < 0) throw std::invalid_argument("destination weight must be non-negative");
      }
      if (!h.destinations.empty() && h.destinations.size() != hotspots.size()) {
        throw std::invalid_argument("destination mixture must list every hotspot");
      }
    }
    if (time_curve.size() != kBins) throw std::invalid_argument("time curve needs 288 bins");
    for (double m : time_curve) {
      if (m < 0) throw std::invalid_argument("time curve multipliers must be non-negative");
    }
    if (!(decay > 0 && decay <= 1)) throw std::invalid_argument("decay must be in (0, 1]");
    if (kernel_radius < 0) throw std::invalid_argument("kernel_radius must be >= 0");
    if (cancel_fraction < 0 || cancel_fraction > 1) throw std::invalid_argument("cancel_fraction must be in [0, 1]");
    if (!(mean_cancel_wait_s > 0)) throw std::invalid_argument("mean_cancel_wait_s must be positive");
  }
};

/// Quiet night, flat day, peaks 7:00-10:00 and 17:00-20:00.
inline std::vector<double> two_peak_curve(double peak = 3.0, double day = 1.0, double night = 0.4) {
  std::vector<double> c(IntensityProfile::kBins);
  for (int b = 0; b < IntensityProfile::kBins; ++b) {
    const double hour = b / 12.0;
    if ((hour >= 7 && hour < 10) || (hour >= 17 && hour < 20)) {
      c[b] = peak;
    } else if (hour >= 6 && hour < 23) {
      c[b] = day;
    } else {
      c[b] = night;
    }
  }
  return c;
}

/// Eight hotspots in two commuting corridors.
inline IntensityProfile default_city() {
  IntensityProfile p;
  p.region = {{0, 0}, 8};
  p.decay = 0.35;
  p.mean_cancel_wait_s = 900.0;
  p.hotspots = {
      {{-3, 0}, 3.0, {}}, {{3, 0}, 3.0, {}},  {{0, -3}, 2.0, {}}, {{0, 3}, 2.0, {}},
      {{-2, 3}, 1.0, {}}, {{2, -3}, 1.0, {}}, {{0, 0}, 2.5, {}},  {{-4, 2}, 1.0, {}},
  };
  // Each hotspot sends most trips to a partner.
  const int partner[] = {1, 0, 3, 2, 5, 4, 0, 1};
  for (std::size_t i = 0; i < p.hotspots.size(); ++i) {
    p.hotspots[i].destinations.assign(p.hotspots.size(), 0.1);
    p.hotspots[i].destinations[static_cast<std::size_t>(partner[i])] = 2.0;
  }
  p.time_curve = two_peak_curve();
  return p;
}

namespace detail {

inline std::size_t pick(std::span<const double> cumulative, double u) {
  const double x = u * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), x);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

inline std::vector<double> cumulate(std::span<const double> w) {
  std::vector<double> c(w.size());
  double s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) c[i] = s += w[i];
  if (s <= 0) throw std::invalid_argument("weights sum to zero");
  return c;
}

/// Cell near `center` with weight decay^ring, restricted to the region.
class Kernel {
 public:
  Kernel(const IntensityProfile& p) : region_(p.region) {
    std::vector<double> w;
    for (int d = 0; d <= p.kernel_radius; ++d) w.push_back(std::pow(p.decay, d) * (d == 0 ? 1 : 6 * d));
    ring_cum_ = cumulate(w);
  }

  CellId sample(CellId center, rng::Engine& e) const {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const auto d = static_cast<int>(pick(ring_cum_, e.uniform()));
      const auto cells = ring(center, d);
      const CellId c = cells[e.below(cells.size())];
      if (region_.contains(c)) return c;
    }
    return center;
  }

 private:
  Region region_;
  std::vector<double> ring_cum_;
};

}  // namespace detail

/// Exactly n orders: bins drawn proportionally to the time curve, uniform time
/// within a bin, origin around a hotspot, destination around a hotspot drawn
/// from the origin hotspot's mixture. Ids follow raise order.
inline std::vector<Order> generate_orders(const IntensityProfile& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  std::vector<Order> out;
  if (n == 0) return out;
  rng::Engine e(seed, rng::Tag::OrderGen, 0);
  const auto bins = detail::cumulate(p.time_curve);
  std::vector<double> hw;
  for (const auto& h : p.hotspots) hw.push_back(h.weight);
  const auto hot_cum = detail::cumulate(hw);
  std::vector<std::vector<double>> dest_cum;
  for (const auto& h : p.hotspots) dest_cum.push_back(h.destinations.empty() ? hot_cum : detail::cumulate(h.destinations));
  const detail::Kernel kernel(p);

  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Order o;
    const std::size_t b = detail::pick(bins, e.uniform());
    o.raise_time = (static_cast<double>(b) + e.uniform()) * IntensityProfile::kBinSeconds;
    const std::size_t h = detail::pick(hot_cum, e.uniform());
    o.origin = kernel.sample(p.hotspots[h].cell, e);
    const std::size_t g = detail::pick(dest_cum[h], e.uniform());
    o.dest = kernel.sample(p.hotspots[g].cell, e);
    if (e.uniform() < p.cancel_fraction) o.patience = std::max(1e-3, e.exponential(p.mean_cancel_wait_s));
    out.push_back(o);
  }
  std::stable_sort(out.begin(), out.end(), [](const Order& a, const Order& b) { return a.raise_time < b.raise_time; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i + 1;
  return out;
}

/// Idle fleet placed around hotspots in proportion to their weights.
inline std::vector<Driver> generate_drivers(const IntensityProfile& p, std::size_t count, std::uint64_t seed,
                                            int capacity = 2) {
  p.validate();
  std::vector<Driver> out;
  if (count == 0) return out;
  rng::Engine e(seed, rng::Tag::DriverGen, 0);
  std::vector<double> hw;
  for (const auto& h : p.hotspots) hw.push_back(h.weight);
  const auto hot_cum = detail::cumulate(hw);
  const detail::Kernel kernel(p);
  for (std::size_t i = 0; i < count; ++i) {
    Driver d;
    d.id = i + 1;
    d.capacity = capacity;
    d.location = kernel.sample(p.hotspots[detail::pick(hot_cum, e.uniform())].cell, e);
    out.push_back(d);
  }
  return out;
}

}  // namespace dispatchlab
