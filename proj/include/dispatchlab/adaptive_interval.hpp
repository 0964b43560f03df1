#pragma once

// Online dispatching-time policies. A window opens after the last dispatch at
// unit t_l; at the end of every unit t_c the policy sees the profit increments
// observed so far in the window and decides whether to dispatch now.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dispatchlab/csv.hpp"

namespace dispatchlab {

struct WindowState {
  int t_l = 0;
  int t_c = 1;
  int beta = 1;
  int t_N = 1;
  std::span<const double> increments;  // P_{l,l+1,j} for j = t_l+1 .. t_c
};

enum class Reason { ThresholdNotReached, DeadlineForced, RunningMax, BelowFutureValue, AboveFutureValue };

struct Decision {
  bool dispatch = false;
  Reason reason = Reason::ThresholdNotReached;

  friend bool operator==(const Decision&, const Decision&) = default;
};

inline const char* to_string(Reason r) {
  switch (r) {
    case Reason::ThresholdNotReached: return "threshold_not_reached";
    case Reason::DeadlineForced: return "deadline_forced";
    case Reason::RunningMax: return "running_max";
    case Reason::BelowFutureValue: return "below_future_value";
    case Reason::AboveFutureValue: return "above_future_value";
  }
  return "?";
}

inline int window_deadline(const WindowState& s) { return std::min(s.t_N, s.t_l + s.beta); }

/// t_l + ceil((t_max - t_l) / e).
inline int one_over_e_threshold(int t_l, int t_max) {
  return t_l + static_cast<int>(std::ceil(static_cast<double>(t_max - t_l) / std::numbers::e));
}

namespace detail {

inline void check_window(const WindowState& s) {
  if (s.beta < 1) throw std::invalid_argument("window: beta must be >= 1");
  const int t_max = window_deadline(s);
  if (!(s.t_l < s.t_c && s.t_c <= t_max)) {
    throw std::invalid_argument("window: need t_l < t_c <= min(t_N, t_l + beta), got t_l=" +
                                std::to_string(s.t_l) + " t_c=" + std::to_string(s.t_c) +
                                " t_max=" + std::to_string(t_max));
  }
  if (s.increments.size() != static_cast<std::size_t>(s.t_c - s.t_l)) {
    throw std::invalid_argument("window: expected one increment per elapsed unit");
  }
}

}  // namespace detail

/// Observe the first 1/e of the window, then stop at the first increment that
/// strictly beats everything seen before it.
inline Decision one_over_e_pre_adi(const WindowState& s) {
  detail::check_window(s);
  const int t_max = window_deadline(s);
  if (s.t_c < one_over_e_threshold(s.t_l, t_max)) return {false, Reason::ThresholdNotReached};
  if (s.t_c == t_max) return {true, Reason::DeadlineForced};
  const double last = s.increments.back();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < s.increments.size(); ++i) best = std::max(best, s.increments[i]);
  return {last > best, Reason::RunningMax};
}

/// Same rule; the caller supplies in-trip increments.
inline Decision one_over_e_in_adi(const WindowState& s) { return one_over_e_pre_adi(s); }

inline Decision uniform_baseline(int /*t_c*/) { return {true, Reason::DeadlineForced}; }

/// Never dispatches before the window deadline.
inline Decision wait_to_deadline(const WindowState& s) {
  detail::check_window(s);
  if (s.t_c == window_deadline(s)) return {true, Reason::DeadlineForced};
  return {false, Reason::ThresholdNotReached};
}

/// v_bar[k] estimates the expected best increment still obtainable at offset k
/// of a window, k = 1..beta.
struct ValueEstimateTable {
  int beta = 0;
  std::vector<double> v_bar;                // v_bar[k - 1] holds offset k
  std::vector<std::size_t> sample_counts;   // same indexing

  double at(int k) const {
    if (k < 1 || k > beta) {
      throw std::out_of_range("value table has no entry for offset " + std::to_string(k) +
                              " (beta " + std::to_string(beta) + ")");
    }
    return v_bar[static_cast<std::size_t>(k - 1)];
  }
  std::size_t samples_at(int k) const {
    if (k < 1 || k > beta) return 0;
    return sample_counts[static_cast<std::size_t>(k - 1)];
  }

  friend bool operator==(const ValueEstimateTable&, const ValueEstimateTable&) = default;
};

/// Empirical backward induction over aligned windows: the last offset takes the
/// mean increment, earlier offsets the mean of max(P, next value).
inline ValueEstimateTable estimate_value_table(std::span<const std::vector<double>> samples, int beta) {
  if (beta < 1) throw std::invalid_argument("estimate_value_table: beta must be >= 1");
  if (samples.empty()) throw std::invalid_argument("estimate_value_table: no sample paths");
  for (const auto& path : samples) {
    if (path.size() != static_cast<std::size_t>(beta)) {
      throw std::invalid_argument("estimate_value_table: every path needs exactly beta increments");
    }
  }
  ValueEstimateTable t;
  t.beta = beta;
  t.v_bar.assign(static_cast<std::size_t>(beta), 0.0);
  t.sample_counts.assign(static_cast<std::size_t>(beta), samples.size());
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (const auto& path : samples) sum += path.back();
  t.v_bar.back() = sum / n;
  for (int k = beta - 1; k >= 1; --k) {
    const double next = t.v_bar[static_cast<std::size_t>(k)];
    double s = 0.0;
    for (const auto& path : samples) s += std::max(path[static_cast<std::size_t>(k - 1)], next);
    t.v_bar[static_cast<std::size_t>(k - 1)] = s / n;
  }
  return t;
}

/// Dispatch once the current increment reaches the value of continuing.
inline Decision bi_pre_adi(const WindowState& s, const ValueEstimateTable& table) {
  detail::check_window(s);
  if (s.t_c == window_deadline(s)) return {true, Reason::DeadlineForced};
  const int next = s.t_c - s.t_l + 1;
  if (table.beta < s.beta) {
    throw std::invalid_argument("bi_pre_adi: value table built for beta " + std::to_string(table.beta) +
                                ", window beta " + std::to_string(s.beta));
  }
  if (s.increments.back() >= table.at(next)) return {true, Reason::AboveFutureValue};
  return {false, Reason::BelowFutureValue};
}

/// Window profit minus the profit of dispatching every unit separately.
inline double profit_increment(double r_window, std::span<const double> r_units) {
  return r_window - std::accumulate(r_units.begin(), r_units.end(), 0.0);
}

inline double in_adi_profit_increment(double r_window_given_history, double r_uniform_given_history) {
  return r_window_given_history - r_uniform_given_history;
}

inline void write_value_table(std::ostream& os, const ValueEstimateTable& t) {
  os << "offset,v_bar,sample_count\n";
  os.precision(17);
  for (int k = 1; k <= t.beta; ++k) {
    os << k << ',' << t.v_bar[static_cast<std::size_t>(k - 1)] << ','
       << t.sample_counts[static_cast<std::size_t>(k - 1)] << '\n';
  }
}

inline ValueEstimateTable read_value_table(std::istream& in) {
  csv::Reader reader(in, "offset,v_bar,sample_count");
  ValueEstimateTable t;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const auto line = reader.line();
    const int k = csv::parse_number<int>(f[0], line, "offset");
    if (k != t.beta + 1) throw csv::ParseError(line, "offsets must run 1, 2, ... in order");
    t.v_bar.push_back(csv::parse_number<double>(f[1], line, "v_bar"));
    t.sample_counts.push_back(csv::parse_number<std::size_t>(f[2], line, "sample_count"));
    t.beta = k;
  }
  if (t.beta == 0) throw std::invalid_argument("value table is empty");
  return t;
}

}  // namespace dispatchlab
