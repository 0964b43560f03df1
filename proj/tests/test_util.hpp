#pragma once

#include <vector>

#include "dispatchlab/orders.hpp"
#include "dispatchlab/rng.hpp"

namespace testutil {

inline dispatchlab::Order order(dispatchlab::OrderId id, dispatchlab::CellId o, dispatchlab::CellId d,
                                double t = 0.0) {
  dispatchlab::Order x;
  x.id = id;
  x.origin = o;
  x.dest = d;
  x.raise_time = t;
  return x;
}

inline dispatchlab::CellId cell(dispatchlab::rng::Engine& e, int span) {
  return {static_cast<int>(e.below(2 * span + 1)) - span, static_cast<int>(e.below(2 * span + 1)) - span};
}

inline std::vector<dispatchlab::Order> random_orders(std::uint64_t seed, int n, int span) {
  dispatchlab::rng::Engine e(seed, dispatchlab::rng::Tag::Test, 0);
  std::vector<dispatchlab::Order> out;
  for (int i = 0; i < n; ++i) {
    const auto o = cell(e, span);
    const auto d = cell(e, span);
    out.push_back(order(static_cast<dispatchlab::OrderId>(i + 1), o, d, i));
  }
  return out;
}

inline dispatchlab::Driver driver(dispatchlab::DriverId id, dispatchlab::CellId at) {
  dispatchlab::Driver d;
  d.id = id;
  d.location = at;
  return d;
}

}  // namespace testutil
