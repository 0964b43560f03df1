#pragma once

// Flat-top hexagonal tiling of the plane in axial coordinates.
// See https://www.redblobgames.com/grids/hexagons/ for the coordinate algebra.

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dispatchlab {

struct GeoPoint {
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees

  bool valid() const { return lat >= -90.0 && lat <= 90.0 && lon >= -180.0 && lon <= 180.0; }
  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct CellId {
  int q = 0;
  int r = 0;

  friend auto operator<=>(const CellId&, const CellId&) = default;
};

struct CellIdHash {
  std::size_t operator()(const CellId& c) const noexcept {
    const auto packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.q)) << 32) |
                        static_cast<std::uint32_t>(c.r);
    return std::hash<std::uint64_t>{}(packed * 0x9E3779B97F4A7C15ull);
  }
};

/// Axial hex distance in cells.
inline int hex_distance(CellId a, CellId b) {
  const int dq = a.q - b.q;
  const int dr = a.r - b.r;
  return (std::abs(dq) + std::abs(dq + dr) + std::abs(dr)) / 2;
}

inline constexpr std::array<CellId, 6> kHexDirections{
    {{1, 0}, {1, -1}, {0, -1}, {-1, 0}, {-1, 1}, {0, 1}}};

inline std::array<CellId, 6> neighbors(CellId c) {
  std::array<CellId, 6> out{};
  for (std::size_t i = 0; i < 6; ++i) out[i] = {c.q + kHexDirections[i].q, c.r + kHexDirections[i].r};
  return out;
}

/// All cells at exactly `radius` from `center`, in a fixed walk order.
inline std::vector<CellId> ring(CellId center, int radius) {
  if (radius == 0) return {center};
  std::vector<CellId> out;
  out.reserve(6 * static_cast<std::size_t>(radius));
  CellId c{center.q + kHexDirections[4].q * radius, center.r + kHexDirections[4].r * radius};
  for (int side = 0; side < 6; ++side) {
    for (int step = 0; step < radius; ++step) {
      out.push_back(c);
      c = {c.q + kHexDirections[side].q, c.r + kHexDirections[side].r};
    }
  }
  return out;
}

/// All cells within `radius` of `center`, ordered by CellId.
inline std::vector<CellId> disk(CellId center, int radius) {
  std::vector<CellId> out;
  for (int dq = -radius; dq <= radius; ++dq) {
    const int lo = std::max(-radius, -dq - radius);
    const int hi = std::min(radius, -dq + radius);
    for (int dr = lo; dr <= hi; ++dr) out.push_back({center.q + dq, center.r + dr});
  }
  return out;
}

/// Rounds fractional axial coordinates to the containing cell.
inline CellId cube_round(double fq, double fr) {
  const double fs = -fq - fr;
  double q = std::round(fq);
  double r = std::round(fr);
  const double s = std::round(fs);
  const double dq = std::abs(q - fq);
  const double dr = std::abs(r - fr);
  const double ds = std::abs(s - fs);
  if (dq > dr && dq > ds) {
    q = -r - s;
  } else if (dr > ds) {
    r = -q - s;
  }
  return {static_cast<int>(q), static_cast<int>(r)};
}

/// Next cell on the straight hex line from `from` toward `to`.
inline CellId step_toward(CellId from, CellId to) {
  const int n = hex_distance(from, to);
  if (n == 0) return from;
  // Nudge keeps lerp points off cell boundaries.
  const double fq = from.q + 1e-6;
  const double fr = from.r + 2e-6;
  const double t = 1.0 / n;
  CellId next = cube_round(fq + (to.q - fq) * t, fr + (to.r - fr) * t);
  if (hex_distance(from, next) != 1 || hex_distance(next, to) != n - 1) {
    for (const CellId& nb : neighbors(from)) {
      if (hex_distance(nb, to) == n - 1) return nb;
    }
  }
  return next;
}

/// Planar position in kilometres relative to the grid origin (x east, y north).
struct PlanarKm {
  double x = 0.0;
  double y = 0.0;
};

class HexGrid {
 public:
  static constexpr double kEarthRadiusKm = 6371.0088;

  explicit HexGrid(double edge_length_km = 0.8, GeoPoint origin = {39.9042, 116.4074})
      : edge_km_(edge_length_km), origin_(origin) {
    if (!(edge_length_km > 0.0)) throw std::invalid_argument("hex edge length must be positive");
    if (!origin.valid()) throw std::invalid_argument("grid origin is not a valid lat/lon");
    cos_lat0_ = std::cos(origin.lat * std::numbers::pi / 180.0);
  }

  double edge_length_km() const { return edge_km_; }
  const GeoPoint& origin() const { return origin_; }
  /// Distance between the centres of two adjacent cells.
  double center_spacing_km() const { return std::sqrt(3.0) * edge_km_; }

  PlanarKm project(GeoPoint p) const {
    return {(p.lon - origin_.lon) * km_per_deg() * cos_lat0_, (p.lat - origin_.lat) * km_per_deg()};
  }

  GeoPoint unproject(PlanarKm xy) const {
    return {origin_.lat + xy.y / km_per_deg(), origin_.lon + xy.x / (km_per_deg() * cos_lat0_)};
  }

  PlanarKm center_km(CellId c) const {
    return {edge_km_ * 1.5 * c.q, edge_km_ * std::sqrt(3.0) * (c.r + 0.5 * c.q)};
  }

  GeoPoint cell_center(CellId c) const { return unproject(center_km(c)); }

  /// Nearest cell centre; exact ties go to the smallest CellId.
  CellId point_to_cell(GeoPoint p) const {
    const PlanarKm xy = project(p);
    const double fq = (2.0 / 3.0 * xy.x) / edge_km_;
    const double fr = (-1.0 / 3.0 * xy.x + std::sqrt(3.0) / 3.0 * xy.y) / edge_km_;
    const CellId guess = cube_round(fq, fr);
    CellId best = guess;
    double best_d = sq_dist(xy, center_km(guess));
    for (const CellId& nb : neighbors(guess)) {
      const double d = sq_dist(xy, center_km(nb));
      const double tol = 1e-12 * (1.0 + best_d);
      if (d < best_d - tol || (std::abs(d - best_d) <= tol && nb < best)) {
        best = nb;
        best_d = d;
      }
    }
    return best;
  }

 private:
  static double sq_dist(PlanarKm a, PlanarKm b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
  }
  static constexpr double km_per_deg() { return kEarthRadiusKm * std::numbers::pi / 180.0; }

  double edge_km_;
  GeoPoint origin_;
  double cos_lat0_ = 1.0;
};

/// Hexagonal disk of cells, with a dense index for per-cell lookup tables.
struct Region {
  CellId center;
  int radius = 0;

  bool contains(CellId c) const { return hex_distance(center, c) <= radius; }
  std::vector<CellId> cells() const { return disk(center, radius); }
  std::size_t size() const { return static_cast<std::size_t>(3 * radius * (radius + 1) + 1); }

  /// Index into a (2r+1)^2 table; only meaningful for contained cells.
  std::size_t dense_index(CellId c) const {
    const int side = 2 * radius + 1;
    return static_cast<std::size_t>((c.q - center.q + radius) * side + (c.r - center.r + radius));
  }
  std::size_t dense_size() const {
    const auto side = static_cast<std::size_t>(2 * radius + 1);
    return side * side;
  }
};

}  // namespace dispatchlab
