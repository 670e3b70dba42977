#pragma once

// Hexagonal cell layout (pointy-top, axial coordinates), scheduling-slot
// coloring and the remote interference floor used by distributed scheduling.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "jstpc/core_model.hpp"
#include "jstpc/units.hpp"

namespace jstpc {

struct Cell {
  int q = 0;
  int r = 0;
  Vec2 center;
  int ring = 0;  // hex distance from the central cell
};

inline int hex_distance(int dq, int dr) { return (std::abs(dq) + std::abs(dr) + std::abs(dq + dr)) / 2; }

class CellGrid {
 public:
  /// rings = 2 gives the 19-cell layout; inner_rings = 1 its 7 central cells.
  CellGrid(double rg, int rings = 2, double ra_factor = 1.5, int inner_rings = 1)
      : rg_(rg), ra_(ra_factor * rg), rings_(rings), inner_rings_(inner_rings) {
    if (!(rg > 0)) throw std::invalid_argument("CellGrid: r_g must be positive");
    if (rings < 0 || inner_rings < 0) throw std::invalid_argument("CellGrid: negative ring count");
    if (ra_factor < 1.0 || ra_factor * ra_factor < 0.75) throw std::invalid_argument("CellGrid: r_a must be >= r_g");
    for (int q = -rings; q <= rings; ++q)
      for (int r = -rings; r <= rings; ++r) {
        const int ring = hex_distance(q, r);
        if (ring > rings) continue;
        cells_.push_back({q, r, axial_center(q, r), ring});
      }
    std::stable_sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) { return a.ring < b.ring; });
  }

  double rg() const { return rg_; }
  double ra() const { return ra_; }
  /// Radius around a coordinator within which scheduled transmissions are known.
  double rn() const { return 1.5 * rg_ + std::sqrt(ra_ * ra_ - 0.75 * rg_ * rg_); }
  /// Conservative distance beyond which transmitters are unknown.
  double d0() const { return rn() - rg_; }
  int rings() const { return rings_; }
  int inner_rings() const { return inner_rings_; }

  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const Cell& cell(std::size_t i) const { return cells_.at(i); }

  bool adjacent(std::size_t a, std::size_t b) const {
    return hex_distance(cells_[a].q - cells_[b].q, cells_[a].r - cells_[b].r) == 1;
  }

  /// Index of the cell containing p, or -1 outside the layout.
  int cell_of(Vec2 p) const {
    const double fq = (kSqrt3 / 3.0 * p.x - p.y / 3.0) / rg_;
    const double fr = (2.0 / 3.0 * p.y) / rg_;
    const double fs = -fq - fr;
    double q = std::round(fq), r = std::round(fr), s = std::round(fs);
    const double dq = std::abs(q - fq), dr = std::abs(r - fr), ds = std::abs(s - fs);
    if (dq > dr && dq > ds)
      q = -r - s;
    else if (dr > ds)
      r = -q - s;
    const int qi = static_cast<int>(q), ri = static_cast<int>(r);
    if (hex_distance(qi, ri) > rings_) return -1;
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i].q == qi && cells_[i].r == ri) return static_cast<int>(i);
    return -1;
  }

  bool contains(Vec2 p) const { return cell_of(p) >= 0; }

  /// Cells within `rings` of the center; the metrics filter uses inner_rings().
  bool in_region(std::size_t cell, int rings) const { return cells_[cell].ring <= rings; }
  bool in_inner(std::size_t cell) const { return in_region(cell, inner_rings_); }

  double area() const { return static_cast<double>(cells_.size()) * hexagon_area(rg_); }
  double region_area(int rings) const {
    return static_cast<double>(std::count_if(cells_.begin(), cells_.end(), [&](const Cell& c) { return c.ring <= rings; })) *
           hexagon_area(rg_);
  }
  double inner_area() const { return region_area(inner_rings_); }

  /// Uniform point over the layout by rejection from its bounding box.
  Vec2 random_point(Rng& rng) const {
    const double half_w = (rings_ + 0.5) * kSqrt3 * rg_ + 1e-9, half_h = (1.5 * rings_ + 1.0) * rg_ + 1e-9;
    for (;;) {
      const Vec2 p{rng.uniform(-half_w, half_w), rng.uniform(-half_h, half_h)};
      if (contains(p)) return p;
    }
  }

 private:
  Vec2 axial_center(int q, int r) const { return {rg_ * kSqrt3 * (q + 0.5 * r), rg_ * 1.5 * r}; }

  double rg_;
  double ra_;
  int rings_;
  int inner_rings_;
  std::vector<Cell> cells_;
};

/// Standard 7-reuse pattern: (q + 3r) mod 7. Co-colored centers are sqrt(21) r_g apart.
inline std::vector<int> assign_scheduling_colors(const CellGrid& grid) {
  std::vector<int> colors;
  colors.reserve(grid.size());
  for (const auto& c : grid.cells()) colors.push_back(((c.q + 3 * c.r) % 7 + 7) % 7);
  return colors;
}

/// True when no two cells whose r_a discs overlap (this includes all neighbours) share a color.
inline bool coloring_valid(const CellGrid& grid, const std::vector<int>& colors) {
  if (colors.size() != grid.size()) return false;
  for (std::size_t a = 0; a < grid.size(); ++a)
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      const bool close = grid.adjacent(a, b) || distance(grid.cell(a).center, grid.cell(b).center) < 2 * grid.ra();
      if (close && colors[a] == colors[b]) return false;
    }
  return true;
}

/// Worst-case interference from unknown transmitters: one gamma_max source at the
/// center of every cell of an unbounded layout whose center is at least d0 from
/// the destination, the destination sitting at a cell center.
inline double remote_interference_floor(double d0, double rg, const RadioParams& p) {
  if (!(d0 > 0)) throw std::domain_error("remote_interference_floor: d0 must be positive");
  if (!(rg > 0)) throw std::domain_error("remote_interference_floor: r_g must be positive");
  if (!(p.alpha > 2)) throw std::domain_error("remote_interference_floor: alpha must exceed 2");
  const double a = kSqrt3 * rg;  // center spacing
  const double cutoff = std::max(600.0 * a, 4.0 * d0);
  const int n = static_cast<int>(std::ceil(cutoff / a)) + 1;
  double sum = 0.0;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const double x = a * (i + 0.5 * j), y = a * (kSqrt3 / 2.0) * j;
      const double dist = std::hypot(x, y);
      if (dist < d0 * (1 - 1e-12) || dist > cutoff) continue;
      sum += std::pow(dist, -p.alpha);
    }
  // Beyond the cutoff the sources are spread at one per hexagon.
  sum += 2 * kPi / (hexagon_area(rg) * (p.alpha - 2)) * std::pow(cutoff, 2 - p.alpha);
  return p.c * p.gamma_max_mw * sum;
}

}  // namespace jstpc
