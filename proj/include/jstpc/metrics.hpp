#pragma once

// Throughput, energy and scheduling-efficiency metrics over a region of cells.

#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "jstpc/asymptotic.hpp"
#include "jstpc/cell_grid.hpp"
#include "jstpc/hex_lattice.hpp"
#include "jstpc/trace.hpp"

namespace jstpc {

/// Set of cells whose sources (for traffic) and nodes (for energy) are counted.
struct RegionFilter {
  std::vector<std::uint8_t> include;
  int rings = 0;
  double area_m2 = 0;

  bool accepts(int cell) const { return cell >= 0 && static_cast<std::size_t>(cell) < include.size() && include[cell]; }

  static RegionFilter within(const CellGrid& grid, int rings) {
    RegionFilter f;
    f.rings = rings;
    for (std::size_t i = 0; i < grid.size(); ++i) f.include.push_back(grid.in_region(i, rings) ? 1 : 0);
    f.area_m2 = grid.region_area(rings);
    return f;
  }
  static RegionFilter inner(const CellGrid& grid) { return within(grid, grid.inner_rings()); }
  static RegionFilter all(const CellGrid& grid) { return within(grid, grid.rings()); }
};

struct MetricsReport {
  double throughput = 0;                 // bit*m/s
  std::optional<double> energy_per_bit;  // J/bit; empty when nothing was delivered
  double scheduling_efficiency = 0;
  double scheduling_efficiency_data = 0;
  std::vector<double> per_node_rates;    // bit/s, non-decreasing
  int region_rings = 0;
  double area_m2 = 0;
  double delivered_bits = 0;
  double energy_j = 0;
  long long transmissions = 0;
  long long delivered_packets = 0;

  double success_ratio() const {
    return transmissions ? static_cast<double>(delivered_packets) / static_cast<double>(transmissions) : 1.0;
  }
};

/// max over r'_g of G for the given path-loss exponent.
inline double max_area_efficiency(double alpha) {
  LatticeConfig cfg;
  cfg.alpha = alpha;
  const HexLattice lat(cfg);
  const double r = golden_section_max([&](double x) { return lat.G(x); }, 0.8, 6.0, 1e-10);
  return lat.G(r);
}

/// Sum of delivered bits times link distance, per second.
inline double distance_weighted_throughput(const Trace& t, const RegionFilter& f) {
  if (!(t.duration_s > 0)) return 0.0;
  double s = 0;
  for (const auto& r : t.links)
    if (f.accepts(r.source_cell)) s += r.bits * r.d_m;
  return s / t.duration_s;
}

/// Energy of all nodes in the region (coordinators included) over bits delivered by its sources.
inline std::optional<double> total_energy_per_bit(const Trace& t, const RegionFilter& f) {
  double bits = 0, e = 0;
  for (const auto& r : t.links)
    if (f.accepts(r.source_cell)) bits += r.bits;
  for (const auto& r : t.nodes)
    if (f.accepts(r.cell)) e += r.energy_j;
  if (!(bits > 0)) return std::nullopt;
  return e / bits;
}

struct EfficiencyPair {
  double whole = 0;
  double data_only = 0;
};

/// sum_l R_l d_l^2 / (max G * A), with R_l the time-averaged bit/s/Hz.
inline EfficiencyPair scheduling_efficiency(const Trace& t, const RegionFilter& f, double max_g) {
  EfficiencyPair out;
  if (!(t.duration_s > 0) || !(f.area_m2 > 0) || !(max_g > 0)) return out;
  double s = 0;
  for (const auto& r : t.links)
    if (f.accepts(r.source_cell)) s += r.rate_slots * t.slot_s * r.d_m * r.d_m;
  out.whole = s / t.duration_s / (max_g * f.area_m2);
  out.data_only = t.data_fraction > 0 ? out.whole / t.data_fraction : 0.0;
  return out;
}

/// Delivered bit/s of each source in the region, sorted; a source counts where it was when it sent.
inline std::vector<double> per_node_rates(const Trace& t, const RegionFilter& f) {
  std::map<int, double> by_node;
  for (const auto& r : t.links)
    if (f.accepts(r.source_cell)) by_node[r.source] += r.bits;
  std::vector<double> v;
  for (const auto& [node, bits] : by_node) v.push_back(t.duration_s > 0 ? bits / t.duration_s : 0.0);
  std::sort(v.begin(), v.end());
  return v;
}

inline MetricsReport compute_metrics(const Trace& t, const RegionFilter& f, double max_g) {
  MetricsReport m;
  m.throughput = distance_weighted_throughput(t, f);
  m.energy_per_bit = total_energy_per_bit(t, f);
  const auto eff = scheduling_efficiency(t, f, max_g);
  m.scheduling_efficiency = eff.whole;
  m.scheduling_efficiency_data = eff.data_only;
  m.per_node_rates = per_node_rates(t, f);
  m.region_rings = f.rings;
  m.area_m2 = f.area_m2;
  for (const auto& r : t.links)
    if (f.accepts(r.source_cell)) {
      m.delivered_bits += r.bits;
      m.transmissions += r.slots;
      m.delivered_packets += r.delivered;
    }
  for (const auto& r : t.nodes)
    if (f.accepts(r.cell)) m.energy_j += r.energy_j;
  return m;
}

}  // namespace jstpc
