#include <gtest/gtest.h>

#include <numeric>

#include "jstpc/mac_sim.hpp"
#include "jstpc/metrics.hpp"

using namespace jstpc;

namespace {

RegionFilter two_cells(double area) {
  RegionFilter f;
  f.include = {1, 0};
  f.area_m2 = area;
  return f;
}

LinkFrameRow link_row(int source, int cell, double d, double bits, double rate_slots, int slots, int delivered) {
  LinkFrameRow r;
  r.source = source;
  r.dest = source + 1;
  r.source_cell = cell;
  r.d_m = d;
  r.bits = bits;
  r.rate_slots = rate_slots;
  r.slots = slots;
  r.delivered = delivered;
  return r;
}

NodeFrameRow node_row(int node, int cell, double energy) {
  NodeFrameRow r;
  r.node = node;
  r.cell = cell;
  r.energy_j = energy;
  return r;
}

// Maximizer of G at alpha = 3.4 from tests/oracles/g_max_oracle.py.
constexpr double kOracleMaxG34 = 0.28104417620188343;

}  // namespace

TEST(Metrics, EmptyTraceIsZero) {
  Trace t;
  t.duration_s = 1;
  const auto f = two_cells(100);
  EXPECT_EQ(distance_weighted_throughput(t, f), 0.0);
  EXPECT_FALSE(total_energy_per_bit(t, f).has_value());
  const auto e = scheduling_efficiency(t, f, 0.3);
  EXPECT_EQ(e.whole, 0.0);
  EXPECT_EQ(e.data_only, 0.0);
  EXPECT_TRUE(per_node_rates(t, f).empty());
  EXPECT_EQ(compute_metrics(t, f, 0.3).success_ratio(), 1.0);
  Trace zero;
  EXPECT_EQ(distance_weighted_throughput(zero, f), 0.0);
}

TEST(Metrics, DistanceWeightedThroughputOfOneLink) {
  Trace t;
  t.duration_s = 2;
  t.links.push_back(link_row(0, 0, 10, 1e6, 0, 1, 1));
  t.links.push_back(link_row(0, 0, 10, 1e6, 0, 1, 1));
  t.links.push_back(link_row(5, 1, 10, 9e9, 0, 1, 1));  // outside the region
  EXPECT_DOUBLE_EQ(distance_weighted_throughput(t, two_cells(1)), 1e7);
}

TEST(Metrics, EnergyPerBitCountsEveryNodeInTheRegion) {
  RadioParams p;
  // One link on for a whole second: both ends awake, source amplifier at gamma.
  const double gamma_mw = 10;
  const double bits = 4e6;
  Trace t;
  t.duration_s = 1;
  t.links.push_back(link_row(0, 0, 10, bits, 0, 1000, 1000));
  t.nodes.push_back(node_row(0, 0, p.circuit_power_w + p.amp_inverse_efficiency * mw_to_w(gamma_mw)));
  t.nodes.push_back(node_row(1, 0, p.circuit_power_w));
  const auto f = two_cells(1);
  const auto e = total_energy_per_bit(t, f);
  ASSERT_TRUE(e);
  EXPECT_NEAR(*e, link_slot_power(true, gamma_mw, p) * t.duration_s / bits, 1e-15);
  // Sleeping nodes with zero sleep power leave it unchanged; nodes outside the region never count.
  t.nodes.push_back(node_row(7, 0, 0.0));
  t.nodes.push_back(node_row(8, 1, 5.0));
  EXPECT_DOUBLE_EQ(*total_energy_per_bit(t, f), *e);
}

TEST(Metrics, EfficiencyOfAnExactHypotheticalIsOne) {
  const double max_g = max_area_efficiency(3.4);
  Trace t;
  t.duration_s = 0.5;
  t.slot_s = 1e-3;
  t.data_fraction = 0.9;
  // R = 2 bit/s/Hz averaged over the run at d = 10: R d^2 = 200.
  const double rate_slots = 2.0 * t.duration_s / t.slot_s;
  t.links.push_back(link_row(0, 0, 10, 0, rate_slots, 0, 0));
  const auto e = scheduling_efficiency(t, two_cells(200.0 / max_g), max_g);
  EXPECT_NEAR(e.whole, 1.0, 1e-12);
  EXPECT_NEAR(e.data_only, 1.0 / 0.9, 1e-12);
  EXPECT_EQ(scheduling_efficiency(t, two_cells(0), max_g).whole, 0.0);
}

TEST(Metrics, MaxAreaEfficiencyMatchesOracle) {
  EXPECT_NEAR(max_area_efficiency(3.4), kOracleMaxG34, 1e-6 * kOracleMaxG34);
}

TEST(Metrics, PerNodeRatesSortedAndSumToDelivered) {
  Trace t;
  t.duration_s = 4;
  t.links.push_back(link_row(3, 0, 5, 400, 0, 1, 1));
  t.links.push_back(link_row(1, 0, 5, 800, 0, 1, 1));
  t.links.push_back(link_row(3, 0, 5, 100, 0, 1, 1));
  t.links.push_back(link_row(2, 0, 5, 40, 0, 1, 1));
  const auto v = per_node_rates(t, two_cells(1));
  ASSERT_EQ(v.size(), 3u);
  EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
  EXPECT_DOUBLE_EQ(v[0], 10);
  EXPECT_DOUBLE_EQ(v[1], 125);
  EXPECT_DOUBLE_EQ(v[2], 200);
}

TEST(Metrics, ReplayOfTransmissionsAgreesWithLinkRows) {
  SimScenario s;
  s.duration_s = 1.0;
  s.record_tx = true;
  s.seed = 7;
  const auto r = run_simulation(s);
  const auto grid = s.grid();
  for (int rings : {0, 1, 2}) {
    const auto f = RegionFilter::within(grid, rings);
    double thr = 0, bits = 0, rate_d2 = 0;
    long long sent = 0, ok = 0;
    for (const auto& x : r.trace.tx) {
      if (!f.accepts(x.source_cell)) continue;
      const double d = distance(x.src_pos, x.dst_pos);
      thr += x.bits * d;
      bits += x.bits;
      rate_d2 += x.rate * d * d;
      ++sent;
      ok += x.ok;
    }
    const auto m = compute_metrics(r.trace, f, r.max_g);
    EXPECT_NEAR(m.throughput, thr / r.trace.duration_s, 1e-9 * m.throughput + 1e-9);
    EXPECT_NEAR(m.delivered_bits, bits, 1e-9 * bits + 1e-9);
    EXPECT_EQ(m.transmissions, sent);
    EXPECT_EQ(m.delivered_packets, ok);
    const double eff = rate_d2 * r.trace.slot_s / r.trace.duration_s / (r.max_g * f.area_m2);
    EXPECT_NEAR(m.scheduling_efficiency, eff, 1e-9 * eff + 1e-12);
    const auto rates = m.per_node_rates;
    EXPECT_NEAR(std::accumulate(rates.begin(), rates.end(), 0.0) * r.trace.duration_s, bits, 1e-6 * bits + 1e-9);
  }
}

TEST(Metrics, LargerRegionsCountMore) {
  SimScenario s;
  s.duration_s = 1.0;
  const auto r = run_simulation(s);
  const auto grid = s.grid();
  double prev_thr = -1, prev_area = 0, prev_e = -1;
  for (int rings : {0, 1, 2}) {
    const auto m = compute_metrics(r.trace, RegionFilter::within(grid, rings), r.max_g);
    EXPECT_GE(m.throughput, prev_thr);
    EXPECT_GT(m.area_m2, prev_area);
    EXPECT_GE(m.energy_j, prev_e);
    prev_thr = m.throughput;
    prev_area = m.area_m2;
    prev_e = m.energy_j;
  }
  EXPECT_DOUBLE_EQ(prev_thr, r.all.throughput);
}
