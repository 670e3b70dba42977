#include <gtest/gtest.h>

#include <map>
#include <tuple>

#include "jstpc/mac_sim.hpp"

using namespace jstpc;

namespace {

SimScenario fixed(std::vector<Vec2> pos, std::vector<int> dst, double seconds) {
  SimScenario s;
  s.positions = std::move(pos);
  s.destinations = std::move(dst);
  s.duration_s = seconds;
  return s;
}

void expect_conserved(const Trace& t) {
  EXPECT_NEAR(t.generated_bits, t.delivered_bits + t.queued_bits, 1e-9 * std::max(1.0, t.generated_bits));
}

void expect_energy_accounted(const Trace& t, const RadioParams& p) {
  double total = 0;
  for (const auto& r : t.nodes) {
    const double expect = r.awake_slots * p.circuit_power_w * t.energy_slot_s +
                          (r.total_slots - r.awake_slots) * p.sleep_power_w * t.energy_slot_s + r.amp_j;
    EXPECT_NEAR(r.energy_j, expect, 1e-12);
    if (r.coordinator) {
      EXPECT_EQ(r.awake_slots, r.total_slots);
    }
    total += r.energy_j;
  }
  double by_frame = 0;
  for (const auto& f : t.frame_rows) by_frame += f.energy_j;
  EXPECT_NEAR(total, by_frame, 1e-9 * total);
  EXPECT_NEAR(total, t.total_energy_j(), 1e-9 * total);
}

}  // namespace

TEST(FrameConfig, DefaultFrame) {
  FrameConfig f;
  EXPECT_EQ(f.slots_per_frame(), 100);
  EXPECT_DOUBLE_EQ(f.frame_s(), 0.1);
  EXPECT_EQ(f.entry_capacity(), 30);
  EXPECT_EQ(f.request_minislots(), 6);
  EXPECT_NEAR(f.data_fraction(), 0.9, 1e-15);
}

TEST(SimScenario, RejectsInconsistentConfigurations) {
  SimScenario s;
  s.rg_m = 15;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.frame.data_slots = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.theta = 0.5;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.positions = {{0, 0}};
  s.destinations = {0, 1};
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(MacSimulator(fixed({{0, 0}, {500, 0}}, {1, -1}, 0.2)), std::invalid_argument);
}

TEST(MacSim, SingleLinkGetsEveryDataSlot) {
  auto s = fixed({{0, 0}, {10, 0}}, {1, -1}, 0.5);
  auto r = run_simulation(s);
  ASSERT_EQ(r.trace.links.size(), 5u);
  for (const auto& row : r.trace.links) {
    EXPECT_EQ(row.slots, 90);
    EXPECT_EQ(row.delivered, 90);
  }
  expect_conserved(r.trace);
}

TEST(MacSim, DistantLinksRunConcurrently) {
  RadioParams p;
  const auto& table = shared_lattice_table(p.alpha);
  const auto a = plan_link(10, kInf, default_lambda(p), PlannerMode::Proposed, p, table);
  const auto b = plan_link(12, kInf, default_lambda(p), PlannerMode::Proposed, p, table);
  ASSERT_TRUE(a && b);
  // Cross distances below are 60 m and 82 m.
  EXPECT_LT(min_separation(a->gamma_star_mw, b->i_target_mw, p), 60);
  EXPECT_LT(min_separation(b->gamma_star_mw, a->i_target_mw, p), 60);
  auto s = fixed({{-10, 0}, {0, 0}, {60, 0}, {72, 0}}, {1, -1, 3, -1}, 0.5);
  auto r = run_simulation(s);
  int rows = 0;
  for (const auto& row : r.trace.links) {
    EXPECT_EQ(row.slots, 90);
    EXPECT_EQ(row.delivered, 90);
    ++rows;
  }
  EXPECT_EQ(rows, 10);
}

TEST(MacSim, FullNetworkScheduledPacketsSucceed) {
  SimScenario s;
  s.audit = true;
  auto r = run_simulation(s);
  EXPECT_GE(r.all.success_ratio(), 0.99);
  EXPECT_GT(r.all.transmissions, 10000);
  EXPECT_EQ(r.audit_violations, 0);
  EXPECT_GT(r.inner.scheduling_efficiency_data, 0.0);
  EXPECT_LE(r.max_entries, s.frame.entry_capacity());
  EXPECT_EQ(r.duplex_failures, 0);
  expect_conserved(r.trace);
  expect_energy_accounted(r.trace, s.radio);
}

TEST(MacSim, ActualSinrMatchesFullNetworkRecheck) {
  SimScenario s;
  s.duration_s = 1.0;
  s.record_tx = true;
  s.seed = 4;
  auto r = run_simulation(s);
  ASSERT_FALSE(r.trace.tx.empty());
  std::map<std::pair<int, int>, std::vector<const TxRecord*>> by_slot;
  for (const auto& t : r.trace.tx) by_slot[{t.frame, t.slot}].push_back(&t);
  for (const auto& [key, txs] : by_slot) {
    for (const auto* x : txs) {
      double inter = 0;
      for (const auto* y : txs)
        if (y != x) inter += y->gamma_mw * s.radio.c * std::pow(distance(y->src_pos, x->dst_pos), -s.radio.alpha);
      const double sig = x->gamma_mw * s.radio.c * std::pow(distance(x->src_pos, x->dst_pos), -s.radio.alpha);
      const double eta = sig / (inter + s.radio.n0_mw);
      EXPECT_NEAR(x->actual_sinr, eta, 1e-9 * eta);
      EXPECT_EQ(x->ok, eta >= x->required_sinr * (1 - 1e-9));
    }
  }
}

TEST(MacSim, ConservationUnderPoissonAndMobility) {
  for (int variant = 0; variant < 4; ++variant) {
    SimScenario s;
    s.duration_s = 2.0;
    s.seed = 10 + variant;
    s.saturated = variant % 2 == 0;
    s.load_bps = 20e6;
    s.mobile = variant >= 2;
    s.radio.sleep_power_w = 0.05;
    auto r = run_simulation(s);
    expect_conserved(r.trace);
    expect_energy_accounted(r.trace, s.radio);
    for (const auto& row : r.trace.links) EXPECT_LE(row.d_m, s.radio.d_max_m + 1e-9);
    EXPECT_GT(r.trace.delivered_bits, 0);
  }
}

TEST(MacSim, SleepSlotsCostSleepPower) {
  auto s = fixed({{0, 0}, {10, 0}, {-30, 10}}, {1, -1, -1}, 0.3);
  s.radio.sleep_power_w = 0.2;
  auto r = run_simulation(s);
  int seen = 0;
  for (const auto& row : r.trace.nodes) {
    if (row.node != 2) continue;
    ++seen;
    // Node 2 only listens in its cell's scheduling slot.
    EXPECT_EQ(row.awake_slots, 1);
    EXPECT_NEAR(row.energy_j, 1.25e-3 + 99 * 0.2e-3, 1e-15);
  }
  EXPECT_EQ(seen, 3);
}

TEST(MacSim, SameSeedSameDigest) {
  SimScenario s;
  s.duration_s = 1.0;
  s.mobile = true;
  const auto a = run_simulation(s).trace.digest();
  const auto b = run_simulation(s).trace.digest();
  EXPECT_EQ(a, b);
  s.seed = 2;
  EXPECT_NE(run_simulation(s).trace.digest(), a);
}

TEST(MacSim, SchedulingPacketCapacityDefersOverflow) {
  SimScenario s;
  s.duration_s = 1.0;
  s.frame.entry_bits = 3000;  // two entries per packet
  ASSERT_EQ(s.frame.entry_capacity(), 2);
  auto r = run_simulation(s);
  EXPECT_LE(r.max_entries, 2);
  EXPECT_GT(r.deferred_entries, 0);
  expect_conserved(r.trace);
}

TEST(MacSim, RandomSchedulerAndAblationsRun) {
  for (auto mode : {PlannerMode::MaxPower, PlannerMode::MinInterference, PlannerMode::Arbitrary}) {
    SimScenario s;
    s.duration_s = 0.5;
    s.planner = mode;
    s.audit = true;
    auto r = run_simulation(s);
    EXPECT_EQ(r.audit_violations, 0);
    expect_conserved(r.trace);
  }
  SimScenario s;
  s.duration_s = 0.5;
  s.scheduler = ScheduleMode::Random;
  s.audit = true;
  auto r = run_simulation(s);
  EXPECT_EQ(r.audit_violations, 0);
  EXPECT_EQ(r.trace.scheme, "P-ran.sch");
}

TEST(ViewProblem, OwnLinksScheduleForeignLinksStayFixed) {
  RadioParams p;
  CoordinatorView v;
  v.links.push_back({0, 1, {0, 0}, {10, 0}, 1.0, 1e-7, 2.0, {}, 3 * 2.0 * 2000.0, true});
  v.links.push_back({2, 3, {50, 0}, {60, 0}, 1.0, 1e-7, 2.0, {1, 0, 1}, 0, false});
  v.links.push_back({1, 4, {10, 0}, {20, 0}, 1.0, 1e-7, 2.0, {}, kInf, true});
  auto prob = view_problem(v, 3, 1e-9, 2000.0, p);
  EXPECT_EQ(prob.schedulable[0], 1);
  EXPECT_EQ(prob.schedulable[1], 0);
  EXPECT_EQ(prob.fixed(1, 0), 1);
  EXPECT_EQ(prob.fixed(1, 1), 0);
  EXPECT_NEAR(prob.r_hat[0], 3 * 2.0 / 3, 1e-9);
  EXPECT_TRUE(std::isinf(prob.r_hat[2]));
  // Links 0 and 2 share node 1.
  ASSERT_EQ(prob.conflicts[0].size(), 1u);
  EXPECT_EQ(prob.conflicts[0][0], 2u);
  EXPECT_NEAR(prob.gains(0, 1) / (p.c * std::pow(60.0, -p.alpha)), 1.0, 1e-12);
}
