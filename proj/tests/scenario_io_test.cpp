#include <gtest/gtest.h>

#include "jstpc/jstpc.hpp"

using namespace jstpc;

TEST(ScenarioIo, EmptyTextGivesDefaults) {
  const auto f = parse_scenario("# nothing but a comment\n\n");
  EXPECT_EQ(f.sim.nodes, 100);
  EXPECT_TRUE(f.sim.saturated);
  EXPECT_TRUE(std::isinf(f.sim.theta));
  EXPECT_DOUBLE_EQ(f.csma.cs_threshold_mw, dbm_to_mw(-85));
}

TEST(ScenarioIo, ReadsKeysCommentsAndUnits) {
  const auto f = parse_scenario(
      "nodes = 40   # fewer nodes\n"
      "traffic = poisson\n"
      "load_bps = 5e6\n"
      "theta = 2.5\n"
      "planner = max_power\n"
      "scheduler = random\n"
      "mobile = yes\n"
      "radio.eta_min_db = 10\n"
      "csma.cs_threshold_dbm = -70\n"
      "csma.psm = true\n");
  EXPECT_EQ(f.sim.nodes, 40);
  EXPECT_FALSE(f.sim.saturated);
  EXPECT_DOUBLE_EQ(f.sim.load_bps, 5e6);
  EXPECT_DOUBLE_EQ(f.sim.theta, 2.5);
  EXPECT_EQ(f.sim.planner, PlannerMode::MaxPower);
  EXPECT_EQ(f.sim.scheduler, ScheduleMode::Random);
  EXPECT_TRUE(f.sim.mobile);
  EXPECT_DOUBLE_EQ(f.sim.radio.eta_min, 10.0);
  EXPECT_NEAR(f.csma.cs_threshold_mw, 1e-7, 1e-21);
  EXPECT_TRUE(f.csma.psm);
}

TEST(ScenarioIo, FixedNodes) {
  const auto f = parse_scenario("node = 0 0 1\nnode = 10 0\n");
  ASSERT_EQ(f.sim.positions.size(), 2u);
  EXPECT_EQ(f.sim.destinations[0], 1);
  EXPECT_EQ(f.sim.destinations[1], -1);
  EXPECT_DOUBLE_EQ(f.sim.positions[1].x, 10);
}

TEST(ScenarioIo, UnknownKeyNamesLineAndKey) {
  try {
    parse_scenario("nodes = 10\n\nfloor_scal = 0.1\n", "s.txt");
    FAIL() << "accepted an unknown key";
  } catch (const ScenarioError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_EQ(e.key(), "floor_scal");
    EXPECT_NE(std::string(e.what()).find("s.txt:3"), std::string::npos);
  }
}

TEST(ScenarioIo, BadValuesAreRejected) {
  for (const char* text : {"nodes = ten\n", "nodes = 10.5\n", "mobile = maybe\n", "traffic = bursty\n",
                           "planner = best\n", "seed = -1\n", "node = 1\n", "node = 1 2 3 4\n", "theta = nan\n",
                           "duration_s =\n", "just words\n"}) {
    EXPECT_THROW(parse_scenario(text), ScenarioError) << text;
  }
}

TEST(ScenarioIo, InconsistentScenarioRejectedAtLoad) {
  EXPECT_THROW(parse_scenario("rg_m = 10\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("frame.data_slots = 0\n"), ScenarioError);
  EXPECT_THROW(parse_scenario("csma.psm = true\ncsma.atim_window_s = 0.5\n"), ScenarioError);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.txt"), ScenarioError);
}

TEST(ScenarioIo, DumpRoundTrips) {
  auto f = parse_scenario(
      "nodes = 33\ntheta = 1.75\nlambda = 3.3e-7\nradio.sleep_power_w = 0.01\nframe.entry_bits = 250\n"
      "csma.atim_window_s = 0.01\nnode = 1.5 2.25 1\nnode = 3 4\nseed = 12345678901\n");
  const auto text = to_text(f);
  const auto g = parse_scenario(text);
  EXPECT_EQ(to_text(g), text);
  EXPECT_EQ(g.sim.seed, 12345678901ULL);
  EXPECT_DOUBLE_EQ(g.sim.lambda, 3.3e-7);
  EXPECT_EQ(g.sim.destinations, f.sim.destinations);
  EXPECT_EQ(to_text(parse_scenario(to_text(ScenarioFile{}))), to_text(ScenarioFile{}));
}

TEST(ScenarioIo, OverridesUseTheSameTable) {
  ScenarioFile f;
  apply_setting(f, "duration_s", "2");
  EXPECT_DOUBLE_EQ(f.sim.duration_s, 2);
  EXPECT_THROW(apply_setting(f, "durations", "2"), ScenarioError);
}
