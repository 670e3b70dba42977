#include <gtest/gtest.h>

#include <cmath>

#include "jstpc/core_model.hpp"

using namespace jstpc;

TEST(ChannelGain, UnitDistanceIsChannelConstant) {
  RadioParams p;
  EXPECT_DOUBLE_EQ(channel_gain(1.0, p), 1e-4);
}

TEST(ChannelGain, TenMetresGolden) {
  RadioParams p;
  // 10^-7.4
  EXPECT_NEAR(channel_gain(10.0, p), 3.9810717055349695e-08, 1e-20);
}

TEST(ChannelGain, ReceivedPowerAtMaxDistance) {
  RadioParams p;
  const double rx = 100.0 * channel_gain(20.0, p);
  EXPECT_NEAR(rx, 3.7713602103407269e-07, 1e-18);
  EXPECT_NEAR(mw_to_dbm(rx), -64.2350198525754, 1e-9);
  EXPECT_GT(rx, p.i_min_mw * p.eta_min);
}

TEST(ChannelGain, RejectsNonPositiveDistance) {
  RadioParams p;
  EXPECT_THROW(channel_gain(0.0, p), std::domain_error);
  EXPECT_THROW(channel_gain(-1.0, p), std::domain_error);
}

TEST(ChannelGain, DependsOnlyOnDistance) {
  RadioParams p;
  const Vec2 a{1.0, 2.0}, b{7.5, -3.0};
  EXPECT_EQ(channel_gain(distance(a, b), p), channel_gain(distance(b, a), p));
}

TEST(Sinr, Basics) {
  EXPECT_DOUBLE_EQ(sinr(1.0, 0.0, 1.0), 1.0);
  EXPECT_THROW(sinr(1.0, 0.0, 0.0), std::domain_error);
  EXPECT_THROW(sinr(-1.0, 0.0, 1.0), std::domain_error);
}

TEST(Sinr, MonotoneInSignalAndInterference) {
  double prev = sinr(1.0, 0.5, 0.1);
  for (double s = 1.5; s < 10; s += 0.5) {
    const double v = sinr(s, 0.5, 0.1);
    EXPECT_GT(v, prev);
    prev = v;
  }
  prev = sinr(1.0, 0.0, 0.1);
  for (double i = 0.1; i < 5; i += 0.1) {
    const double v = sinr(1.0, i, 0.1);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

namespace {
Topology three_links(const RadioParams& p) {
  std::vector<Node> nodes = {{0, {0, 0}}, {1, {10, 0}}, {2, {40, 0}}, {3, {50, 5}}, {4, {0, 60}}, {5, {12, 60}}};
  std::vector<Link> links = {{0, 0, 1}, {1, 2, 3}, {2, 4, 5}};
  return Topology::build(nodes, links, p);
}
}  // namespace

TEST(Sinr, UnscheduledLinkIsZero) {
  RadioParams p;
  Topology t = three_links(p);
  EXPECT_EQ(slot_sinr(t, {0, 1, 1}, {10, 10, 10}, 0, p.n0_mw), 0.0);
}

TEST(Sinr, HomogeneousInPowerWithoutNoise) {
  RadioParams p;
  Topology t = three_links(p);
  const double a = slot_sinr(t, {1, 1, 1}, {5, 20, 40}, 0, 0.0);
  const double b = slot_sinr(t, {1, 1, 1}, {10, 40, 80}, 0, 0.0);
  EXPECT_NEAR(a, b, 1e-12 * a);
}

TEST(Sinr, SlotSinrMatchesDefinition) {
  RadioParams p;
  Topology t = three_links(p);
  const std::vector<double> g = {5, 20, 40};
  const double signal = 5 * p.c * std::pow(10.0, -p.alpha);
  const double i1 = 20 * p.c * std::pow(distance({40, 0}, {10, 0}), -p.alpha);
  const double i2 = 40 * p.c * std::pow(distance({0, 60}, {10, 0}), -p.alpha);
  EXPECT_NEAR(slot_sinr(t, {1, 1, 1}, g, 0, p.n0_mw), signal / (i1 + i2 + p.n0_mw), 1e-12);
}

TEST(ShannonRate, Values) {
  EXPECT_DOUBLE_EQ(shannon_rate(0.0), 0.0);
  EXPECT_DOUBLE_EQ(shannon_rate(1.0), 1.0);
  EXPECT_DOUBLE_EQ(shannon_rate(3.0), 2.0);
  EXPECT_NEAR(shannon_rate(std::pow(10.0, 0.8)), 2.8697872191702852, 1e-12);
  EXPECT_THROW(shannon_rate(-0.1), std::domain_error);
}

TEST(ShannonRate, IncreasingAndConcave) {
  for (double x = 0.0; x < 50; x += 0.25) {
    const double a = shannon_rate(x), b = shannon_rate(x + 0.25), c = shannon_rate(x + 0.5);
    EXPECT_GT(b, a);
    EXPECT_LT(c - b, b - a);
  }
}

TEST(LinkSlotPower, TableValues) {
  RadioParams p;
  EXPECT_DOUBLE_EQ(link_slot_power(true, 100.0, p), 3.5);
  EXPECT_DOUBLE_EQ(link_slot_power(false, 100.0, p), 0.0);
  EXPECT_DOUBLE_EQ(link_slot_power(true, 1.0, p), 2.51);
}

TEST(EnergyPerBit, AlwaysScheduledLink) {
  RadioParams p;
  const double gamma = 30.0, eta = 7.0;
  EXPECT_DOUBLE_EQ(energy_per_bit(link_slot_power(true, gamma, p), shannon_rate(eta)),
                   (2 * p.circuit_power_w + p.amp_inverse_efficiency * gamma * 1e-3) / std::log2(1 + eta));
}

TEST(RadioParams, DefaultsValidateAndBadOnesThrow) {
  RadioParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_NEAR(p.i_min_mw, 1e-8, 1e-22);
  EXPECT_NEAR(p.n0_mw, std::pow(10.0, -11.1), 1e-25);
  RadioParams q = p;
  q.gamma_min_mw = 200;
  EXPECT_THROW(q.validate(), std::invalid_argument);
  q = p;
  q.amp_inverse_efficiency = 1.0;
  EXPECT_THROW(q.validate(), std::invalid_argument);
  q = p;
  q.sleep_power_w = -1;
  EXPECT_THROW(q.validate(), std::invalid_argument);
}

TEST(Topology, GainsFollowPathLossAndRejectBadLinks) {
  RadioParams p;
  Topology t = three_links(p);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t l = 0; l < 3; ++l)
      EXPECT_DOUBLE_EQ(t.gains(k, l), p.c * std::pow(t.distances(k, l), -p.alpha));
  std::vector<Node> nodes = {{0, {0, 0}}, {1, {25, 0}}};
  EXPECT_THROW(Topology::build(nodes, {{0, 0, 1}}, p), std::invalid_argument);
  EXPECT_NO_THROW(Topology::build(nodes, {{0, 0, 1}}, p, false));
  EXPECT_THROW(Topology::build(nodes, {{0, 0, 0}}, p), std::invalid_argument);
  EXPECT_THROW(Topology::build(nodes, {{0, 0, 7}}, p), std::invalid_argument);
}

TEST(LinkDemand, Validation) {
  LinkDemand d;
  EXPECT_NO_THROW(d.validate());
  d.weight = -1;
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(Rng, ReproducibleAndStreamsDiffer) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng s1 = Rng::stream(7, 1), s2 = Rng::stream(7, 2);
  EXPECT_NE(s1.next(), s2.next());
}

TEST(Rng, UniformAndPoissonMoments) {
  Rng r(3);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  double ps = 0;
  for (int i = 0; i < 20000; ++i) ps += static_cast<double>(r.poisson(4.0));
  EXPECT_NEAR(ps / 20000, 4.0, 0.06);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(r.below(7), 7u);
}
