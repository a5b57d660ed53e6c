#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>

#include "frog/measure.hpp"
#include "test_support.hpp"

using namespace frog;

TEST(Measure, ShapeOfExactBall) {
  for (int d : {1, 2, 3}) {
    for (std::int64_t n : {1, 5, 20}) {
      if (d == 3 && n > 5) continue;
      const ShapeEstimate e = shape_estimate(l1_ball(static_cast<double>(n), d), n);
      EXPECT_GE(e.inner_radius, 1.0) << d << ' ' << n;
      EXPECT_LE(e.outer_radius, 1.0 + static_cast<double>(d) / static_cast<double>(n));
      EXPECT_DOUBLE_EQ(e.sym_defect, 0.0);
    }
  }
}

TEST(Measure, ShapeOfSingleton) {
  const ShapeEstimate e = shape_estimate(SiteSet(2, {Site{0, 0}}), 10);
  EXPECT_DOUBLE_EQ(e.inner_radius, 0.0);
  EXPECT_DOUBLE_EQ(e.outer_radius, 0.0);
  EXPECT_EQ(e.scaled.scale(), 10);
}

TEST(Measure, InnerRadiusIsZeroWithoutOrigin) {
  const ShapeEstimate e = shape_estimate(SiteSet(2, {Site{1, 0}, Site{0, 1}}), 4);
  EXPECT_DOUBLE_EQ(e.inner_radius, 0.0);
  EXPECT_DOUBLE_EQ(e.outer_radius, 0.25);
}

TEST(Measure, RadiiMatchBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Site> pts{Site{0, 0}};
    for (int i = 0; i < 40; ++i) {
      pts.push_back(Site{static_cast<std::int32_t>(rng() % 9) - 4, static_cast<std::int32_t>(rng() % 9) - 4});
    }
    const SiteSet s(2, pts);
    const std::int64_t n = 3;
    const ShapeEstimate e = shape_estimate(s, n);
    std::int64_t outer = 0;
    for (const auto& x : s) outer = std::max<std::int64_t>(outer, l1_norm(x));
    // Largest integer radius r with every lattice point of norm <= r present.
    std::int64_t r = -1;
    while (std::ranges::all_of(l1_ball(static_cast<double>(r + 1), 2), [&](const Site& x) { return s.contains(x); })) ++r;
    EXPECT_DOUBLE_EQ(e.outer_radius, static_cast<double>(outer) / n);
    EXPECT_DOUBLE_EQ(e.inner_radius, std::max<double>(0.0, static_cast<double>(r) / n));
    EXPECT_LE(e.inner_radius, e.outer_radius);
  }
}

TEST(Measure, ShapeEstimateRejectsBadInput) {
  EXPECT_THROW(shape_estimate(SiteSet(2, {}), 3), std::invalid_argument);
  EXPECT_THROW(shape_estimate(SiteSet(2, {Site{0, 0}}), 0), std::invalid_argument);
}

TEST(Measure, CompareShapes) {
  for (std::int64_t n : {2, 10, 40}) {
    const auto a = shape_estimate(l1_ball(static_cast<double>(n), 2), n);
    const auto b = shape_estimate(l1_ball(static_cast<double>(n - 1), 2), n);
    EXPECT_DOUBLE_EQ(compare_shapes(a, a), 0.0);
    EXPECT_LE(compare_shapes(a, b), 1.0 / static_cast<double>(n) + 1e-15);
    EXPECT_DOUBLE_EQ(compare_shapes(a, b), compare_shapes(b, a));
  }
}

TEST(Measure, SimulatedShapeRespectsSpeedBound) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 60, 8);
  const std::int64_t cps[] = {1, 10, 60};
  const Trajectory tr = run(s, RandomField(8), cps);
  for (const auto& snap : tr.snapshots) {
    const ShapeEstimate e = shape_estimate(snap);
    EXPECT_LE(e.inner_radius, e.outer_radius);
    EXPECT_LE(e.outer_radius, 1.0 + 2.0 / static_cast<double>(snap.t));
  }
}

TEST(Measure, CoexistenceThresholds) {
  const ReplicaCounts lopsided[] = {{0, 1, 1000, 3}};
  EXPECT_FALSE(coexistence_stat(lopsided, 10, 300).outcomes[0].coexists);
  const ReplicaCounts boundary[] = {{0, 1, 50, 50}};
  const auto st = coexistence_stat(boundary, 50, 300);
  EXPECT_TRUE(st.outcomes[0].coexists);
  EXPECT_EQ(st.successes, 1);
  EXPECT_DOUBLE_EQ(st.frequency, 1.0);
  EXPECT_THROW(coexistence_stat(boundary, 0, 300), std::invalid_argument);
}

TEST(Measure, CoexistenceIsOrderIndependent) {
  const ReplicaCounts a[] = {{2, 7, 60, 60}, {0, 5, 1, 100}, {1, 6, 80, 51}};
  const ReplicaCounts b[] = {{1, 6, 80, 51}, {2, 7, 60, 60}, {0, 5, 1, 100}};
  const auto sa = coexistence_stat(a, 50, 300);
  const auto sb = coexistence_stat(b, 50, 300);
  EXPECT_EQ(sa.successes, 2);
  EXPECT_EQ(sb.successes, 2);
  ASSERT_EQ(sb.outcomes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(sb.outcomes[i].counts.replica, static_cast<std::int64_t>(i));
}

TEST(Measure, WilsonIntervalKnownValues) {
  // 10/20 at 95%: centre 0.5, half-width z*sqrt(.25/20+z^2/1600)/(1+z^2/20).
  const auto w = wilson_interval(10, 20);
  EXPECT_NEAR(w.lo, 0.299298, 1e-6);
  EXPECT_NEAR(w.hi, 0.700702, 1e-6);
  const auto zero = wilson_interval(0, 200);
  EXPECT_DOUBLE_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.0);
  const auto all = wilson_interval(200, 200);
  EXPECT_LT(all.lo, 1.0);
  EXPECT_NEAR(all.hi, 1.0, 1e-12);
  EXPECT_TRUE(w.overlaps(wilson_interval(12, 20)));
  EXPECT_FALSE(zero.overlaps(all));
}

TEST(Measure, WilsonCoverage) {
  // Coverage of the nominal 95% interval stays near nominal at moderate n.
  const double p = 0.3;
  const std::int64_t n = 200;
  boost::math::binomial_distribution<> bin(static_cast<double>(n), p);
  double coverage = 0;
  for (std::int64_t k = 0; k <= n; ++k) {
    const auto w = wilson_interval(k, n);
    if (w.lo <= p && p <= w.hi) coverage += boost::math::pdf(bin, static_cast<double>(k));
  }
  EXPECT_GT(coverage, 0.93);
  EXPECT_LT(coverage, 0.97);
}

TEST(Measure, RunCoexistenceDeterministic) {
  const Scenario s = fixtures::two_type(2, 0.5, 0.5, EtaDistribution::constant(1), 40, 0, TieRule::kCoinFlip);
  const auto a = run_coexistence(s, 6, 100, 5, 1);
  const auto b = run_coexistence(s, 6, 100, 5, 3);
  ASSERT_EQ(a.outcomes.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.outcomes[i].counts.seed, 100 + i);
    EXPECT_EQ(a.outcomes[i].counts.count_type1, b.outcomes[i].counts.count_type1);
    EXPECT_EQ(a.outcomes[i].counts.count_type2, b.outcomes[i].counts.count_type2);
  }
  EXPECT_EQ(a.successes, b.successes);
}

TEST(Measure, ModDevSingleStep) {
  const RandomField f(1);
  for (double alpha : {0.55, 0.75, 0.95}) EXPECT_DOUBLE_EQ(mod_dev_check(f, alpha, 1, 500, 2), 0.0);
}

TEST(Measure, ModDevDeterministicAndSensitive) {
  const RandomField f(2);
  EXPECT_DOUBLE_EQ(mod_dev_check(f, 0.6, 400, 300, 2), mod_dev_check(f, 0.6, 400, 300, 2));
  // sqrt(400) = 20 is far below 400^0.75 ~ 89 but comparable to 400^0.51 ~ 21.
  EXPECT_LT(mod_dev_check(f, 0.75, 400, 300, 2), 0.01);
  EXPECT_GT(mod_dev_check(f, 0.51, 400, 300, 2), 0.2);
}

TEST(Measure, LifetimeOfLoneWalker) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Scenario s = fixtures::one_type(2, 0.7, EtaDistribution::constant(0), 80, seed);
    const RandomField f(seed);
    // Oracle: replay the walk and record the last time it stood somewhere new.
    EngineState st = initial_state(s, f);
    std::set<Site> seen{Site{0, 0}};
    std::int64_t last_new = 0;
    while (st.clock < s.horizon) {
      step(st, s, f);
      if (seen.insert(st.active[0].position).second) last_new = st.clock;
    }
    const LifetimeStats ls = discovery_lifetimes(st, s.horizon);
    ASSERT_EQ(ls.particles, 1);
    EXPECT_EQ(ls.histogram.begin()->first, last_new);
  }
}

TEST(Measure, IdleParticleHasZeroLifetime) {
  // p small and short horizon: the particle never leaves its start site.
  fixtures::ScriptedSource f(1);
  const Scenario s = fixtures::one_type(1, 0.1, EtaDistribution::constant(0), 3, 1);
  for (std::int64_t k = 1; k <= 3; ++k) f.script_delay(ParticleId{Site{0}, 1}, 0, k, 0.9);
  EngineState st = initial_state(s, f);
  while (st.clock < s.horizon) step(st, s, f);
  const LifetimeStats ls = discovery_lifetimes(st, s.horizon);
  EXPECT_EQ(ls.histogram.at(0), 1);
  EXPECT_DOUBLE_EQ(ls.staleness, 0.0);
}

TEST(Measure, StalenessIsSmall) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 300, 17);
  EngineOptions o;
  o.keep_discovery_log = false;
  const auto tr = run(s, RandomField(17), {}, o);
  const LifetimeStats ls = discovery_lifetimes(tr.final_state, 300);
  EXPECT_LE(ls.staleness, 0.05);
  EXPECT_GT(ls.eligible, 0);
  EXPECT_LE(ls.eligible, ls.particles);
  EXPECT_GE(ls.raw_staleness, ls.staleness);
}

TEST(Measure, Median) {
  EXPECT_DOUBLE_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_DOUBLE_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Measure, CompareInitialSetsSmall) {
  Scenario a = fixtures::one_type(2, 0.8, EtaDistribution::constant(1), 0, 0);
  Scenario b = a;
  b.init.entries.clear();
  add_box(b.init, Site{0, 0}, 1, 2, InitTag::kOne);
  const std::int64_t scales[] = {10, 20};
  const auto c1 = compare_initial_sets(a, b, scales, 4, 50, 1000, 1);
  const auto c2 = compare_initial_sets(a, b, scales, 4, 50, 1000, 2);
  ASSERT_EQ(c1.medians.size(), 2u);
  EXPECT_EQ(c1.distances, c2.distances);
  for (double m : c1.medians) EXPECT_GT(m, 0.0);
}
