#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "frog/engine.hpp"
#include "test_support.hpp"

using namespace frog;
using frog::fixtures::ScriptedSource;

TEST(Engine, InitialStateOneType) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 10, 1);
  const RandomField f(1);
  const EngineState st = initial_state(s, f);
  EXPECT_EQ(st.clock, 0);
  ASSERT_EQ(st.active.size(), 1u);
  EXPECT_EQ(st.active[0].position, Site::origin(2));
  EXPECT_EQ(st.active[0].jumps_made, 0);
  EXPECT_EQ(st.discovered(), SiteSet(2, {Site{0, 0}}));
}

TEST(Engine, InitialStateTwoType) {
  Scenario s = fixtures::two_type(2, 0.5, 0.5, EtaDistribution::poisson(1.0), 10, 1);
  s.init.entries = {{Site{0, 0}, 2, InitTag::kOne}, {Site{1, 0}, 1, InitTag::kTwo}};
  const RandomField f(1);
  const EngineState st = initial_state(s, f);
  EXPECT_EQ(st.total(ParticleType::kOne), 2);
  EXPECT_EQ(st.total(ParticleType::kTwo), 1);
  EXPECT_EQ(st.discovered(), SiteSet(2, {Site{0, 0}, Site{1, 0}}));
  EXPECT_EQ(st.sites.at(Site{0, 0}).site_type, ParticleType::kOne);
  EXPECT_EQ(st.sites.at(Site{1, 0}).site_type, ParticleType::kTwo);
  // Nothing else materialised; the first query of a fresh site goes to the field.
  EXPECT_EQ(st.sites.size(), 2u);
  EXPECT_FALSE(st.is_discovered(Site{5, 5}));
}

TEST(Engine, FullThresholdAlwaysJumps) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 30, 4);
  const RandomField f(4);
  EngineState st = initial_state(s, f);
  for (int t = 0; t < 30; ++t) {
    const auto before = st.active;
    step(st, s, f);
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_EQ(st.active[i].jumps_made, before[i].jumps_made + 1);
      EXPECT_EQ(l1_distance(st.active[i].position, before[i].position), 1);
    }
  }
}

TEST(Engine, FailedAttemptLeavesParticleInPlace) {
  Scenario s = fixtures::one_type(2, 0.4, EtaDistribution::constant(1), 5, 0);
  ScriptedSource f;
  const ParticleId p{Site{0, 0}, 1};
  f.script_delay(p, 0, 1, 0.9);
  EngineState st = initial_state(s, f);
  step(st, s, f);
  EXPECT_EQ(st.active[0].position, Site::origin(2));
  EXPECT_EQ(st.active[0].attempts_at_site, 1);
  EXPECT_EQ(st.active[0].jumps_made, 0);

  // A success on the next attempt uses jump index 0 and resets the counter.
  f.script_delay(p, 0, 2, 0.1);
  f.script_step(p, 0, Site{0, -1});
  step(st, s, f);
  EXPECT_EQ(st.active[0].position, (Site{0, -1}));
  EXPECT_EQ(st.active[0].attempts_at_site, 0);
  EXPECT_EQ(st.active[0].jumps_made, 1);
}

TEST(Engine, HandTraceOneDimension) {
  // d=1, p=1, eta=1, forced first step +1: xi_1 = {0, 1} with two active particles.
  const Scenario s = fixtures::one_type(1, 1.0, EtaDistribution::constant(1), 5, 0);
  ScriptedSource f;
  f.script_step(ParticleId{Site{0}, 1}, 0, Site{1});
  const std::int64_t cp[] = {1};
  const auto traj = run(s, f, cp);
  ASSERT_EQ(traj.snapshots.size(), 1u);
  EXPECT_EQ(traj.snapshots[0].sites(), SiteSet(1, {Site{0}, Site{1}}));
  EXPECT_EQ(traj.snapshots[0].active_particles, 2);
}

TEST(Engine, NewlyActivatedParticlesWaitOneStep) {
  const Scenario s = fixtures::one_type(1, 1.0, EtaDistribution::constant(2), 5, 0);
  ScriptedSource f;
  f.script_step(ParticleId{Site{0}, 1}, 0, Site{1});
  EngineState st = initial_state(s, f);
  step(st, s, f);
  ASSERT_EQ(st.active.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_EQ(st.active[i].position, Site{1});
    EXPECT_EQ(st.active[i].jumps_made, 0);
    EXPECT_EQ(st.active[i].attempts_at_site, 0);
    EXPECT_EQ(st.active[i].activated_at, 1);
  }
  step(st, s, f);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_EQ(st.active[i].jumps_made, 1);
}

TEST(Engine, TieRules) {
  // Type 1 at (0,0) and type 2 at (2,0) both step onto (1,0).
  for (auto [rule, tie_u, expect] :
       {std::tuple{TieRule::kType1Wins, 0.9, ParticleType::kOne}, std::tuple{TieRule::kType2Wins, 0.1, ParticleType::kTwo},
        std::tuple{TieRule::kCoinFlip, 0.2, ParticleType::kOne}, std::tuple{TieRule::kCoinFlip, 0.7, ParticleType::kTwo},
        std::tuple{TieRule::kParity, 0.0, ParticleType::kTwo}}) {
    Scenario s = fixtures::two_type(2, 1.0, 1.0, EtaDistribution::constant(1), 3, 0, rule);
    s.init.entries = {{Site{0, 0}, 1, InitTag::kOne}, {Site{2, 0}, 1, InitTag::kTwo}};
    ScriptedSource f;
    f.script_step(ParticleId{Site{0, 0}, 1}, 0, Site{1, 0});
    f.script_step(ParticleId{Site{2, 0}, 1}, 0, Site{-1, 0});
    f.script_tie(tie_u);
    EngineState st = initial_state(s, f);
    const auto newly = step(st, s, f);
    ASSERT_EQ(newly, (std::vector<Site>{Site{1, 0}}));
    EXPECT_EQ(st.sites.at(Site{1, 0}).site_type, expect) << to_string(rule);
    EXPECT_EQ(st.active.back().type, expect);
    EXPECT_EQ(st.active[0].last_discovery, 1);
    EXPECT_EQ(st.active[1].last_discovery, 1);
    ASSERT_EQ(st.discovery_log.size(), 1u);
    EXPECT_EQ(st.discovery_log[0].discoverer.origin, (expect == ParticleType::kOne ? Site{0, 0} : Site{2, 0}));
  }
}

TEST(Engine, EmptyEnvironmentTracesOneWalk) {
  const Scenario s = fixtures::one_type(2, 0.7, EtaDistribution::constant(0), 50, 9);
  const RandomField f(9);
  const auto traj = run(s, f, {});
  ASSERT_EQ(traj.final_state.active.size(), 1u);
  // Replay the walk from the field directly.
  const ParticleId id{Site{0, 0}, 1};
  std::vector<Site> visited{Site{0, 0}};
  Site pos = Site{0, 0};
  std::int64_t n = 0, k = 0;
  for (int t = 0; t < 50; ++t) {
    ++k;
    if (delay(f, id, n, k) <= 0.7) {
      pos = pos + walk_step(f, id, n);
      ++n;
      k = 0;
      visited.push_back(pos);
    }
  }
  EXPECT_EQ(traj.final_state.discovered(), SiteSet(2, visited));
  EXPECT_EQ(traj.final_state.active[0].position, pos);
}

TEST(Engine, DeterministicDigests) {
  const Scenario s = fixtures::two_type(2, 0.6, 0.8, EtaDistribution::poisson(1.0), 100, 17, TieRule::kCoinFlip);
  const std::int64_t cps[] = {0, 25, 50, 100};
  const auto a = run(s, RandomField(17), cps);
  const auto b = run(s, RandomField(17), cps);
  ASSERT_EQ(a.snapshots.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.snapshots[i].digest, b.snapshots[i].digest);
  EXPECT_EQ(state_digest(initial_state(s, RandomField(1))), state_digest(initial_state(s, RandomField(1))));

  const auto c = run(s, RandomField(18), cps);
  EXPECT_NE(a.snapshots.back().digest, c.snapshots.back().digest);
}

TEST(Engine, DigestIgnoresTraversalOrder) {
  const Scenario s = fixtures::one_type(2, 0.8, EtaDistribution::constant(1), 40, 5);
  const auto traj = run(s, RandomField(5), {});
  EngineState shuffled = traj.final_state;
  std::shuffle(shuffled.active.begin(), shuffled.active.end(), std::mt19937_64(1));
  absl::flat_hash_map<Site, SiteState, SiteHash> rebuilt;
  std::vector<std::pair<Site, SiteState>> entries(shuffled.sites.begin(), shuffled.sites.end());
  std::shuffle(entries.begin(), entries.end(), std::mt19937_64(2));
  for (auto& e : entries) rebuilt.insert(e);
  shuffled.sites = std::move(rebuilt);
  EXPECT_EQ(state_digest(shuffled), state_digest(traj.final_state));
}

TEST(Engine, CheckpointsBeyondHorizonRejected) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 10, 1);
  const std::int64_t cps[] = {11};
  EXPECT_THROW(run(s, RandomField(1), cps), std::invalid_argument);
}

TEST(Engine, InvariantsHoldOnRandomScenarios) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 15; ++trial) {
    const Scenario s = fixtures::random_scenario(rng, 60);
    const RandomField f(s.seed);
    EngineState st = initial_state(s, f);
    InvariantMonitor monitor(s, st);
    std::size_t before = st.discovered_count();
    while (st.clock < s.horizon) {
      const auto newly = step(st, s, f);
      const auto violations = monitor.observe(st, newly);
      ASSERT_TRUE(violations.empty()) << violations.front() << "\n" << serialize_scenario(s);
      // Literal speed-bound check against dilate on small instances.
      EXPECT_GE(st.discovered_count(), before);
      before = st.discovered_count();
    }
    EXPECT_TRUE(st.discovered().is_subset_of(dilate(s.init.initial_sites(s.dimension), st.clock)));
  }
}

TEST(Engine, MonitorCatchesTampering) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 20, 3);
  const RandomField f(3);
  EngineState st = initial_state(s, f);
  InvariantMonitor monitor(s, st);
  for (int t = 0; t < 5; ++t) monitor.observe(st, step(st, s, f));
  EngineState bad = st;
  bad.sites.begin()->second.site_type = ParticleType::kTwo;
  EXPECT_FALSE(monitor.observe(bad, {}).empty());
  EngineState far = st;
  far.sites.emplace(Site{100, 0}, SiteState{0, 0, far.clock, ParticleType::kOne});
  const Site newly[] = {Site{100, 0}};
  EXPECT_FALSE(monitor.observe(far, newly).empty());
}

TEST(Engine, PositionsFollowKeyedWalks) {
  const Scenario s = fixtures::one_type(2, 0.6, EtaDistribution::poisson(1.5), 40, 23);
  const RandomField f(23);
  const auto st = run(s, f, {}).final_state;
  for (const auto& p : st.active) {
    Site pos = p.id.origin;
    for (std::int64_t n = 0; n < p.jumps_made; ++n) pos = pos + walk_step(f, p.id, n);
    ASSERT_EQ(pos, p.position);
  }
}

TEST(Engine, EqualThresholdsMakeTypesIrrelevantToMotion) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    Scenario two = fixtures::random_scenario(rng, 80);
    if (two.mode != Mode::kTwoType) continue;
    two.p2 = two.p1;
    Scenario one = two;
    one.mode = Mode::kOneType;
    one.p2.reset();
    for (auto& e : one.init.entries)
      if (e.tag == InitTag::kTwo) e.tag = InitTag::kOne;
    const RandomField f(two.seed);
    EngineState a = initial_state(one, f);
    EngineState b = initial_state(two, f);
    while (a.clock < two.horizon) {
      ASSERT_EQ(step(a, one, f), step(b, two, f));
    }
  }
}

TEST(Engine, RetirementFreezesStaleParticles) {
  const Scenario s = fixtures::one_type(2, 1.0, EtaDistribution::constant(1), 60, 2);
  const RandomField f(2);
  EngineOptions opts;
  opts.retirement_window = 5;
  const auto st = run(s, f, {}, opts).final_state;
  std::size_t retired = 0;
  for (const auto& p : st.active) retired += p.retired;
  EXPECT_GT(retired, 0u);
  for (const auto& p : st.active) {
    if (p.retired) EXPECT_GT(st.clock - std::max(p.last_discovery, p.activated_at), 5);
  }
}
