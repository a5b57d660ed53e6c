#ifndef FROG_MEASURE_HPP
#define FROG_MEASURE_HPP

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "frog/engine.hpp"
#include "frog/lattice.hpp"

namespace frog {

/// Empirical stand-in for the limit shape: xi_n / n with summary radii.
struct ShapeEstimate {
  ScaledSet scaled;
  double inner_radius = 0;  // largest r with D(r) on the lattice Z^d/n inside the scaled set
  double outer_radius = 0;  // smallest r with the scaled set inside D(r)
  double sym_defect = 0;
};

ShapeEstimate shape_estimate(const SiteSet& discovered, std::int64_t n);
ShapeEstimate shape_estimate(const Snapshot& snap);

/// Hausdorff distance (L1 ground metric) between the scaled sets.
double compare_shapes(const ShapeEstimate& a, const ShapeEstimate& b);

struct WilsonInterval {
  double lo = 0;
  double hi = 1;
  bool overlaps(const WilsonInterval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// 95% Wilson score interval for k successes in n trials.
WilsonInterval wilson_interval(std::int64_t k, std::int64_t n, double z = 1.959963984540054);

struct ReplicaCounts {
  std::int64_t replica = 0;
  std::uint64_t seed = 0;
  std::int64_t count_type1 = 0;
  std::int64_t count_type2 = 0;
};

struct ReplicaOutcome {
  ReplicaCounts counts;
  bool coexists = false;
};

/// Coexistence proxy: both types reach K activations by the horizon.
struct CoexistenceStat {
  std::int64_t k_threshold = 0;
  std::int64_t horizon = 0;
  std::vector<ReplicaOutcome> outcomes;  // sorted by replica id
  std::int64_t successes = 0;
  double frequency = 0;
  WilsonInterval interval;
};

/// Throws std::invalid_argument if k < 1.
CoexistenceStat coexistence_stat(std::span<const ReplicaCounts> replicas, std::int64_t k, std::int64_t horizon);

/// Runs `replicas` copies of a two-type scenario with seeds seed_base + i and
/// aggregates the proxy.
CoexistenceStat run_coexistence(const Scenario& s, std::int64_t replicas, std::uint64_t seed_base,
                                std::int64_t k, int workers = 1);

/// Fraction of `trials` independent n-step simple random walks in Z^d that
/// end outside the L1 ball of radius n^alpha.
double mod_dev_check(const RandomSource& f, double alpha, std::int64_t n, std::int64_t trials, int d);

/// Per-particle time from activation to last (co-)discovery.
struct LifetimeStats {
  std::map<std::int64_t, std::int64_t> histogram;  // lifetime -> particle count
  std::int64_t particles = 0;
  // Among particles already active at 3T/4: fraction still discovering in the
  // final quarter. Late activations are excluded since they are fresh by
  // construction, not stale.
  double staleness = 0;
  std::int64_t eligible = 0;
  // Same fraction taken over every particle, late activations included.
  double raw_staleness = 0;
};

LifetimeStats discovery_lifetimes(const EngineState& final_state, std::int64_t horizon);

/// Shape distance between two initial configurations over several scales.
struct ShapeComparison {
  std::vector<std::int64_t> scales;
  std::vector<std::vector<double>> distances;  // [pair][scale]
  std::vector<double> medians;                 // per scale
  bool non_increasing = false;
};

/// For each seed pair i, runs `a` with seed seed_base + i and `b` with seed
/// seed_base + i + pair_offset, and compares their shape estimates at each scale.
ShapeComparison compare_initial_sets(const Scenario& a, const Scenario& b, std::span<const std::int64_t> scales,
                                     std::int64_t pairs, std::uint64_t seed_base, std::uint64_t pair_offset,
                                     int workers = 1);

double median(std::vector<double> values);

}  // namespace frog

#endif  // FROG_MEASURE_HPP
