#include "frog/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "frog/replicas.hpp"

namespace frog {

ShapeEstimate shape_estimate(const SiteSet& discovered, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("shape_estimate: scale must be >= 1");
  if (discovered.empty()) throw std::invalid_argument("shape_estimate: empty snapshot");
  const int d = discovered.dim();
  ShapeEstimate est{ScaledSet(discovered, n), 0, 0, 0};

  std::int64_t outer = 0;
  for (const auto& x : discovered) outer = std::max(outer, l1_norm(x));

  // Smallest norm of a lattice point outside the set. Such a point is either
  // the origin or has a neighbour of smaller norm inside the set.
  std::int64_t hole = 0;
  if (discovered.contains(Site::origin(d))) {
    hole = INT64_MAX;
    for (const auto& x : discovered) {
      for (int a = 0; a < d; ++a) {
        for (int sgn : {1, -1}) {
          const Site y = x + Site::unit(d, a, sgn);
          const auto norm = l1_norm(y);
          if (norm < hole && !discovered.contains(y)) hole = norm;
        }
      }
    }
  }
  est.outer_radius = static_cast<double>(outer) / static_cast<double>(n);
  est.inner_radius = static_cast<double>(std::max<std::int64_t>(hole - 1, 0)) / static_cast<double>(n);
  est.sym_defect = symmetry_defect(est.scaled);
  return est;
}

ShapeEstimate shape_estimate(const Snapshot& snap) { return shape_estimate(snap.sites(), snap.t); }

double compare_shapes(const ShapeEstimate& a, const ShapeEstimate& b) { return hausdorff(a.scaled, b.scaled); }

WilsonInterval wilson_interval(std::int64_t k, std::int64_t n, double z) {
  if (n <= 0) return {0, 1};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double center = (phat + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  WilsonInterval w{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (k == 0) w.lo = 0;
  if (k == n) w.hi = 1;
  return w;
}

CoexistenceStat coexistence_stat(std::span<const ReplicaCounts> replicas, std::int64_t k, std::int64_t horizon) {
  if (k < 1) throw std::invalid_argument("coexistence_stat: K must be >= 1");
  CoexistenceStat st;
  st.k_threshold = k;
  st.horizon = horizon;
  for (const auto& r : replicas) {
    st.outcomes.push_back({r, r.count_type1 >= k && r.count_type2 >= k});
  }
  std::sort(st.outcomes.begin(), st.outcomes.end(),
            [](const ReplicaOutcome& a, const ReplicaOutcome& b) { return a.counts.replica < b.counts.replica; });
  for (const auto& o : st.outcomes) st.successes += o.coexists ? 1 : 0;
  const auto n = static_cast<std::int64_t>(st.outcomes.size());
  st.frequency = n ? static_cast<double>(st.successes) / static_cast<double>(n) : 0.0;
  st.interval = wilson_interval(st.successes, n);
  return st;
}

CoexistenceStat run_coexistence(const Scenario& s, std::int64_t replicas, std::uint64_t seed_base, std::int64_t k,
                                int workers) {
  if (s.mode != Mode::kTwoType) throw std::invalid_argument("run_coexistence: needs a two-type scenario");
  if (replicas < 1) throw std::invalid_argument("run_coexistence: replica count must be >= 1");
  if (k < 1) throw std::invalid_argument("coexistence_stat: K must be >= 1");
  std::vector<ReplicaCounts> counts(static_cast<std::size_t>(replicas));
  const EngineOptions opts{.retirement_window = std::nullopt, .keep_discovery_log = false};
  for_each_replica(replicas, workers, [&](std::int64_t i) {
    Scenario rs = s;
    rs.seed = seed_base + static_cast<std::uint64_t>(i);
    const RandomField f(rs.seed);
    const auto traj = run(rs, f, {}, opts);
    counts[static_cast<std::size_t>(i)] = {i, rs.seed, traj.final_state.total(ParticleType::kOne),
                                          traj.final_state.total(ParticleType::kTwo)};
  });
  return coexistence_stat(counts, k, s.horizon);
}

double mod_dev_check(const RandomSource& f, double alpha, std::int64_t n, std::int64_t trials, int d) {
  if (!(alpha > 0.5 && alpha < 1)) throw std::invalid_argument("mod_dev_check: alpha must lie in (1/2, 1)");
  if (n < 1 || trials < 1) throw std::invalid_argument("mod_dev_check: n and trials must be >= 1");
  const double radius = std::pow(static_cast<double>(n), alpha);
  std::int64_t outside = 0;
  for (std::int64_t i = 0; i < trials; ++i) {
    ParticleId id{Site::origin(d), 1};
    id.origin[0] = static_cast<std::int32_t>(i);
    Site pos = Site::origin(d);
    for (std::int64_t m = 0; m < n; ++m) pos = pos + f.walk_step(id, m);
    if (static_cast<double>(l1_norm(pos)) > radius) ++outside;
  }
  return static_cast<double>(outside) / static_cast<double>(trials);
}

LifetimeStats discovery_lifetimes(const EngineState& final_state, std::int64_t horizon) {
  LifetimeStats st;
  std::int64_t stale = 0, stale_eligible = 0;
  for (const auto& p : final_state.active) {
    const std::int64_t life = p.last_discovery >= 0 ? p.last_discovery - p.activated_at : 0;
    ++st.histogram[life];
    ++st.particles;
    const bool late = p.last_discovery >= 0 && 4 * p.last_discovery > 3 * horizon;
    if (late) ++stale;
    if (4 * p.activated_at <= 3 * horizon) {
      ++st.eligible;
      if (late) ++stale_eligible;
    }
  }
  auto frac = [](std::int64_t a, std::int64_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  st.staleness = frac(stale_eligible, st.eligible);
  st.raw_staleness = frac(stale, st.particles);
  return st;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median: empty input");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

ShapeComparison compare_initial_sets(const Scenario& a, const Scenario& b, std::span<const std::int64_t> scales,
                                     std::int64_t pairs, std::uint64_t seed_base, std::uint64_t pair_offset,
                                     int workers) {
  if (pairs < 1) throw std::invalid_argument("compare_initial_sets: need at least one pair");
  ShapeComparison out;
  out.scales.assign(scales.begin(), scales.end());
  const std::int64_t horizon = *std::max_element(scales.begin(), scales.end());
  out.distances.assign(static_cast<std::size_t>(pairs), std::vector<double>(scales.size(), 0.0));
  const EngineOptions opts{.retirement_window = std::nullopt, .keep_discovery_log = false};

  for_each_replica(pairs, workers, [&](std::int64_t i) {
    Scenario sa = a;
    Scenario sb = b;
    sa.horizon = sb.horizon = horizon;
    sa.seed = seed_base + static_cast<std::uint64_t>(i);
    sb.seed = sa.seed + pair_offset;
    const auto ta = run(sa, RandomField(sa.seed), out.scales, opts);
    const auto tb = run(sb, RandomField(sb.seed), out.scales, opts);
    for (std::size_t k = 0; k < out.scales.size(); ++k) {
      // run() sorts its checkpoints; look up by time.
      const auto find = [&](const Trajectory& t) -> const Snapshot& {
        return *std::find_if(t.snapshots.begin(), t.snapshots.end(),
                             [&](const Snapshot& s) { return s.t == out.scales[k]; });
      };
      out.distances[static_cast<std::size_t>(i)][k] =
          compare_shapes(shape_estimate(find(ta)), shape_estimate(find(tb)));
    }
  });

  for (std::size_t k = 0; k < out.scales.size(); ++k) {
    std::vector<double> col;
    for (const auto& row : out.distances) col.push_back(row[k]);
    out.medians.push_back(median(col));
  }
  out.non_increasing = true;
  for (std::size_t k = 1; k < out.medians.size(); ++k) {
    if (out.medians[k] > out.medians[k - 1]) out.non_increasing = false;
  }
  return out;
}

}  // namespace frog
