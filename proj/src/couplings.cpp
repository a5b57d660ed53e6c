#include "frog/couplings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace frog {

Scenario one_type_projection(const Scenario& two_type) {
  Scenario s = two_type;
  s.mode = Mode::kOneType;
  s.p2.reset();
  for (auto& e : s.init.entries) {
    if (e.tag == InitTag::kTwo) e.tag = InitTag::kOne;
  }
  return s;
}

CoupledRun run_dominated(const Scenario& two_type, const RandomSource& f) {
  if (two_type.mode != Mode::kTwoType) throw std::invalid_argument("run_dominated: needs a two-type scenario");
  if (two_type.p1 > *two_type.p2) throw std::invalid_argument("run_dominated: requires p1 <= p2");
  const Scenario one = one_type_projection(two_type);
  const bool expect_equal = two_type.p1 == *two_type.p2;

  CoupledRun out;
  out.sharing = "full";
  out.trusted = true;  // nothing estimated: the inclusion is checked at every step
  out.proc_a = initial_state(one, f);
  out.proc_b = initial_state(two_type, f);
  out.sequences_equal = out.proc_a.discovered_count() == out.proc_b.discovered_count();

  const EngineOptions opts{.retirement_window = std::nullopt, .keep_discovery_log = false};
  while (out.proc_a.clock < two_type.horizon) {
    const auto new_a = step(out.proc_a, one, f, opts);
    const auto new_b = step(out.proc_b, two_type, f, opts);
    const std::int64_t t = out.proc_a.clock;
    // Inclusion at t-1 held, so only sites new to A at t can break it.
    for (const auto& x : new_a) {
      if (!out.proc_b.is_discovered(x)) out.violations.push_back({t, x});
    }
    const bool equal_now = new_a == new_b;
    out.sequences_equal = out.sequences_equal && equal_now;
    if (expect_equal) {
      for (const auto& x : new_b) {
        if (!out.proc_a.is_discovered(x)) out.violations.push_back({t, x});
      }
    }
    ++out.steps_checked;
  }
  return out;
}

namespace {

bool same_bits(double a, double b) {
  std::uint64_t ua = 0;
  std::uint64_t ub = 0;
  std::memcpy(&ua, &a, sizeof a);
  std::memcpy(&ub, &b, sizeof b);
  return ua == ub;
}

}  // namespace

CoupledRun run_sigma_coupled(const Scenario& base, const Scenario& alt, const SiteSet& sigma,
                             std::uint64_t shared_seed, std::uint64_t independent_seed,
                             const SigmaCouplingOptions& opts) {
  if (base.mode != Mode::kOneType || alt.mode != Mode::kOneType) {
    throw std::invalid_argument("run_sigma_coupled: both scenarios must be one-type");
  }
  if (base.dimension != alt.dimension || base.p1 != alt.p1 || !(base.eta == alt.eta) ||
      base.horizon != alt.horizon) {
    throw std::invalid_argument("run_sigma_coupled: scenarios must share dimension, p, eta and horizon");
  }
  const int d = base.dimension;
  if (!base.init.initial_sites(d).united(alt.init.initial_sites(d)).is_subset_of(sigma)) {
    throw std::invalid_argument("run_sigma_coupled: sigma must contain both initial sets");
  }
  const std::int64_t T = base.horizon;
  const std::int64_t window = opts.trust_window.value_or(T / 4);

  auto [field_a, field_b] = make_coupled_pair(shared_seed, independent_seed, sigma);
  const RandomField shared_only(shared_seed);
  const RandomSource& src_a = opts.share_sigma ? static_cast<const RandomSource&>(shared_only) : field_a;
  const RandomSource& src_b = opts.share_sigma ? static_cast<const RandomSource&>(shared_only) : field_b;

  CoupledRun out;
  out.sharing = opts.share_sigma ? "full" : "sigma-split";
  const EngineOptions eng{.retirement_window = std::nullopt, .keep_discovery_log = false};
  if (opts.audit) {
    AuditingSource audit_a(src_a);
    AuditingSource audit_b(src_b);
    out.proc_a = run(base, audit_a, {}, eng).final_state;
    out.proc_b = run(alt, audit_b, {}, eng).final_state;
    auto check = [&](const RandomKey& key) {
      if (sigma.contains(key.origin)) return;
      ++out.audited_keys;
      if (!same_bits(src_a.uniform(key), src_b.uniform(key))) ++out.audit_mismatches;
    };
    for (const auto& key : audit_a.touched()) check(key);
    for (const auto& key : audit_b.touched()) {
      if (!audit_a.touched().contains(key)) check(key);
    }
  } else {
    out.proc_a = run(base, src_a, {}, eng).final_state;
    out.proc_b = run(alt, src_b, {}, eng).final_state;
  }
  const EngineState& base_st = out.proc_a;
  const EngineState& alt_st = out.proc_b;

  // N_sigma within the horizon.
  for (const auto& p : base_st.active) {
    if (sigma.contains(p.id.origin)) out.last_sigma_discovery = std::max(out.last_sigma_discovery, p.last_discovery);
  }
  std::int64_t sigma_covered = 0;
  for (const auto& x : sigma) {
    const auto t = base_st.discovered_at(x);
    if (!t) {
      out.conclusive = false;
      out.inconclusive_reason = "sigma not fully discovered by the base process within the horizon";
      break;
    }
    sigma_covered = std::max(sigma_covered, *t);
  }

  // Guard: sigma-origin base particles beyond the moderate-deviation radius.
  {
    const double radius = std::pow(static_cast<double>(T), 0.75);
    std::int64_t total = 0;
    std::int64_t outside = 0;
    for (const auto& p : base_st.active) {
      if (!sigma.contains(p.id.origin)) continue;
      ++total;
      if (static_cast<double>(l1_norm(p.position)) > radius) ++outside;
    }
    out.guard_fraction = total ? static_cast<double>(outside) / static_cast<double>(total) : 0.0;
  }

  // Smallest uniform shift s with base xi_{n-s} inside xi^A_n for all n <= T.
  // Shift s fails at x iff disc(x) + s <= T and x is not yet discovered in the
  // alternative process by then, so the failing shifts at x form a prefix.
  {
    std::int64_t shift = 0;
    for (const auto& [x, site] : base_st.sites) {
      const std::int64_t tb = *site.discovered_at;
      const auto ta = alt_st.discovered_at(x);
      std::int64_t need = T - tb + 1;
      if (ta) need = std::min(need, *ta - tb);
      shift = std::max(shift, need);
    }
    out.min_shift = shift;
  }

  if (!out.conclusive) return out;
  const std::int64_t n_sigma = std::max(out.last_sigma_discovery, sigma_covered);
  out.n_sigma = n_sigma;

  std::int64_t n_shift = 0;
  for (const auto& [x, site] : base_st.sites) {
    if (*site.discovered_at > n_sigma) continue;
    const auto ta = alt_st.discovered_at(x);
    if (!ta) {
      out.conclusive = false;
      out.inconclusive_reason = "alternative process does not cover the base set at N_sigma within the horizon";
      return out;
    }
    n_shift = std::max(n_shift, *ta);
  }
  out.n_shift = n_shift;
  out.trusted = out.last_sigma_discovery <= T - window;
  out.steps_checked = std::max<std::int64_t>(0, T - n_shift);

  // base xi_{n-N} within xi^A_n for N < n <= T: each base site x must be
  // discovered in the alternative process by max(disc(x) + N, N + 1).
  for (const auto& [x, site] : base_st.sites) {
    const std::int64_t due = std::max(*site.discovered_at + n_shift, n_shift + 1);
    if (due > T) continue;
    const auto ta = alt_st.discovered_at(x);
    if (!ta || *ta > due) out.violations.push_back({due, x});
  }
  std::sort(out.violations.begin(), out.violations.end(), [](const auto& a, const auto& b) {
    return a.t != b.t ? a.t < b.t : a.site < b.site;
  });
  return out;
}

}  // namespace frog
