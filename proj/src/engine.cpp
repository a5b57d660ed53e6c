#include "frog/engine.hpp"

#include <algorithm>
#include <iostream>

namespace frog {

namespace {
constexpr std::int64_t kMaxGridCells = std::int64_t{1} << 25;
}

std::int64_t EngineState::ReachGrid::index(const Site& x) const {
  if (flags.empty()) return -1;
  std::int64_t i = 0;
  std::int64_t stride = 1;
  for (int a = 0; a < kMaxDim; ++a) {
    const std::int64_t off = static_cast<std::int64_t>(x[a]) - lo[a];
    const auto ext = extent[static_cast<std::size_t>(a)];
    if (off < 0 || off >= ext) return -1;
    i += off * stride;
    stride *= ext;
  }
  return i;
}

bool EngineState::is_discovered(const Site& x) const {
  const auto i = grid.index(x);
  if (i >= 0) return grid.flags[static_cast<std::size_t>(i)] != 0;
  return sites.contains(x);
}

void EngineState::mark_discovered(const Site& x) {
  const auto i = grid.index(x);
  if (i >= 0) grid.flags[static_cast<std::size_t>(i)] = 1;
}

std::optional<std::int64_t> EngineState::discovered_at(const Site& x) const {
  auto it = sites.find(x);
  if (it == sites.end()) return std::nullopt;
  return it->second.discovered_at;
}

SiteSet EngineState::discovered() const {
  std::vector<Site> out;
  out.reserve(sites.size());
  for (const auto& [x, st] : sites) {
    if (st.discovered_at) out.push_back(x);
  }
  return SiteSet(dim, std::move(out));
}

namespace {

std::size_t type_slot(ParticleType t) { return t == ParticleType::kOne ? 0 : 1; }

ParticleType to_type(InitTag t) { return t == InitTag::kTwo ? ParticleType::kTwo : ParticleType::kOne; }

void activate_site(EngineState& st, const Site& x, std::int64_t count, ParticleType type, std::int64_t time) {
  for (std::int64_t j = 1; j <= count; ++j) {
    ParticleState p;
    p.id = ParticleId{x, j};
    p.position = x;
    p.type = type;
    p.activated_at = time;
    st.active.push_back(p);
  }
  st.totals[type_slot(type)] += count;
}

ParticleType resolve_tie(const Scenario& s, const RandomSource& f, const Site& x, std::int64_t time) {
  switch (s.tie_rule) {
    case TieRule::kType1Wins:
      return ParticleType::kOne;
    case TieRule::kType2Wins:
      return ParticleType::kTwo;
    case TieRule::kCoinFlip:
      return f.uniform(RandomKey{StreamTag::kTie, x, 0, time, 0}) < 0.5 ? ParticleType::kOne
                                                                        : ParticleType::kTwo;
    case TieRule::kParity: {
      std::int64_t sum = 0;
      for (int i = 0; i < x.dim; ++i) sum += x[i];
      return sum % 2 == 0 ? ParticleType::kOne : ParticleType::kTwo;
    }
  }
  return ParticleType::kOne;
}

struct Arrival {
  Site site;
  std::uint32_t particle;
};

}  // namespace

EngineState initial_state(const Scenario& s, const RandomSource& /*f*/) {
  EngineState st;
  st.dim = s.dimension;
  {
    const SiteSet initial = s.init.initial_sites(s.dimension);
    if (!initial.empty()) {
      Site lo = *initial.begin();
      Site hi = lo;
      for (const auto& x : initial) {
        for (int a = 0; a < s.dimension; ++a) {
          lo[a] = std::min(lo[a], x[a]);
          hi[a] = std::max(hi[a], x[a]);
        }
      }
      std::int64_t volume = 1;
      std::array<std::int64_t, kMaxDim> extent{1, 1, 1};
      for (int a = 0; a < s.dimension; ++a) {
        extent[static_cast<std::size_t>(a)] = static_cast<std::int64_t>(hi[a]) - lo[a] + 2 * s.horizon + 1;
        volume *= extent[static_cast<std::size_t>(a)];
        if (volume > kMaxGridCells) break;
      }
      if (volume <= kMaxGridCells) {
        for (int a = 0; a < s.dimension; ++a) {
          lo[a] = static_cast<std::int32_t>(lo[a] - s.horizon);
        }
        st.grid.lo = lo;
        st.grid.extent = extent;
        st.grid.flags.assign(static_cast<std::size_t>(volume), 0);
      }
    }
  }
  for (const auto& e : s.init.entries) {
    if (e.tag == InitTag::kNone) continue;
    const auto type = to_type(e.tag);
    SiteState site;
    site.initial = e.count;
    site.sleeping = 0;
    site.discovered_at = 0;
    site.site_type = type;
    st.sites.emplace(e.site, site);
    st.mark_discovered(e.site);
    activate_site(st, e.site, e.count, type, 0);
  }
  return st;
}

std::vector<Site> step(EngineState& st, const Scenario& s, const RandomSource& f, const EngineOptions& opts) {
  const std::int64_t now = st.clock + 1;
  const std::size_t n_before = st.active.size();
  const double p_one = s.threshold(ParticleType::kOne);
  const double p_two = s.mode == Mode::kTwoType ? s.threshold(ParticleType::kTwo) : p_one;

  // Moves, resolved against the pre-step discovered set.
  std::vector<Arrival> arrivals;
  for (std::size_t i = 0; i < n_before; ++i) {
    auto& p = st.active[i];
    if (p.retired) continue;
    if (opts.retirement_window &&
        st.clock - std::max(p.last_discovery, p.activated_at) > *opts.retirement_window) {
      p.retired = true;
      continue;
    }
    const double threshold = p.type == ParticleType::kOne ? p_one : p_two;
    ++p.attempts_at_site;
    // delay values lie in [0,1), so threshold 1 always jumps.
    if (threshold < 1.0 && f.delay(p.id, p.jumps_made, p.attempts_at_site) > threshold) continue;
    p.position = p.position + f.walk_step(p.id, p.jumps_made);
    ++p.jumps_made;
    p.attempts_at_site = 0;
    if (!st.is_discovered(p.position)) arrivals.push_back({p.position, static_cast<std::uint32_t>(i)});
  }

  std::sort(arrivals.begin(), arrivals.end(), [&](const Arrival& a, const Arrival& b) {
    if (a.site != b.site) return a.site < b.site;
    return st.active[a.particle].id < st.active[b.particle].id;
  });

  std::vector<Site> newly;
  for (std::size_t lo = 0; lo < arrivals.size();) {
    std::size_t hi = lo;
    bool has_one = false;
    bool has_two = false;
    while (hi < arrivals.size() && arrivals[hi].site == arrivals[lo].site) {
      const auto t = st.active[arrivals[hi].particle].type;
      has_one |= t == ParticleType::kOne;
      has_two |= t == ParticleType::kTwo;
      ++hi;
    }
    const Site x = arrivals[lo].site;
    const ParticleType type = has_one && has_two ? resolve_tie(s, f, x, now)
                              : has_one           ? ParticleType::kOne
                                                  : ParticleType::kTwo;
    const ParticleId* discoverer = nullptr;
    for (std::size_t a = lo; a < hi; ++a) {
      auto& p = st.active[arrivals[a].particle];
      p.last_discovery = now;
      ++p.discoveries;
      if (!discoverer && p.type == type) discoverer = &p.id;
    }
    if (opts.keep_discovery_log) st.discovery_log.push_back({now, x, type, *discoverer});

    const std::int64_t count = s.init.fixed_count(x).value_or(sample_eta(f, s.eta, x));
    SiteState site;
    site.initial = count;
    site.sleeping = 0;
    site.discovered_at = now;
    site.site_type = type;
    st.sites.emplace(x, site);
    st.mark_discovered(x);
    activate_site(st, x, count, type, now);
    newly.push_back(x);
    lo = hi;
  }
  st.clock = now;
  return newly;
}

SiteSet Snapshot::sites() const {
  std::vector<Site> out;
  out.reserve(discovered.size());
  for (const auto& r : discovered) out.push_back(r.site);
  return SiteSet(dim, std::move(out));
}

Snapshot take_snapshot(const EngineState& st, Mode mode) {
  Snapshot snap;
  snap.t = st.clock;
  snap.dim = st.dim;
  snap.mode = mode;
  snap.discovered.reserve(st.sites.size());
  for (const auto& [x, site] : st.sites) {
    if (site.discovered_at) {
      snap.discovered.push_back({x, *site.discovered_at, mode == Mode::kTwoType ? site.site_type : std::nullopt});
    }
  }
  std::sort(snap.discovered.begin(), snap.discovered.end(),
            [](const SiteRecord& a, const SiteRecord& b) { return a.site < b.site; });
  snap.totals = st.totals;
  snap.active_particles = static_cast<std::int64_t>(st.active.size());
  snap.digest = state_digest(st);
  return snap;
}

Trajectory run(const Scenario& s, const RandomSource& f, std::span<const std::int64_t> checkpoints,
               const EngineOptions& opts) {
  std::vector<std::int64_t> cps(checkpoints.begin(), checkpoints.end());
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  if (!cps.empty() && (cps.front() < 0 || cps.back() > s.horizon)) {
    throw std::invalid_argument("run: checkpoints must lie in [0, horizon]");
  }
  if (opts.retirement_window) {
    std::clog << "warning: particle retirement enabled (window " << *opts.retirement_window
              << "); dynamics are approximate\n";
  }
  Trajectory traj;
  traj.final_state = initial_state(s, f);
  auto next = cps.begin();
  while (true) {
    if (next != cps.end() && *next == traj.final_state.clock) {
      traj.snapshots.push_back(take_snapshot(traj.final_state, s.mode));
      ++next;
    }
    if (traj.final_state.clock >= s.horizon) break;
    step(traj.final_state, s, f, opts);
  }
  return traj;
}

std::uint64_t state_digest(const EngineState& st) {
  auto absorb_site = [](std::uint64_t h, const Site& x) {
    h = mix64(h ^ static_cast<std::uint64_t>(x.dim));
    for (int i = 0; i < kMaxDim; ++i) h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(x[i])));
    return h;
  };
  std::uint64_t particles = 0;
  for (const auto& p : st.active) {
    std::uint64_t h = absorb_site(0x70a271c1eULL, p.id.origin);
    h = mix64(h ^ static_cast<std::uint64_t>(p.id.index));
    h = absorb_site(h, p.position);
    h = mix64(h ^ static_cast<std::uint64_t>(p.jumps_made));
    h = mix64(h ^ static_cast<std::uint64_t>(p.attempts_at_site));
    h = mix64(h ^ static_cast<std::uint64_t>(p.type));
    h = mix64(h ^ static_cast<std::uint64_t>(p.activated_at));
    h = mix64(h ^ static_cast<std::uint64_t>(p.retired));
    particles += h;
  }
  std::uint64_t sites = 0;
  for (const auto& [x, site] : st.sites) {
    std::uint64_t h = absorb_site(0x517e5ULL, x);
    h = mix64(h ^ static_cast<std::uint64_t>(site.discovered_at.value_or(-1)));
    h = mix64(h ^ static_cast<std::uint64_t>(site.site_type ? static_cast<int>(*site.site_type) : 0));
    h = mix64(h ^ static_cast<std::uint64_t>(site.sleeping));
    h = mix64(h ^ static_cast<std::uint64_t>(site.initial));
    sites += h;
  }
  return mix64(particles ^ mix64(sites + static_cast<std::uint64_t>(st.clock)));
}

// ----------------------------------------------------------- InvariantMonitor

InvariantMonitor::InvariantMonitor(const Scenario& s, const EngineState& initial)
    : mode_(s.mode), initial_sites_(s.init.initial_sites(s.dimension)) {
  std::vector<std::string> ignored;
  check_all(initial, {}, ignored);
}

std::vector<std::string> InvariantMonitor::observe(const EngineState& st, std::span<const Site> newly) {
  std::vector<std::string> out;
  check_all(st, newly, out);
  return out;
}

void InvariantMonitor::check_all(const EngineState& st, std::span<const Site> newly,
                                 std::vector<std::string>& out) {
  auto report = [&](std::string what) { out.push_back("t=" + std::to_string(st.clock) + ": " + std::move(what)); };

  if (st.clock < last_clock_) report("clock went backwards");
  last_clock_ = st.clock;

  // Monotone discovered set and immutable site types.
  for (const auto& [x, seen] : seen_sites_) {
    auto it = st.sites.find(x);
    if (it == st.sites.end() || !it->second.discovered_at) {
      report("site un-discovered");
      continue;
    }
    if (*it->second.discovered_at != seen.discovered_at) report("discovery time changed");
    if (it->second.site_type != seen.site_type) report("site type changed");
  }

  // Speed bound on newly discovered sites; together with immutability of
  // discovery times this covers every discovered site.
  for (const auto& x : newly) {
    auto it = st.sites.find(x);
    if (it == st.sites.end() || !it->second.discovered_at) {
      report("reported discovery missing from site table");
      continue;
    }
    if (*it->second.discovered_at != st.clock) report("new discovery not stamped with current time");
    std::int64_t dist = INT64_MAX;
    for (const auto& a : initial_sites_) dist = std::min(dist, l1_distance(x, a));
    if (dist > *it->second.discovered_at) report("speed bound violated");
  }

  for (const auto& [x, site] : st.sites) {
    if (!site.discovered_at) continue;
    if (!seen_sites_.contains(x)) {
      if (st.clock == 0 || *site.discovered_at == st.clock) {
        seen_sites_.emplace(x, SeenSite{*site.discovered_at, site.site_type});
      } else {
        report("discovered site appeared with a stale time");
        seen_sites_.emplace(x, SeenSite{*site.discovered_at, site.site_type});
      }
    }
    if (site.sleeping != 0) report("discovered site still has sleeping particles");
    if (*site.discovered_at > st.clock) report("discovery time in the future");
    if (!site.site_type) report("discovered site has no type");
  }
  if (seen_sites_.size() != st.sites.size()) report("untracked materialised sites");

  // Append-only particle table with immutable types; activation causality.
  if (st.active.size() < seen_particles_.size()) report("particle table shrank");
  for (std::size_t i = 0; i < std::min(st.active.size(), seen_particles_.size()); ++i) {
    const auto& p = st.active[i];
    const auto& s = seen_particles_[i];
    if (p.id != s.id || p.type != s.type || p.activated_at != s.activated_at) {
      report("particle identity, type or activation time changed");
    }
  }
  absl::flat_hash_map<Site, std::int64_t, SiteHash> from_origin;
  for (std::size_t i = 0; i < st.active.size(); ++i) {
    const auto& p = st.active[i];
    if (i >= seen_particles_.size()) seen_particles_.push_back({p.id, p.type, p.activated_at});
    ++from_origin[p.id.origin];
    auto it = st.sites.find(p.id.origin);
    if (it == st.sites.end() || !it->second.discovered_at) {
      report("active particle from undiscovered origin");
      continue;
    }
    const std::int64_t expected = initial_sites_.contains(p.id.origin) ? 0 : *it->second.discovered_at;
    if (p.activated_at != expected) report("activation time differs from origin discovery time");
    if (mode_ == Mode::kTwoType && it->second.site_type != p.type) report("particle type differs from origin type");
    if (l1_distance(p.position, p.id.origin) > p.jumps_made) report("particle displaced beyond its jump count");
    if (p.jumps_made > st.clock - p.activated_at) report("particle jumped more often than time allows");
  }

  // Conservation: initial = sleeping + activated from here.
  for (const auto& [x, site] : st.sites) {
    auto it = from_origin.find(x);
    const std::int64_t activated = it == from_origin.end() ? 0 : it->second;
    if (site.initial != site.sleeping + activated) report("particle conservation violated");
  }
}

}  // namespace frog
