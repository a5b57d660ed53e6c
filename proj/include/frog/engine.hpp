#ifndef FROG_ENGINE_HPP
#define FROG_ENGINE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <absl/container/flat_hash_map.h>

#include "frog/lattice.hpp"
#include "frog/random_field.hpp"
#include "frog/scenario.hpp"

namespace frog {

struct ParticleState {
  ParticleId id;
  Site position;
  std::int64_t jumps_made = 0;
  std::int64_t attempts_at_site = 0;
  ParticleType type = ParticleType::kOne;
  std::int64_t activated_at = 0;
  std::int64_t last_discovery = -1;  // time of the most recent (co-)discovery, -1 if none
  std::int64_t discoveries = 0;
  bool retired = false;
};

struct SiteState {
  std::int64_t initial = 0;   // count present before activation
  std::int64_t sleeping = 0;
  std::optional<std::int64_t> discovered_at;
  std::optional<ParticleType> site_type;
};

struct DiscoveryEvent {
  std::int64_t time = 0;
  Site site;
  ParticleType type = ParticleType::kOne;
  ParticleId discoverer;
};

struct EngineOptions {
  /// When set, particles whose last discovery (or activation) is older than
  /// this many steps stop being moved. Off by default; changes the dynamics.
  std::optional<std::int64_t> retirement_window;
  bool keep_discovery_log = true;
};

/// Full state of one run. Sites are materialised on first visit, which for
/// this model coincides with discovery; everything else is implicit in the
/// random field.
struct EngineState {
  int dim = 2;
  std::int64_t clock = 0;
  std::vector<ParticleState> active;
  absl::flat_hash_map<Site, SiteState, SiteHash> sites;
  std::array<std::int64_t, 2> totals{};  // activations per type, initial particles included
  std::vector<DiscoveryEvent> discovery_log;

  /// Dense discovered-flag grid over every site reachable within the horizon
  /// (A u B dilated by T). Mirrors `sites`; left empty when the box is too
  /// large, in which case lookups go to the hash table.
  struct ReachGrid {
    Site lo;
    std::array<std::int64_t, kMaxDim> extent{1, 1, 1};
    std::vector<std::uint8_t> flags;
    std::int64_t index(const Site& x) const;  // -1 outside the box
  } grid;

  bool is_discovered(const Site& x) const;
  void mark_discovered(const Site& x);
  std::optional<std::int64_t> discovered_at(const Site& x) const;
  std::size_t discovered_count() const { return sites.size(); }
  SiteSet discovered() const;
  std::int64_t total(ParticleType t) const { return totals[t == ParticleType::kOne ? 0 : 1]; }
};

EngineState initial_state(const Scenario& s, const RandomSource& f);

/// Advances the state by one time step in place and returns the sites
/// discovered during it (sorted).
std::vector<Site> step(EngineState& st, const Scenario& s, const RandomSource& f,
                       const EngineOptions& opts = {});

struct SiteRecord {
  Site site;
  std::int64_t discovered_at = 0;
  std::optional<ParticleType> site_type;
};

struct Snapshot {
  std::int64_t t = 0;
  int dim = 2;
  Mode mode = Mode::kOneType;
  std::vector<SiteRecord> discovered;  // sorted by site
  std::array<std::int64_t, 2> totals{};
  std::int64_t active_particles = 0;
  std::uint64_t digest = 0;

  SiteSet sites() const;
};

Snapshot take_snapshot(const EngineState& st, Mode mode);

struct Trajectory {
  std::vector<Snapshot> snapshots;
  EngineState final_state;
};

/// Steps from the initial state to the horizon, snapshotting at each
/// checkpoint (0 <= checkpoint <= horizon).
Trajectory run(const Scenario& s, const RandomSource& f, std::span<const std::int64_t> checkpoints,
               const EngineOptions& opts = {});

/// Order-independent digest over active particles and discovered sites.
std::uint64_t state_digest(const EngineState& st);

/// Checks the deterministic invariants of the dynamics between successive
/// observations of one run: monotone discovered set, speed bound, per-site
/// conservation, immutable types, activation causality.
class InvariantMonitor {
 public:
  InvariantMonitor(const Scenario& s, const EngineState& initial);

  /// Returns descriptions of every violation found since the previous call.
  std::vector<std::string> observe(const EngineState& st, std::span<const Site> newly_discovered);

 private:
  struct SeenSite {
    std::int64_t discovered_at;
    std::optional<ParticleType> site_type;
  };
  struct SeenParticle {
    ParticleId id;
    ParticleType type;
    std::int64_t activated_at;
  };

  void check_all(const EngineState& st, std::span<const Site> newly, std::vector<std::string>& out);

  Mode mode_;
  SiteSet initial_sites_;
  absl::flat_hash_map<Site, SeenSite, SiteHash> seen_sites_;
  std::vector<SeenParticle> seen_particles_;
  std::int64_t last_clock_ = 0;
};

}  // namespace frog

#endif  // FROG_ENGINE_HPP
