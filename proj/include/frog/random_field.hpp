#ifndef FROG_RANDOM_FIELD_HPP
#define FROG_RANDOM_FIELD_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>

#include <absl/container/flat_hash_set.h>

#include "frog/lattice.hpp"

namespace frog {

/// Identity of a particle: its site of origin and its 1-based index there.
struct ParticleId {
  Site origin;
  std::int64_t index = 1;

  friend bool operator==(const ParticleId&, const ParticleId&) = default;
  friend auto operator<=>(const ParticleId&, const ParticleId&) = default;
};

enum class StreamTag : std::uint8_t { kWalk = 1, kDelay = 2, kEta = 3, kInit = 4, kTie = 5 };

/// Structured key into the random field. Streams use the slots as follows:
///   WALK  (origin, j, n, 0)     jump n of particle (origin, j)
///   DELAY (origin, j, n, k)     attempt k >= 1 while waiting for jump n
///   ETA   (site, 0, 0, 0)       sleeping count at a site
///   TIE   (site, 0, t, 0)       coin for a simultaneous two-type arrival
struct RandomKey {
  StreamTag tag = StreamTag::kWalk;
  Site origin;
  std::int64_t j = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;

  friend bool operator==(const RandomKey&, const RandomKey&) = default;

  template <typename H>
  friend H AbslHashValue(H h, const RandomKey& key) {
    return H::combine(std::move(h), key.tag, key.origin.c, key.origin.dim, key.j, key.n, key.k);
  }
};

/// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Odd multipliers of the key words, in serialisation order.
inline constexpr std::uint64_t kKeyMultipliers[8] = {
    0x9e3779b97f4a7c15ULL, 0xc2b2ae3d27d4eb4fULL, 0x165667b19e3779f9ULL, 0xd6e8feb86659fd93ULL,
    0xff51afd7ed558ccdULL, 0xc4ceb9fe1a85ec53ULL, 0xa0761d6478bd642fULL, 0xe7037ed1a0b428dbULL};

/// 64-bit hash of (seed, key). The key is serialised as eight 64-bit words
///   w = (tag, dim, c0, c1, c2, j, n, k)
/// with signed values in two's complement, and hashed as
///   h = mix64(mix64((sum_i w_i * M_i mod 2^64) ^ mix64(seed)))
/// with M = kKeyMultipliers. This serialisation is part of the
/// reproducibility contract.
std::uint64_t hash_key(std::uint64_t seed, const RandomKey& key);

/// 53-bit uniform in [0,1) from a 64-bit hash.
constexpr double to_unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

/// Interface through which the dynamics consume randomness. Everything is a
/// function of the key; implementations must be pure.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual double uniform(const RandomKey& key) const = 0;

  /// Jump n of particle p: one of the 2d unit steps. Direction table: index
  /// i = floor(u * 2d) maps to axis i / 2 with sign + for even i, - for odd i.
  virtual Site walk_step(const ParticleId& p, std::int64_t n) const;

  /// The delay variable for attempt k >= 1 while waiting for jump n.
  virtual double delay(const ParticleId& p, std::int64_t n, std::int64_t k) const;
};

/// Counter-based random field. Keys whose origin lies in the override region
/// use the override seed; all other keys use the base seed.
class RandomField final : public RandomSource {
 public:
  explicit RandomField(std::uint64_t seed) : seed_(seed) {}
  RandomField(std::uint64_t seed, SiteSet override_region, std::uint64_t override_seed);

  std::uint64_t seed() const { return seed_; }
  const std::optional<SiteSet>& override_region() const { return region_; }

  /// Seed in effect for keys with this origin.
  std::uint64_t seed_for(const Site& origin) const;

  double uniform(const RandomKey& key) const override;

 private:
  std::uint64_t seed_;
  std::optional<SiteSet> region_;
  std::uint64_t override_seed_ = 0;
  Site lo_, hi_;
};

double uniform(const RandomSource& f, const RandomKey& key);
Site walk_step(const RandomSource& f, const ParticleId& p, std::int64_t n);
double delay(const RandomSource& f, const ParticleId& p, std::int64_t n, std::int64_t k);

/// Two fields that agree on every key with origin outside sigma and use
/// independent seeds on keys with origin in sigma.
std::pair<RandomField, RandomField> make_coupled_pair(std::uint64_t shared_seed,
                                                      std::uint64_t independent_seed,
                                                      const SiteSet& sigma);

/// Decorator that records every key evaluated through it. Not thread-safe;
/// meant for single-run audits.
class AuditingSource final : public RandomSource {
 public:
  explicit AuditingSource(const RandomSource& inner) : inner_(inner) {}

  double uniform(const RandomKey& key) const override;

  const absl::flat_hash_set<RandomKey>& touched() const { return touched_; }

 private:
  const RandomSource& inner_;
  mutable absl::flat_hash_set<RandomKey> touched_;
};

}  // namespace frog

#endif  // FROG_RANDOM_FIELD_HPP
