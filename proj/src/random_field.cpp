#include "frog/random_field.hpp"

#include <algorithm>
#include <cmath>

namespace frog {

std::uint64_t hash_key(std::uint64_t seed, const RandomKey& key) {
  const std::uint64_t words[8] = {
      static_cast<std::uint64_t>(key.tag),
      static_cast<std::uint64_t>(key.origin.dim),
      static_cast<std::uint64_t>(static_cast<std::int64_t>(key.origin.c[0])),
      static_cast<std::uint64_t>(static_cast<std::int64_t>(key.origin.c[1])),
      static_cast<std::uint64_t>(static_cast<std::int64_t>(key.origin.c[2])),
      static_cast<std::uint64_t>(key.j),
      static_cast<std::uint64_t>(key.n),
      static_cast<std::uint64_t>(key.k),
  };
  std::uint64_t acc = 0;
  for (int i = 0; i < 8; ++i) acc += words[i] * kKeyMultipliers[i];
  return mix64(mix64(acc ^ mix64(seed)));
}

Site RandomSource::walk_step(const ParticleId& p, std::int64_t n) const {
  const int d = p.origin.dim;
  const double u = uniform(RandomKey{StreamTag::kWalk, p.origin, p.index, n, 0});
  const int i = std::min(static_cast<int>(u * 2 * d), 2 * d - 1);
  return Site::unit(d, i / 2, i % 2 == 0 ? 1 : -1);
}

double RandomSource::delay(const ParticleId& p, std::int64_t n, std::int64_t k) const {
  return uniform(RandomKey{StreamTag::kDelay, p.origin, p.index, n, k});
}

RandomField::RandomField(std::uint64_t seed, SiteSet override_region, std::uint64_t override_seed)
    : seed_(seed), override_seed_(override_seed) {
  if (!override_region.empty()) {
    lo_ = hi_ = *override_region.begin();
    for (const auto& x : override_region) {
      for (int i = 0; i < kMaxDim; ++i) {
        lo_[i] = std::min(lo_[i], x[i]);
        hi_[i] = std::max(hi_[i], x[i]);
      }
    }
    region_ = std::move(override_region);
  }
}

std::uint64_t RandomField::seed_for(const Site& origin) const {
  if (region_) {
    for (int i = 0; i < kMaxDim; ++i) {
      if (origin[i] < lo_[i] || origin[i] > hi_[i]) return seed_;
    }
    if (region_->contains(origin)) return override_seed_;
  }
  return seed_;
}

double RandomField::uniform(const RandomKey& key) const {
  return to_unit(hash_key(seed_for(key.origin), key));
}

double uniform(const RandomSource& f, const RandomKey& key) { return f.uniform(key); }

Site walk_step(const RandomSource& f, const ParticleId& p, std::int64_t n) { return f.walk_step(p, n); }

double delay(const RandomSource& f, const ParticleId& p, std::int64_t n, std::int64_t k) {
  return f.delay(p, n, k);
}

std::pair<RandomField, RandomField> make_coupled_pair(std::uint64_t shared_seed,
                                                      std::uint64_t independent_seed,
                                                      const SiteSet& sigma) {
  // Override seeds are derived so that they differ from each other and from
  // the shared seed for any choice of inputs.
  const std::uint64_t s1 = mix64(mix64(independent_seed) ^ 0x5eed0001ULL);
  const std::uint64_t s2 = mix64(mix64(independent_seed) ^ 0x5eed0002ULL);
  return {RandomField(shared_seed, sigma, s1), RandomField(shared_seed, sigma, s2)};
}

double AuditingSource::uniform(const RandomKey& key) const {
  touched_.insert(key);
  return inner_.uniform(key);
}

}  // namespace frog
