#ifndef FROG_SCENARIO_HPP
#define FROG_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "frog/lattice.hpp"
#include "frog/random_field.hpp"

namespace frog {

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ParseError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};
class ValidationError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

/// Law of the i.i.d. sleeping counts eta(x).
///   constant k   P(k) = 1
///   bernoulli q  P(1) = q, P(0) = 1 - q
///   poisson l    P(k) = e^-l l^k / k!
///   geometric q  P(k) = (1 - q)^k q, k >= 0
///   zeta s       P(k) = k^-s / zeta(s), k >= 1
struct EtaDistribution {
  enum class Kind { kConstant, kBernoulli, kPoisson, kGeometric, kZeta };

  Kind kind = Kind::kConstant;
  std::int64_t k = 1;
  double q = 0.5;
  double lambda = 1.0;
  double s = 2.0;

  static EtaDistribution constant(std::int64_t k);
  static EtaDistribution bernoulli(double q);
  static EtaDistribution poisson(double lambda);
  static EtaDistribution geometric(double q);
  static EtaDistribution zeta(double s);

  void validate() const;
  /// Inverse CDF evaluated at u in [0,1).
  std::int64_t quantile(double u) const;

  friend bool operator==(const EtaDistribution&, const EtaDistribution&) = default;
};

/// P(eta >= k) for ZETA s, k >= 1. Exact summation below a cutoff, Euler-Maclaurin tail above.
double zeta_tail(double s, std::int64_t k);

enum class ParticleType : std::uint8_t { kOne = 1, kTwo = 2 };
enum class InitTag : std::uint8_t { kOne, kTwo, kNone };

struct InitEntry {
  Site site;
  std::int64_t count = 1;
  InitTag tag = InitTag::kOne;

  friend bool operator==(const InitEntry&, const InitEntry&) = default;
};

/// Explicit counts on finitely many sites. Sites tagged ONE form A, TWO form B;
/// NONE entries fix the sleeping count at a non-initial site.
struct InitialConfig {
  std::vector<InitEntry> entries;  // sorted by site

  SiteSet set_a(int d) const;
  SiteSet set_b(int d) const;
  SiteSet initial_sites(int d) const;  // A union B
  std::optional<std::int64_t> fixed_count(const Site& x) const;

  friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

enum class Mode : std::uint8_t { kOneType, kTwoType };
enum class TieRule : std::uint8_t { kType1Wins, kType2Wins, kCoinFlip, kParity };

struct Scenario {
  int dimension = 2;
  Mode mode = Mode::kOneType;
  double p1 = 1.0;
  std::optional<double> p2;
  EtaDistribution eta;
  InitialConfig init;
  TieRule tie_rule = TieRule::kType1Wins;
  std::int64_t horizon = 100;
  std::uint64_t seed = 0;

  /// Jump probability of a particle of the given type.
  double threshold(ParticleType t) const {
    return mode == Mode::kTwoType && t == ParticleType::kTwo ? *p2 : p1;
  }

  /// Throws ValidationError on any broken invariant.
  void validate() const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario parse_scenario(std::string_view text);
std::string serialize_scenario(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

/// Sleeping count at a site outside A and B, drawn from the ETA stream.
std::int64_t sample_eta(const RandomSource& f, const EtaDistribution& eta, const Site& x);

/// Scenario builders used by the measurement drivers and tests.
InitialConfig single_site_config(const Site& x, std::int64_t count, InitTag tag = InitTag::kOne);
void add_box(InitialConfig& cfg, const Site& center, std::int32_t half, std::int64_t count, InitTag tag);
void normalize(InitialConfig& cfg);

std::string_view to_string(Mode m);
std::string_view to_string(TieRule r);
std::string_view to_string(EtaDistribution::Kind k);
std::string_view to_string(InitTag t);

}  // namespace frog

#endif  // FROG_SCENARIO_HPP
