#ifndef FROG_COUPLINGS_HPP
#define FROG_COUPLINGS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frog/engine.hpp"

namespace frog {

struct InclusionViolation {
  std::int64_t t = 0;
  Site site;
};

/// Two processes run on shared keyed randomness, with the outcome of the
/// claimed set inclusion between them.
struct CoupledRun {
  std::string sharing;  // "full" or "sigma-split"
  std::vector<InclusionViolation> violations;
  std::int64_t steps_checked = 0;
  EngineState proc_a;
  EngineState proc_b;

  // Domination coupling: true iff the discovered-set sequences coincided.
  bool sequences_equal = false;

  // Sigma coupling.
  bool conclusive = true;
  std::string inconclusive_reason;
  bool trusted = false;
  std::optional<std::int64_t> n_sigma;
  std::optional<std::int64_t> n_shift;    // N: first time xi^A covers base xi at N_sigma
  std::optional<std::int64_t> min_shift;  // smallest s with base xi_{n-s} inside xi^A_n for all n <= T
  std::int64_t last_sigma_discovery = -1;
  double guard_fraction = 0;              // sigma-origin base particles outside D(T^{3/4})

  // Shared-key audit.
  std::int64_t audited_keys = 0;
  std::int64_t audit_mismatches = 0;
};

/// One-type process on A union B with jump probability p1 that the two-type
/// scenario dominates.
Scenario one_type_projection(const Scenario& two_type);

/// Runs the one-type projection (threshold p1) and the two-type process on
/// the same field and checks xi^{A u B}_t(p1) within xi^{A,B}_t(p1, p2) after
/// every step. When p1 == p2 the reverse inclusion is checked as well.
/// Throws std::invalid_argument if p1 > p2 or the scenario is not two-type.
CoupledRun run_dominated(const Scenario& two_type, const RandomSource& f);

struct SigmaCouplingOptions {
  std::optional<std::int64_t> trust_window;  // default horizon / 4
  bool share_sigma = false;                  // degenerate coupling: one field for both
  bool audit = false;                        // record and compare all touched shared keys
};

/// Base process from {o} and alternative process from A, coupled through
/// make_coupled_pair on sigma. Checks base xi_{n-N} within xi^A_n for
/// N < n <= T, with N_sigma approximated within the horizon.
CoupledRun run_sigma_coupled(const Scenario& base, const Scenario& alt, const SiteSet& sigma,
                             std::uint64_t shared_seed, std::uint64_t independent_seed,
                             const SigmaCouplingOptions& opts = {});

}  // namespace frog

#endif  // FROG_COUPLINGS_HPP
