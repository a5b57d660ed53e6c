// frogsim: command-line driver for simulations, measurements and coupling checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "frog/couplings.hpp"
#include "frog/engine.hpp"
#include "frog/export.hpp"
#include "frog/measure.hpp"
#include "frog/replicas.hpp"
#include "frog/scenario.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace frog;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kIoError = 3,
  kInvariantViolation = 4,
  kInconclusive = 5,
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Writes files below the output directory and keeps the inventory for the
/// manifest.
class OutputDir {
 public:
  explicit OutputDir(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& rel, const std::string& bytes) {
    const fs::path path = root_ / rel;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    files_.push_back({{"path", rel},
                      {"bytes", bytes.size()},
                      {"digest", "fnv1a64:" + io::hex64(io::content_digest(bytes))}});
  }

  void write_json(const std::string& rel, const json& j) { write(rel, j.dump(2) + "\n"); }

  json inventory() const {
    json files = files_;
    std::sort(files.begin(), files.end(), [](const json& a, const json& b) { return a["path"] < b["path"]; });
    return files;
  }

 private:
  fs::path root_;
  json files_ = json::array();
};

struct Options {
  std::vector<std::string> scenarios;
  std::string out;
  std::int64_t replicas = 1;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::int64_t> checkpoints;
  int workers = 1;
  std::int64_t k_threshold = 50;
  std::int64_t horizon = 0;
  CLI::Option* horizon_opt = nullptr;

  // Subcommand specifics.
  std::string couple_mode = "dominated";
  std::int32_t sigma_half = 2;
  std::optional<std::int64_t> trust_window;
  bool audit = false;
  bool check_invariants = false;
  std::string snapshot;
  std::vector<std::string> formats{"pgm", "svg"};
  int pixels = 512;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path + "'");
  return buf.str();
}

/// Loads a scenario and applies the --horizon / --seed overrides.
Scenario load(const Options& o, std::size_t which) {
  if (which >= o.scenarios.size()) throw InputError("missing --scenario");
  Scenario s = parse_scenario(read_text(o.scenarios[which]));
  if (o.horizon_opt->count()) s.horizon = o.horizon;
  if (o.seed_opt->count()) s.seed = o.seed;
  s.validate();
  return s;
}

std::vector<std::int64_t> resolve_checkpoints(const Options& o, const Scenario& s) {
  std::vector<std::int64_t> cps = o.checkpoints.empty() ? std::vector<std::int64_t>{s.horizon} : o.checkpoints;
  for (auto t : cps) {
    if (t < 0 || t > s.horizon) {
      throw InputError("checkpoint " + std::to_string(t) + " outside [0, " + std::to_string(s.horizon) + "]");
    }
  }
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  return cps;
}

void require_replicas(const Options& o) {
  if (o.replicas < 1) throw InputError("--replicas must be >= 1");
}

// Files of replica i go to the top level for single runs, else below replica_NNNN/.
std::string replica_prefix(const Options& o, std::int64_t i) {
  if (o.replicas == 1) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "replica_%04lld/", static_cast<long long>(i));
  return buf;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::int64_t count) {
  std::vector<std::uint64_t> seeds;
  for (std::int64_t i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

template <typename Fn>
std::string render_to_string(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

struct Report {
  int code = kOk;
  json manifest;
};

// ---------------------------------------------------------------- simulate

Report cmd_simulate(const Options& o, OutputDir& dir) {
  require_replicas(o);
  const Scenario base = load(o, 0);
  const auto cps = resolve_checkpoints(o, base);

  struct Slot {
    std::vector<std::pair<std::string, std::string>> files;
    std::vector<std::string> violations;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(o.replicas));
  for_each_replica(o.replicas, o.workers, [&](std::int64_t i) {
    Scenario s = base;
    s.seed = base.seed + static_cast<std::uint64_t>(i);
    const RandomField f(s.seed);
    Slot& slot = slots[static_cast<std::size_t>(i)];

    Trajectory traj;
    EngineState st = initial_state(s, f);
    std::optional<InvariantMonitor> monitor;
    if (o.check_invariants) monitor.emplace(s, st);
    auto next = cps.begin();
    auto snap_if_due = [&] {
      while (next != cps.end() && *next == st.clock) {
        traj.snapshots.push_back(take_snapshot(st, s.mode));
        ++next;
      }
    };
    snap_if_due();
    while (st.clock < s.horizon) {
      const auto newly = step(st, s, f);
      if (monitor) {
        for (auto& v : monitor->observe(st, newly)) slot.violations.push_back("t=" + std::to_string(st.clock) + ": " + v);
      }
      snap_if_due();
    }
    traj.final_state = std::move(st);

    const std::string prefix = replica_prefix(o, i);
    for (const auto& snap : traj.snapshots) {
      slot.files.emplace_back(prefix + "snapshot_t" + std::to_string(snap.t) + ".csv",
                              render_to_string([&](std::ostream& out) { io::write_snapshot_csv(out, snap); }));
    }
    json tj = io::trajectory_json(s, traj);
    if (o.check_invariants) tj["invariant_violations"] = slot.violations;
    slot.files.emplace_back(prefix + "trajectory.json", tj.dump(2) + "\n");
  });

  Report r;
  std::int64_t violations = 0;
  for (const auto& slot : slots) {
    for (const auto& [path, bytes] : slot.files) dir.write(path, bytes);
    violations += static_cast<std::int64_t>(slot.violations.size());
  }
  r.manifest["checkpoints"] = cps;
  r.manifest["seeds"] = seed_list(base.seed, o.replicas);
  r.manifest["seed_base"] = base.seed;
  if (o.check_invariants) r.manifest["invariant_violations"] = violations;
  if (violations > 0) r.code = kInvariantViolation;
  return r;
}

// ---------------------------------------------------------------- shape

Report cmd_shape(const Options& o, OutputDir& dir) {
  require_replicas(o);
  Scenario base = load(o, 0);
  auto scales = resolve_checkpoints(o, base);
  if (scales.front() < 1) throw InputError("shape scales must be >= 1");
  base.horizon = scales.back();

  struct Slot {
    std::vector<std::pair<std::string, std::string>> files;
    json summary;
    bool bounds_ok = true;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(o.replicas));
  const EngineOptions eng{.retirement_window = std::nullopt, .keep_discovery_log = false};
  for_each_replica(o.replicas, o.workers, [&](std::int64_t i) {
    Scenario s = base;
    s.seed = base.seed + static_cast<std::uint64_t>(i);
    const Trajectory traj = run(s, RandomField(s.seed), scales, eng);
    Slot& slot = slots[static_cast<std::size_t>(i)];
    const std::string prefix = replica_prefix(o, i);
    slot.summary = {{"replica", i}, {"seed", s.seed}, {"shapes", json::array()}};
    for (const auto& snap : traj.snapshots) {
      const ShapeEstimate est = shape_estimate(snap);
      const double speed = 1.0 + static_cast<double>(s.dimension) / static_cast<double>(snap.t);
      if (!(est.inner_radius <= est.outer_radius && est.outer_radius <= speed)) slot.bounds_ok = false;
      slot.summary["shapes"].push_back(io::shape_json(est));
      slot.files.emplace_back(prefix + "shape_n" + std::to_string(snap.t) + ".csv",
                              render_to_string([&](std::ostream& out) { io::write_shape_csv(out, est); }));
    }
    const LifetimeStats life = discovery_lifetimes(traj.final_state, s.horizon);
    slot.summary["lifetimes"] = io::lifetimes_json(life);
    slot.files.emplace_back(prefix + "lifetimes.csv",
                            render_to_string([&](std::ostream& out) { io::write_histogram_csv(out, life); }));
  });

  Report r;
  json report = {{"scales", scales}, {"replicas", json::array()}};
  bool ok = true;
  for (const auto& slot : slots) {
    for (const auto& [path, bytes] : slot.files) dir.write(path, bytes);
    report["replicas"].push_back(slot.summary);
    ok = ok && slot.bounds_ok;
  }
  report["radius_bounds_hold"] = ok;
  dir.write_json("shape.json", report);
  r.manifest["scales"] = scales;
  r.manifest["seeds"] = seed_list(base.seed, o.replicas);
  r.manifest["seed_base"] = base.seed;
  if (!ok) r.code = kInvariantViolation;
  return r;
}

// ---------------------------------------------------------------- compare-shapes

Report cmd_compare_shapes(const Options& o, OutputDir& dir) {
  require_replicas(o);
  if (o.scenarios.size() != 2) throw InputError("compare-shapes needs exactly two --scenario files");
  const Scenario a = load(o, 0);
  const Scenario b = load(o, 1);
  if (a.dimension != b.dimension) throw InputError("scenarios differ in dimension");
  const auto scales = resolve_checkpoints(o, a);
  if (scales.front() < 1) throw InputError("shape scales must be >= 1");
  const auto offset = static_cast<std::uint64_t>(o.replicas);
  const ShapeComparison cmp = compare_initial_sets(a, b, scales, o.replicas, a.seed, offset, o.workers);

  json report = io::comparison_json(cmp);
  report["pairs"] = o.replicas;
  dir.write_json("comparison.json", report);

  Report r;
  r.manifest["scales"] = scales;
  r.manifest["seed_base"] = a.seed;
  r.manifest["seeds_a"] = seed_list(a.seed, o.replicas);
  r.manifest["seeds_b"] = seed_list(a.seed + offset, o.replicas);
  return r;
}

// ---------------------------------------------------------------- coexist

Report cmd_coexist(const Options& o, OutputDir& dir) {
  require_replicas(o);
  if (o.k_threshold < 1) throw InputError("--k-threshold must be >= 1");
  if (o.scenarios.empty() || o.scenarios.size() > 2) throw InputError("coexist takes one or two --scenario files");

  Report r;
  json report = {{"k_threshold", o.k_threshold}, {"pairs", json::array()}};
  std::vector<CoexistenceStat> stats;
  for (std::size_t which = 0; which < o.scenarios.size(); ++which) {
    const Scenario s = load(o, which);
    if (s.mode != Mode::kTwoType) throw InputError("coexist needs two-type scenarios");
    stats.push_back(run_coexistence(s, o.replicas, s.seed, o.k_threshold, o.workers));
    json entry = io::coexistence_json(stats.back());
    entry["scenario"] = o.scenarios[which];
    report["pairs"].push_back(entry);

    std::ostringstream csv;
    csv << "replica,seed,count_type1,count_type2,coexists\n";
    for (const auto& out : stats.back().outcomes) {
      csv << out.counts.replica << ',' << out.counts.seed << ',' << out.counts.count_type1 << ','
          << out.counts.count_type2 << ',' << (out.coexists ? 1 : 0) << '\n';
    }
    dir.write("coexist_" + std::to_string(which) + ".csv", csv.str());
    r.manifest["seeds"].push_back(seed_list(s.seed, o.replicas));
  }
  if (stats.size() == 2) {
    // Paired reading: positive frequency for one pair should be matched by the other.
    const bool a_pos = stats[0].interval.lo > 0;
    const bool b_pos = stats[1].interval.lo > 0;
    report["paired"] = {{"lower_bound_positive", {a_pos, b_pos}},
                        {"intervals_overlap", stats[0].interval.overlaps(stats[1].interval)},
                        {"consistent", a_pos == b_pos || (stats[0].successes > 0 && stats[1].successes > 0)}};
  }
  dir.write_json("coexistence.json", report);
  return r;
}

// ---------------------------------------------------------------- couple

Report cmd_couple(const Options& o, OutputDir& dir) {
  require_replicas(o);
  Report r;
  json report = {{"mode", o.couple_mode}, {"runs", json::array()}};
  std::vector<CoupledRun> runs(static_cast<std::size_t>(o.replicas));

  if (o.couple_mode == "dominated") {
    const Scenario s = load(o, 0);
    if (s.mode != Mode::kTwoType) throw InputError("dominated coupling needs a two-type scenario");
    if (s.p1 > *s.p2) throw InputError("dominated coupling requires p1 <= p2");
    for_each_replica(o.replicas, o.workers, [&](std::int64_t i) {
      Scenario rs = s;
      rs.seed = s.seed + static_cast<std::uint64_t>(i);
      runs[static_cast<std::size_t>(i)] = run_dominated(rs, RandomField(rs.seed));
    });
    r.manifest["seeds"] = seed_list(s.seed, o.replicas);
  } else {
    if (o.scenarios.size() != 2) throw InputError("sigma coupling needs --scenario BASE --scenario ALT");
    const Scenario base = load(o, 0);
    const Scenario alt = load(o, 1);
    if (o.sigma_half < 0) throw InputError("--sigma-half must be >= 0");
    const SiteSet sigma = box(Site::origin(base.dimension), o.sigma_half);
    SigmaCouplingOptions opts;
    opts.trust_window = o.trust_window;
    opts.audit = o.audit;
    const auto offset = static_cast<std::uint64_t>(o.replicas);
    for_each_replica(o.replicas, o.workers, [&](std::int64_t i) {
      const std::uint64_t shared = base.seed + static_cast<std::uint64_t>(i);
      runs[static_cast<std::size_t>(i)] = run_sigma_coupled(base, alt, sigma, shared, shared + offset, opts);
    });
    r.manifest["shared_seeds"] = seed_list(base.seed, o.replicas);
    r.manifest["independent_seeds"] = seed_list(base.seed + offset, o.replicas);
    r.manifest["sigma_half"] = o.sigma_half;
  }

  std::int64_t violating = 0, unsettled = 0, trusted = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const CoupledRun& run = runs[i];
    json j = io::coupled_run_json(run);
    j["replica"] = i;
    report["runs"].push_back(j);
    const bool settled = run.conclusive && run.trusted;
    trusted += settled;
    if (settled && !run.violations.empty()) ++violating;
    if (!settled) ++unsettled;
  }
  report["trusted_runs"] = trusted;
  report["violating_runs"] = violating;
  report["unsettled_runs"] = unsettled;
  dir.write_json("couple.json", report);

  if (violating > 0) {
    r.code = kInvariantViolation;
  } else if (unsettled > 0) {
    r.code = kInconclusive;
  }
  return r;
}

// ---------------------------------------------------------------- render

Report cmd_render(const Options& o, OutputDir& dir) {
  Snapshot snap;
  Report r;
  if (!o.snapshot.empty()) {
    std::istringstream in(read_text(o.snapshot));
    try {
      snap = io::read_snapshot_csv(in);
    } catch (const std::runtime_error& e) {
      throw InputError(e.what());
    }
    r.manifest["snapshot"] = o.snapshot;
  } else {
    const Scenario s = load(o, 0);
    const std::int64_t cps[] = {s.horizon};
    const EngineOptions eng{.retirement_window = std::nullopt, .keep_discovery_log = false};
    snap = run(s, RandomField(s.seed), cps, eng).snapshots.at(0);
    r.manifest["seeds"] = {s.seed};
  }
  if (snap.dim != 2) throw InputError("render needs a two-dimensional snapshot");
  if (o.pixels < 1) throw InputError("--pixels must be >= 1");
  const std::string stem = "render_t" + std::to_string(snap.t);
  for (const auto& fmt : o.formats) {
    if (fmt == "pgm") {
      dir.write(stem + ".pgm", render_to_string([&](std::ostream& out) { io::write_pgm(out, snap, o.pixels); }));
    } else if (fmt == "svg") {
      dir.write(stem + ".svg", render_to_string([&](std::ostream& out) { io::write_svg(out, snap); }));
    } else {
      throw InputError("unknown render format '" + fmt + "'");
    }
  }
  return r;
}

void add_common(CLI::App* cmd, Options& o, bool replicas = true) {
  cmd->add_option("--scenario", o.scenarios, "Scenario file (repeat for commands taking two)")->type_size(1);
  cmd->add_option("--out", o.out, "Output directory")->required();
  if (replicas) cmd->add_option("--replicas", o.replicas, "Replica count; replica i uses seed base + i");
  if (replicas) cmd->add_option("--workers", o.workers, "Worker threads (does not change results)");
  o.seed_opt = cmd->add_option("--seed", o.seed, "Seed base (default: the scenario's seed)");
  o.horizon_opt = cmd->add_option("--horizon", o.horizon, "Override the scenario horizon");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frog-model simulator: runs, shape measurements and coupling checks"};
  app.require_subcommand(1);
  Options o;
  o.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  // Each subcommand gets its own option objects; CLI11 binds them to o.
  std::vector<std::pair<CLI::App*, Report (*)(const Options&, OutputDir&)>> commands;
  std::vector<CLI::Option*> seed_opts, horizon_opts;
  auto add = [&](const char* name, const char* help, Report (*fn)(const Options&, OutputDir&), bool replicas = true) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, o, replicas);
    seed_opts.push_back(o.seed_opt);
    horizon_opts.push_back(o.horizon_opt);
    commands.emplace_back(cmd, fn);
    return cmd;
  };

  auto* sim = add("simulate", "Run replicas and write snapshots at checkpoints", cmd_simulate);
  sim->add_option("--checkpoints", o.checkpoints, "Comma-separated checkpoint times")->delimiter(',');
  sim->add_flag("--check-invariants", o.check_invariants, "Check model invariants after every step (exit 4 on failure)");

  auto* shape = add("shape", "Shape estimates xi_n/n at the given scales", cmd_shape);
  shape->add_option("--checkpoints", o.checkpoints, "Comma-separated scales n (default: horizon)")->delimiter(',');

  auto* cmp = add("compare-shapes", "Median Hausdorff distance between two initial sets over seed pairs",
                  cmd_compare_shapes);
  cmp->add_option("--checkpoints", o.checkpoints, "Comma-separated scales n")->delimiter(',');

  auto* coex = add("coexist", "Coexistence proxy: both types reach K activations by the horizon", cmd_coexist);
  coex->add_option("--k-threshold", o.k_threshold, "Activation threshold K");

  auto* couple = add("couple", "Coupled runs with inclusion checks", cmd_couple);
  couple->add_option("--mode", o.couple_mode, "dominated | sigma")->check(CLI::IsMember({"dominated", "sigma"}));
  couple->add_option("--sigma-half", o.sigma_half, "Sigma is the box of this half-width around the origin");
  couple->add_option("--trust-window", o.trust_window, "Trust margin W (default horizon/4)");
  couple->add_flag("--audit", o.audit, "Audit every shared key touched by either run");

  auto* render = add("render", "Render a d = 2 snapshot as PGM/SVG", cmd_render, false);
  render->add_option("--snapshot", o.snapshot, "Snapshot CSV written by simulate");
  render->add_option("--format", o.formats, "pgm and/or svg")->delimiter(',');
  render->add_option("--pixels", o.pixels, "PGM side length");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidInput;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto [cmd, fn] = commands[i];
    if (!cmd->parsed()) continue;
    o.seed_opt = seed_opts[i];
    o.horizon_opt = horizon_opts[i];
    try {
      if (cmd->get_name() != "render" && o.scenarios.empty()) throw InputError("--scenario is required");
      if (cmd->get_name() == "render" && o.scenarios.empty() == o.snapshot.empty()) {
        throw InputError("render takes exactly one of --snapshot or --scenario");
      }
      if (o.workers < 1) throw InputError("--workers must be >= 1");
      OutputDir dir(o.out);
      Report rep = fn(o, dir);
      json manifest = std::move(rep.manifest);
      manifest["command"] = cmd->get_name();
      manifest["scenarios"] = o.scenarios;
      json digests = json::array();
      for (const auto& path : o.scenarios) digests.push_back("fnv1a64:" + io::hex64(io::content_digest(read_text(path))));
      manifest["scenario_digests"] = digests;
      manifest["out"] = o.out;
      manifest["replicas"] = cmd->get_name() == "render" ? 1 : o.replicas;
      manifest["exit_code"] = rep.code;
      manifest["files"] = dir.inventory();
      OutputDir(o.out).write_json("manifest.json", manifest);
      return rep.code;
    } catch (const IoError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    } catch (const std::ios_base::failure& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    } catch (const fs::filesystem_error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kIoError;
    } catch (const ScenarioError& e) {
      std::cerr << "invalid scenario: " << e.what() << '\n';
      return kInvalidInput;
    } catch (const InputError& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return kInvalidInput;
    } catch (const std::invalid_argument& e) {
      std::cerr << "invalid input: " << e.what() << '\n';
      return kInvalidInput;
    } catch (const std::exception& e) {
      std::cerr << "internal error: " << e.what() << '\n';
      return kInvariantViolation;
    }
  }
  return kInvalidInput;
}
