#include "frog/export.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <absl/container/flat_hash_map.h>

namespace frog::io {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

json site_json(const Site& x) {
  json a = json::array();
  for (int i = 0; i < x.dim; ++i) a.push_back(x[i]);
  return a;
}

}  // namespace

void write_snapshot_csv(std::ostream& out, const Snapshot& snap) {
  out << "t";
  for (int i = 0; i < snap.dim; ++i) out << ",x" << i;
  out << ",discovered_at,site_type\n";
  for (const auto& r : snap.discovered) {
    out << snap.t;
    for (int i = 0; i < snap.dim; ++i) out << ',' << r.site[i];
    out << ',' << r.discovered_at << ',';
    if (r.site_type) out << static_cast<int>(*r.site_type);
    out << '\n';
  }
}

Snapshot read_snapshot_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("snapshot csv: missing header");
  const auto cols = std::count(line.begin(), line.end(), ',') + 1;
  const int dim = static_cast<int>(cols) - 3;
  if (dim < 1 || dim > kMaxDim || line.rfind("t,", 0) != 0) throw std::runtime_error("snapshot csv: bad header");
  Snapshot snap;
  snap.dim = dim;
  bool typed = false;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (static_cast<int>(f.size()) != dim + 3) {
      throw std::runtime_error("snapshot csv: wrong column count on row " + std::to_string(row));
    }
    auto num = [&](const std::string& s) {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size()) {
        throw std::runtime_error("snapshot csv: bad number on row " + std::to_string(row));
      }
      return v;
    };
    snap.t = num(f[0]);
    SiteRecord r;
    r.site = Site::origin(dim);
    for (int i = 0; i < dim; ++i) r.site[i] = static_cast<std::int32_t>(num(f[static_cast<std::size_t>(i + 1)]));
    r.discovered_at = num(f[static_cast<std::size_t>(dim + 1)]);
    const auto& tcell = f[static_cast<std::size_t>(dim + 2)];
    if (!tcell.empty()) {
      const auto t = num(tcell);
      if (t != 1 && t != 2) throw std::runtime_error("snapshot csv: bad site_type on row " + std::to_string(row));
      r.site_type = static_cast<ParticleType>(t);
      typed = true;
    }
    snap.discovered.push_back(r);
  }
  std::sort(snap.discovered.begin(), snap.discovered.end(),
            [](const SiteRecord& a, const SiteRecord& b) { return a.site < b.site; });
  snap.mode = typed ? Mode::kTwoType : Mode::kOneType;
  return snap;
}

json snapshot_summary(const Snapshot& snap) {
  json j;
  j["t"] = snap.t;
  j["discovered"] = snap.discovered.size();
  j["active_particles"] = snap.active_particles;
  j["digest"] = hex64(snap.digest);
  if (snap.mode == Mode::kTwoType) {
    j["activations_type1"] = snap.totals[0];
    j["activations_type2"] = snap.totals[1];
  } else {
    j["activations"] = snap.totals[0];
  }
  return j;
}

json trajectory_json(const Scenario& s, const Trajectory& traj) {
  json j;
  j["mode"] = std::string(to_string(s.mode));
  j["dimension"] = s.dimension;
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  j["checkpoints"] = json::array();
  for (const auto& snap : traj.snapshots) j["checkpoints"].push_back(snapshot_summary(snap));
  j["final_digest"] = hex64(state_digest(traj.final_state));
  return j;
}

void write_shape_csv(std::ostream& out, const ShapeEstimate& est) {
  const int d = est.scaled.dim();
  for (int i = 0; i < d; ++i) out << (i ? ",y" : "y") << i;
  out << '\n';
  for (const auto& p : est.scaled.points()) {
    for (int i = 0; i < d; ++i) out << (i ? "," : "") << format_double(p[static_cast<std::size_t>(i)]);
    out << '\n';
  }
}

json shape_json(const ShapeEstimate& est) {
  return json{{"scale", est.scaled.scale()},
              {"sites", est.scaled.size()},
              {"inner_radius", est.inner_radius},
              {"outer_radius", est.outer_radius},
              {"sym_defect", est.sym_defect}};
}

json comparison_json(const ShapeComparison& cmp) {
  return json{{"scales", cmp.scales},
              {"medians", cmp.medians},
              {"distances", cmp.distances},
              {"non_increasing", cmp.non_increasing}};
}

void write_histogram_csv(std::ostream& out, const LifetimeStats& st) {
  out << "lifetime,particles\n";
  for (const auto& [life, count] : st.histogram) out << life << ',' << count << '\n';
}

json lifetimes_json(const LifetimeStats& st) {
  return json{{"particles", st.particles},
              {"staleness", st.staleness},
              {"staleness_eligible", st.eligible},
              {"raw_staleness", st.raw_staleness}};
}

json coexistence_json(const CoexistenceStat& st) {
  json j;
  j["k_threshold"] = st.k_threshold;
  j["horizon"] = st.horizon;
  j["replicas"] = st.outcomes.size();
  j["successes"] = st.successes;
  j["frequency"] = st.frequency;
  j["wilson95"] = {st.interval.lo, st.interval.hi};
  j["outcomes"] = json::array();
  for (const auto& o : st.outcomes) {
    j["outcomes"].push_back({{"replica", o.counts.replica},
                             {"seed", o.counts.seed},
                             {"count_type1", o.counts.count_type1},
                             {"count_type2", o.counts.count_type2},
                             {"coexists", o.coexists}});
  }
  return j;
}

json coupled_run_json(const CoupledRun& run) {
  json j;
  j["sharing"] = run.sharing;
  j["N_sigma"] = run.n_sigma ? json(*run.n_sigma) : json(nullptr);
  j["N"] = run.n_shift ? json(*run.n_shift) : json(nullptr);
  j["trusted"] = run.trusted;
  j["violations"] = json::array();
  for (const auto& v : run.violations) j["violations"].push_back({v.t, site_json(v.site)});
  j["steps_checked"] = run.steps_checked;
  j["conclusive"] = run.conclusive;
  if (!run.conclusive) j["inconclusive_reason"] = run.inconclusive_reason;
  j["min_shift"] = run.min_shift ? json(*run.min_shift) : json(nullptr);
  j["guard_fraction"] = run.guard_fraction;
  j["sequences_equal"] = run.sequences_equal;
  if (run.audited_keys > 0) {
    j["audited_keys"] = run.audited_keys;
    j["audit_mismatches"] = run.audit_mismatches;
  }
  return j;
}

namespace {

void require_planar(const Snapshot& snap) {
  if (snap.dim != 2) throw std::invalid_argument("render: only d = 2 snapshots can be rendered");
}

}  // namespace

void write_pgm(std::ostream& out, const Snapshot& snap, int pixels) {
  require_planar(snap);
  if (pixels < 1) throw std::invalid_argument("render: pixel count must be positive");
  const double n = static_cast<double>(std::max<std::int64_t>(snap.t, 1));
  absl::flat_hash_map<Site, std::uint8_t, SiteHash> shade;
  for (const auto& r : snap.discovered) {
    shade[r.site] = r.site_type == ParticleType::kTwo ? 128 : 0;
  }
  out << "P5\n" << pixels << ' ' << pixels << "\n255\n";
  std::string row(static_cast<std::size_t>(pixels), '\xff');
  const double step = 2.2 / pixels;
  for (int r = 0; r < pixels; ++r) {
    const double v = 1.1 - (r + 0.5) * step;
    const auto y = static_cast<std::int32_t>(std::ceil(v * n - 0.5));
    for (int c = 0; c < pixels; ++c) {
      const double u = -1.1 + (c + 0.5) * step;
      const auto x = static_cast<std::int32_t>(std::ceil(u * n - 0.5));
      auto it = shade.find(Site{x, y});
      row[static_cast<std::size_t>(c)] = static_cast<char>(it == shade.end() ? 255 : it->second);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void write_svg(std::ostream& out, const Snapshot& snap) {
  require_planar(snap);
  const double n = static_cast<double>(std::max<std::int64_t>(snap.t, 1));
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.1 -1.1 2.2 2.2\" width=\"512\" height=\"512\">\n";
  out << "<rect x=\"-1.1\" y=\"-1.1\" width=\"2.2\" height=\"2.2\" fill=\"white\"/>\n";
  out << "<g transform=\"scale(1,-1)\" shape-rendering=\"crispEdges\">\n";
  // Sites are sorted by (x, y); emit column runs of equal type as one rect.
  const auto& recs = snap.discovered;
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i + 1;
    while (j < recs.size() && recs[j].site[0] == recs[i].site[0] &&
           recs[j].site[1] == recs[j - 1].site[1] + 1 && recs[j].site_type == recs[i].site_type) {
      ++j;
    }
    const char* fill = recs[i].site_type == ParticleType::kTwo ? "#808080" : "black";
    out << "<rect x=\"" << num((recs[i].site[0] - 0.5) / n) << "\" y=\"" << num((recs[i].site[1] - 0.5) / n)
        << "\" width=\"" << num(1 / n) << "\" height=\"" << num(static_cast<double>(j - i) / n) << "\" fill=\""
        << fill << "\"/>\n";
    i = j;
  }
  out << "</g>\n</svg>\n";
}

std::uint64_t content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace frog::io
