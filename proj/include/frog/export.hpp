#ifndef FROG_EXPORT_HPP
#define FROG_EXPORT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "frog/couplings.hpp"
#include "frog/engine.hpp"
#include "frog/measure.hpp"

namespace frog::io {

/// Snapshot CSV: header `t,x0[,x1[,x2]],discovered_at,site_type`, one row per
/// discovered site in site order. site_type is 1 or 2 in two-type runs and
/// empty otherwise.
void write_snapshot_csv(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot_csv(std::istream& in);

nlohmann::json snapshot_summary(const Snapshot& snap);
nlohmann::json trajectory_json(const Scenario& s, const Trajectory& traj);

/// Scaled shape points, one row per discovered site: `y0[,y1[,y2]]` = x / n.
void write_shape_csv(std::ostream& out, const ShapeEstimate& est);
nlohmann::json shape_json(const ShapeEstimate& est);
nlohmann::json comparison_json(const ShapeComparison& cmp);

void write_histogram_csv(std::ostream& out, const LifetimeStats& st);
nlohmann::json lifetimes_json(const LifetimeStats& st);

nlohmann::json coexistence_json(const CoexistenceStat& st);
nlohmann::json coupled_run_json(const CoupledRun& run);

/// d = 2 rendering of the scaled discovered set over [-1.1, 1.1]^2, one
/// continuum unit cell per site. Binary PGM (P5): background 255, type-one
/// or untyped cells 0, type-two cells 128. Throws std::invalid_argument if d != 2.
void write_pgm(std::ostream& out, const Snapshot& snap, int pixels = 512);
void write_svg(std::ostream& out, const Snapshot& snap);

/// FNV-1a 64 over raw bytes, used for manifest digests.
std::uint64_t content_digest(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace frog::io

#endif  // FROG_EXPORT_HPP
