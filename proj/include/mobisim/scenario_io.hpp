#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "mobisim/integrate.hpp"
#include "mobisim/scenario.hpp"

namespace mobisim {

std::string_view version();

// ---- scenario config documents -------------------------------------------
//
// {
//   "name": "...", "description": "...",
//   "params": {"k1", "k2", "k3", "k4", "a_max"},
//   "initial": {"congestion", "adoption"},
//   "horizon": {"t0", "t_end", "output_points"},
//   "integrator": {"method", "step", "rtol", "atol", "max_steps"}
// }
//
// `name` and the four k's are required; everything else defaults to the
// preset values. Unknown keys are rejected at every level.

/// Throws ParseError (with line/column) on malformed JSON and ValidationError
/// on unknown keys, wrong types or broken invariants.
ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec scenario_from_json(const nlohmann::json& doc);

nlohmann::ordered_json scenario_to_json(const ScenarioSpec& spec);
/// Canonical form: every field present, fixed key order, two-space indent.
std::string serialize_scenario(const ScenarioSpec& spec);

ScenarioSpec load_scenario_file(const std::filesystem::path& path);

// ---- trajectories ----------------------------------------------------------

enum class TrajectoryFormat { Csv, Json };

/// Picks Json for a ".json" extension and Csv otherwise.
TrajectoryFormat format_for_path(const std::filesystem::path& path);

struct RunManifest {
    ScenarioSpec scenario;
    std::string version;
    std::string timestamp;     ///< ISO-8601 UTC
    std::string content_hash;  ///< "sha256:<hex>" of the trajectory CSV bytes
};

/// Current time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// SHA-256 of `bytes` as "sha256:<hex>".
std::string content_hash(std::string_view bytes);

/// Manifest for a trajectory produced by `spec`.
RunManifest make_manifest(const ScenarioSpec& spec, const Trajectory& traj);

/// Manifest reconstructed from trajectory metadata alone (no description;
/// horizon taken from the sample span).
RunManifest make_manifest(const Trajectory& traj);

nlohmann::ordered_json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);

/// `t,congestion,adoption` header then one row per sample, LF endings,
/// shortest round-trip decimals.
std::string trajectory_csv(const Trajectory& traj);
std::string trajectory_json(const Trajectory& traj, const RunManifest& manifest);

/// Writes to a stream; returns the number of bytes written. When `manifest`
/// is null the JSON manifest is derived from the trajectory.
std::size_t write_trajectory(const Trajectory& traj, TrajectoryFormat format, std::ostream& out,
                             const RunManifest* manifest = nullptr);
/// Atomic (temp file + rename). Throws IoError if the destination is unwritable.
std::size_t write_trajectory(const Trajectory& traj, TrajectoryFormat format, const std::filesystem::path& path,
                             const RunManifest* manifest = nullptr);

/// CSV: extra columns are ignored and reported through `warnings`.
/// Throws ParseError on non-numeric cells (with the row index) and
/// ValidationError when times are not strictly increasing.
Trajectory read_trajectory(std::istream& in, TrajectoryFormat format, std::vector<std::string>* warnings = nullptr);
Trajectory read_trajectory(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Writes `content` to a sibling temp file and renames it over `path`.
std::size_t write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

} // namespace mobisim
