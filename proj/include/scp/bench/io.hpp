#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "scp/bench/bench.hpp"

// File formats used by the CLI tools. These are pinned interfaces: plots,
// regression fixtures and external consumers parse them, so changes here are
// breaking changes.
namespace scp::bench::io {

// Bare `x,y,z` lines, meters, no header. Used for point clouds and guide paths.
void write_xyz_csv(const std::string& path,
                   const std::vector<Eigen::Vector3d>& points);
std::vector<Eigen::Vector3d> read_xyz_csv(const std::string& path);

// Standalone forest description: {length, width, density, tree_radius,
// tree_height, seed}. Surface sampling density rides along as an optional key.
nlohmann::json forest_spec_json(const world::ForestSpec& spec);
world::ForestSpec forest_spec_from_json(const nlohmann::json& j);

// JSON array of {center:[x,y,z], radius, nearest:[x,y,z]}.
nlohmann::json corridor_json(const corridor::Corridor& corridor);
corridor::Corridor corridor_from_json(const nlohmann::json& j);

// {order, pieces: [{duration, coeffs}]} with coeffs a flat 2s*3 row-major
// array (one row per monomial power, columns x,y,z).
nlohmann::json trajectory_json(const traj::Trajectory& traj);
traj::Trajectory trajectory_from_json(const nlohmann::json& j);

// Flight state samples: `t,x,y,z,vx,vy,vz,ax,ay,az`, header included.
struct SampleSeries {
    std::vector<double> t;
    std::vector<Eigen::Vector3d> p, v, a;
};

SampleSeries sample_series(const TrialResult& result);

void write_sampled_csv(const std::string& path, const SampleSeries& series);
// Same format, sampled from a trajectory at fixed dt.
void write_sampled_csv(const std::string& path, const traj::Trajectory& traj,
                       double dt);
SampleSeries read_sampled_csv(const std::string& path);

// One row per trial; header
// seed,density,v_max,success,failure_reason,flight_time,path_length,
// max_speed,mapping_mu,mapping_sigma,planning_mu,planning_sigma.
void write_results_csv(const std::string& path,
                       const std::vector<TrialResult>& results);
// Reads back the scalar columns (events/segments/samples stay empty).
std::vector<TrialResult> read_results_csv(const std::string& path);

// One JSON object per line: {t, trigger, reused_spheres, new_spheres,
// opt_iterations, opt_wall_ms, corridor_wall_ms}.
void write_events_jsonl(const std::string& path,
                        const std::vector<replan::ReplanEvent>& events);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Plot-data bundle -------------------------------------------------------

// `t,speed,accel` norms over recorded flight samples.
void write_speed_profile_csv(const std::string& path,
                             const SampleSeries& series);
// Same series for an offline trajectory sampled at dt.
void write_speed_profile_csv(const std::string& path,
                             const traj::Trajectory& traj, double dt);

// `index,radius,volume,overlap_with_next` per sphere (last overlap 0).
void write_corridor_geometry_csv(const std::string& path,
                                 const corridor::Corridor& corridor);

// `t,x,y,z,speed` over recorded flight samples, for speed-colored paths.
void write_path_speed_csv(const std::string& path, const SampleSeries& series);

// Success-rate matrix, densities down rows and speeds across columns.
// Cells are grouped from the rows' (density, v_max) pairs.
void write_success_matrix_csv(const std::string& path,
                              const std::vector<TrialResult>& results);

// Table-style per-cell report: trials, successes, pooled runtime stats.
void write_cells_csv(const std::string& path, const SweepResult& sweep);

}  // namespace scp::bench::io
