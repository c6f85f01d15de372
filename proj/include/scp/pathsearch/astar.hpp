#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "scp/corridor/sphere.hpp"
#include "scp/world/world_model.hpp"

namespace scp::path {

// Global guide path: ordered cell centers, 26-connected and free in the
// inflated occupancy view.
struct GuidePath {
    std::vector<Eigen::Vector3d> waypoints;

    bool empty() const { return waypoints.empty(); }
    double arc_length() const;
};

enum class AstarStatus { ok, start_occupied, goal_occupied, no_path };

struct AstarResult {
    AstarStatus status = AstarStatus::no_path;
    GuidePath path;
    double cost = 0.0;        // summed Euclidean edge costs, meters
    std::size_t expanded = 0;
};

// Minimal-cost 26-connected grid path on the world's occupancy view,
// Euclidean edge costs and Euclidean heuristic. The first/last waypoints
// are the start/goal cell centers.
AstarResult astar(const world::WorldModel& world, const Eigen::Vector3d& start,
                  const Eigen::Vector3d& goal,
                  std::size_t max_expansions = 4'000'000);

// First path waypoint (in path order) strictly outside the sphere; the last
// waypoint when the sphere contains the whole path.
Eigen::Vector3d forward_point(const GuidePath& path,
                              const corridor::Sphere& sphere);

// Point on the path at the given arc length, measured from `from` through
// the waypoints in order; clamps to the final waypoint.
Eigen::Vector3d point_at_arc_length(const GuidePath& path,
                                    const Eigen::Vector3d& from,
                                    double arc_length);

}  // namespace scp::path
