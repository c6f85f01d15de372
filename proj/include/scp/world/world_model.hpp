#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "scp/world/kdtree.hpp"

namespace scp::world {

struct SensorSpec {
    double range = 8.0;     // meters
    double rate_hz = 30.0;  // scans per second

    bool valid() const { return range > 0.0 && rate_hz > 0.0; }
};

struct ForestSpec {
    double length_l = 60.0;                 // meters, along x
    double width_w = 30.0;                  // meters, along y
    double density_delta = 1.0 / 25.0;      // trees per square meter
    double tree_radius = 0.3;               // meters
    double tree_height = 5.0;               // meters
    double points_per_tree_surface = 100.0; // sampled surface points per m^2
    std::uint64_t seed = 0;

    bool valid() const {
        return length_l > 0.0 && width_w > 0.0 && density_delta >= 0.0 &&
               tree_radius > 0.0 && tree_height > 0.0 &&
               points_per_tree_surface > 0.0;
    }
};

// Binary occupancy view over a fixed axis-aligned volume. A cell is occupied
// iff some obstacle point lies within `inflate_radius` of the cell box.
// Out-of-bounds cells report occupied.
class VoxelOccupancy {
public:
    VoxelOccupancy() = default;
    VoxelOccupancy(const Eigen::Vector3d& min_corner,
                   const Eigen::Vector3d& max_corner, double resolution,
                   double inflate_radius);

    void stamp(const Eigen::Vector3d& point);

    bool in_bounds(const Eigen::Vector3i& cell) const;
    bool occupied(const Eigen::Vector3i& cell) const;

    Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const;
    Eigen::Vector3d center_of(const Eigen::Vector3i& cell) const;

    const Eigen::Vector3i& dims() const { return dims_; }
    double resolution() const { return resolution_; }
    double inflate_radius() const { return inflate_radius_; }
    const Eigen::Vector3d& min_corner() const { return min_corner_; }

private:
    std::size_t flat(const Eigen::Vector3i& c) const {
        return (static_cast<std::size_t>(c.z()) * dims_.y() + c.y()) * dims_.x() +
               c.x();
    }
    // Squared distance from p to the axis-aligned box of `cell`.
    double cell_distance_sq(const Eigen::Vector3i& cell,
                            const Eigen::Vector3d& p) const;

    Eigen::Vector3d min_corner_ = Eigen::Vector3d::Zero();
    Eigen::Vector3i dims_ = Eigen::Vector3i::Zero();
    double resolution_ = 0.2;
    double inflate_radius_ = 0.0;
    std::vector<std::uint8_t> grid_;
};

struct NearestHit {
    Eigen::Vector3d point;
    double distance;
};

// Obstacle point cloud with an exact nearest-neighbor index and an optional
// voxel occupancy view. Reads may run concurrently; merge() requires
// exclusive access (snapshot isolation is the caller's contract).
class WorldModel {
public:
    explicit WorldModel(double voxel_resolution = 0.2);

    static WorldModel from_points(const std::vector<Eigen::Vector3d>& points,
                                  double voxel_resolution = 0.2);

    // Appends points verbatim (no deduplication) and rebuilds the index.
    void add_points(const std::vector<Eigen::Vector3d>& points);

    // Deduplicates at voxel_resolution, rebuilds the index when anything was
    // added, and stamps the occupancy view. Returns the number of new points.
    std::size_t merge(const std::vector<Eigen::Vector3d>& points);

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    const std::vector<Eigen::Vector3d>& points() const { return points_; }
    double voxel_resolution() const { return resolution_; }

    std::optional<NearestHit> nearest_obstacle(const Eigen::Vector3d& query) const;

    // All points with ||p - pose|| <= range.
    std::vector<Eigen::Vector3d> in_range(const Eigen::Vector3d& pose,
                                          double range) const;

    void enable_occupancy(const Eigen::Vector3d& min_corner,
                          const Eigen::Vector3d& max_corner,
                          double inflate_radius);
    bool has_occupancy() const { return occupancy_.has_value(); }
    const VoxelOccupancy& occupancy() const;

private:
    std::uint64_t voxel_key(const Eigen::Vector3d& p) const;
    void register_keys(std::size_t from_index);

    double resolution_;
    std::vector<Eigen::Vector3d> points_;
    KdTree3 tree_;
    std::unordered_set<std::uint64_t> seen_voxels_;
    std::optional<VoxelOccupancy> occupancy_;
};

// Occupancy query per the planning contract: out-of-bounds cells are
// occupied. Requires an enabled occupancy view.
bool voxel_occupied(const WorldModel& world, const Eigen::Vector3i& cell);

struct Forest {
    WorldModel world;                           // ground truth cloud
    std::vector<Eigen::Vector3d> tree_centers;  // cylinder axes, z = 0
};

// Homogeneous Poisson forest over the rectangle [-l/2,l/2] x [-w/2,w/2].
// Trees are vertical cylinders sampled as lateral-surface point clouds.
// A clearance disc of radius 1.5 m is kept around (-l/2, 0) and (l/2, 0).
Forest generate_forest(const ForestSpec& spec);

// Omniscient-within-range sensor: exactly the truth points within range.
std::vector<Eigen::Vector3d> sense(const WorldModel& truth,
                                   const Eigen::Vector3d& pose,
                                   const SensorSpec& spec);

}  // namespace scp::world
