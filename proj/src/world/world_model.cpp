#include "scp/world/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace scp::world {

// ---------------------------------------------------------------- voxels

VoxelOccupancy::VoxelOccupancy(const Eigen::Vector3d& min_corner,
                               const Eigen::Vector3d& max_corner,
                               double resolution, double inflate_radius)
    : min_corner_(min_corner),
      resolution_(resolution),
      inflate_radius_(inflate_radius) {
    if (resolution <= 0.0) {
        throw std::invalid_argument("voxel resolution must be positive");
    }
    for (int a = 0; a < 3; ++a) {
        dims_[a] = std::max(
            1, static_cast<int>(std::ceil((max_corner[a] - min_corner[a]) / resolution)));
    }
    grid_.assign(static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z(), 0);
}

Eigen::Vector3i VoxelOccupancy::cell_of(const Eigen::Vector3d& p) const {
    Eigen::Vector3i c;
    for (int a = 0; a < 3; ++a) {
        c[a] = static_cast<int>(std::floor((p[a] - min_corner_[a]) / resolution_));
    }
    return c;
}

Eigen::Vector3d VoxelOccupancy::center_of(const Eigen::Vector3i& cell) const {
    return min_corner_ + (cell.cast<double>() + Eigen::Vector3d::Constant(0.5).eval()) *
                             resolution_;
}

bool VoxelOccupancy::in_bounds(const Eigen::Vector3i& cell) const {
    return (cell.array() >= 0).all() && (cell.array() < dims_.array()).all();
}

bool VoxelOccupancy::occupied(const Eigen::Vector3i& cell) const {
    if (!in_bounds(cell)) {
        return true;  // conservative
    }
    return grid_[flat(cell)] != 0;
}

double VoxelOccupancy::cell_distance_sq(const Eigen::Vector3i& cell,
                                        const Eigen::Vector3d& p) const {
    double d_sq = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = min_corner_[a] + cell[a] * resolution_;
        const double hi = lo + resolution_;
        const double d = p[a] < lo ? lo - p[a] : (p[a] > hi ? p[a] - hi : 0.0);
        d_sq += d * d;
    }
    return d_sq;
}

void VoxelOccupancy::stamp(const Eigen::Vector3d& point) {
    const double r = inflate_radius_;
    const Eigen::Vector3i lo = cell_of(point - Eigen::Vector3d::Constant(r));
    const Eigen::Vector3i hi = cell_of(point + Eigen::Vector3d::Constant(r));
    const double r_sq = r * r;
    Eigen::Vector3i c;
    for (c.z() = lo.z(); c.z() <= hi.z(); ++c.z()) {
        for (c.y() = lo.y(); c.y() <= hi.y(); ++c.y()) {
            for (c.x() = lo.x(); c.x() <= hi.x(); ++c.x()) {
                if (in_bounds(c) && cell_distance_sq(c, point) <= r_sq) {
                    grid_[flat(c)] = 1;
                }
            }
        }
    }
}

// ----------------------------------------------------------- world model

WorldModel::WorldModel(double voxel_resolution) : resolution_(voxel_resolution) {
    if (voxel_resolution <= 0.0) {
        throw std::invalid_argument("voxel resolution must be positive");
    }
}

WorldModel WorldModel::from_points(const std::vector<Eigen::Vector3d>& points,
                                   double voxel_resolution) {
    WorldModel w(voxel_resolution);
    w.add_points(points);
    return w;
}

std::uint64_t WorldModel::voxel_key(const Eigen::Vector3d& p) const {
    // 21 bits per axis around a +-200 km origin offset; plenty at map scale.
    std::uint64_t key = 0;
    for (int a = 0; a < 3; ++a) {
        const auto q = static_cast<std::int64_t>(std::floor(p[a] / resolution_)) +
                       (1ll << 20);
        key = (key << 21) | static_cast<std::uint64_t>(q & ((1ll << 21) - 1));
    }
    return key;
}

void WorldModel::register_keys(std::size_t from_index) {
    for (std::size_t i = from_index; i < points_.size(); ++i) {
        seen_voxels_.insert(voxel_key(points_[i]));
    }
}

void WorldModel::add_points(const std::vector<Eigen::Vector3d>& points) {
    const std::size_t before = points_.size();
    points_.insert(points_.end(), points.begin(), points.end());
    register_keys(before);
    tree_.build(points_);
    if (occupancy_) {
        for (std::size_t i = before; i < points_.size(); ++i) {
            occupancy_->stamp(points_[i]);
        }
    }
}

std::size_t WorldModel::merge(const std::vector<Eigen::Vector3d>& points) {
    const std::size_t before = points_.size();
    for (const auto& p : points) {
        if (seen_voxels_.insert(voxel_key(p)).second) {
            points_.push_back(p);
            if (occupancy_) {
                occupancy_->stamp(p);
            }
        }
    }
    const std::size_t added = points_.size() - before;
    if (added > 0) {
        tree_.build(points_);
    }
    return added;
}

std::optional<NearestHit> WorldModel::nearest_obstacle(
    const Eigen::Vector3d& query) const {
    const auto hit = tree_.nearest(query);
    if (!hit) {
        return std::nullopt;
    }
    return NearestHit{tree_.point(hit->index), hit->distance};
}

std::vector<Eigen::Vector3d> WorldModel::in_range(const Eigen::Vector3d& pose,
                                                  double range) const {
    std::vector<int> idx;
    tree_.radius_search(pose, range, idx);
    std::sort(idx.begin(), idx.end());  // stable output order
    std::vector<Eigen::Vector3d> out;
    out.reserve(idx.size());
    for (int i : idx) {
        out.push_back(tree_.point(i));
    }
    return out;
}

void WorldModel::enable_occupancy(const Eigen::Vector3d& min_corner,
                                  const Eigen::Vector3d& max_corner,
                                  double inflate_radius) {
    occupancy_.emplace(min_corner, max_corner, resolution_, inflate_radius);
    for (const auto& p : points_) {
        occupancy_->stamp(p);
    }
}

const VoxelOccupancy& WorldModel::occupancy() const {
    if (!occupancy_) {
        throw std::logic_error("occupancy view not enabled on this world");
    }
    return *occupancy_;
}

bool voxel_occupied(const WorldModel& world, const Eigen::Vector3i& cell) {
    return world.occupancy().occupied(cell);
}

// ----------------------------------------------------------------- forest

Forest generate_forest(const ForestSpec& spec) {
    if (!spec.valid()) {
        throw std::invalid_argument("invalid forest spec");
    }
    std::mt19937_64 rng(spec.seed);

    const double half_l = spec.length_l / 2.0;
    const double half_w = spec.width_w / 2.0;
    const Eigen::Vector2d start_xy(-half_l, 0.0);
    const Eigen::Vector2d goal_xy(half_l, 0.0);
    const double clearance = 1.5 + spec.tree_radius;

    std::poisson_distribution<int> tree_count_dist(spec.density_delta *
                                                   spec.length_l * spec.width_w);
    std::uniform_real_distribution<double> ux(-half_l, half_l);
    std::uniform_real_distribution<double> uy(-half_w, half_w);
    std::uniform_real_distribution<double> uangle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> uz(0.0, spec.tree_height);

    const int count = spec.density_delta > 0.0 ? tree_count_dist(rng) : 0;

    Forest forest{WorldModel(0.2), {}};
    std::vector<Eigen::Vector3d> cloud;
    const double lateral_area =
        2.0 * M_PI * spec.tree_radius * spec.tree_height;
    const int points_per_tree = static_cast<int>(
        std::ceil(lateral_area * spec.points_per_tree_surface));

    for (int t = 0; t < count; ++t) {
        const Eigen::Vector2d c(ux(rng), uy(rng));
        if ((c - start_xy).norm() < clearance || (c - goal_xy).norm() < clearance) {
            continue;  // keep the start and goal discs clear
        }
        forest.tree_centers.emplace_back(c.x(), c.y(), 0.0);
        for (int i = 0; i < points_per_tree; ++i) {
            const double a = uangle(rng);
            cloud.emplace_back(c.x() + spec.tree_radius * std::cos(a),
                               c.y() + spec.tree_radius * std::sin(a), uz(rng));
        }
    }
    forest.world.add_points(cloud);
    return forest;
}

std::vector<Eigen::Vector3d> sense(const WorldModel& truth,
                                   const Eigen::Vector3d& pose,
                                   const SensorSpec& spec) {
    return truth.in_range(pose, spec.range);
}

}  // namespace scp::world
