#pragma once

#include <Eigen/Core>
#include <vector>

namespace scp::corridor {

// One corridor element: a free-space ball whose radius is the distance to
// the nearest obstacle minus the drone radius (capped in open space).
struct Sphere {
    Eigen::Vector3d center = Eigen::Vector3d::Zero();
    Eigen::Vector3d nearest_obstacle = Eigen::Vector3d::Zero();
    double radius = 0.0;

    bool contains(const Eigen::Vector3d& p) const {
        return (p - center).norm() <= radius;
    }
    double volume() const {
        return 4.0 / 3.0 * M_PI * radius * radius * radius;
    }
};

// Ordered overlapping spheres plus reuse bookkeeping for receding-horizon
// replanning (reused_prefix_len == 0 for a fresh plan).
struct Corridor {
    std::vector<Sphere> spheres;
    int reused_prefix_len = 0;

    std::size_t size() const { return spheres.size(); }
    bool empty() const { return spheres.empty(); }
    const Sphere& operator[](std::size_t i) const { return spheres[i]; }
    Sphere& operator[](std::size_t i) { return spheres[i]; }

    // Invariant check: every consecutive pair intersects with positive volume.
    bool pairwise_overlap_ok() const {
        for (std::size_t i = 0; i + 1 < spheres.size(); ++i) {
            const double d = (spheres[i].center - spheres[i + 1].center).norm();
            if (d >= spheres[i].radius + spheres[i + 1].radius) {
                return false;
            }
        }
        return true;
    }
};

}  // namespace scp::corridor
