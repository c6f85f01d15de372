#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace scp::world {

// Rebuildable 3-d k-d tree with exact nearest-neighbor and radius queries.
// Queries are const and safe to run concurrently; build() invalidates them.
class KdTree3 {
public:
    struct Hit {
        int index = -1;
        double distance = 0.0;
    };

    KdTree3() = default;

    void build(const std::vector<Eigen::Vector3d>& points);
    void clear();

    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }
    const Eigen::Vector3d& point(int index) const { return points_[index]; }

    std::optional<Hit> nearest(const Eigen::Vector3d& query) const;

    // Indices of all points with ||p - query|| <= radius (unordered).
    void radius_search(const Eigen::Vector3d& query, double radius,
                       std::vector<int>& out) const;

private:
    struct Node {
        int axis = -1;        // -1 marks a leaf
        double split = 0.0;   // splitting coordinate along axis
        int left = -1;
        int right = -1;
        int begin = 0;        // leaf payload range in indices_
        int end = 0;
    };

    static constexpr int kLeafSize = 8;

    int build_recursive(int begin, int end);
    void nearest_recursive(int node, const Eigen::Vector3d& q, int& best,
                           double& best_sq) const;
    void radius_recursive(int node, const Eigen::Vector3d& q, double radius_sq,
                          std::vector<int>& out) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<int> indices_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace scp::world
