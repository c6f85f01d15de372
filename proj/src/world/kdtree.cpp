#include "scp/world/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace scp::world {

void KdTree3::clear() {
    points_.clear();
    indices_.clear();
    nodes_.clear();
    root_ = -1;
}

void KdTree3::build(const std::vector<Eigen::Vector3d>& points) {
    clear();
    points_ = points;
    indices_.resize(points_.size());
    std::iota(indices_.begin(), indices_.end(), 0);
    nodes_.reserve(points_.empty() ? 0 : 2 * points_.size() / kLeafSize + 2);
    if (!points_.empty()) {
        root_ = build_recursive(0, static_cast<int>(points_.size()));
    }
}

int KdTree3::build_recursive(int begin, int end) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    if (end - begin <= kLeafSize) {
        nodes_[node_id].begin = begin;
        nodes_[node_id].end = end;
        return node_id;
    }

    // Split along the axis with the widest extent.
    Eigen::Vector3d lo = points_[indices_[begin]];
    Eigen::Vector3d hi = lo;
    for (int i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[indices_[i]]);
        hi = hi.cwiseMax(points_[indices_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const int mid = begin + (end - begin) / 2;
    std::nth_element(indices_.begin() + begin, indices_.begin() + mid,
                     indices_.begin() + end, [&](int a, int b) {
                         return points_[a][axis] < points_[b][axis];
                     });

    const double split = points_[indices_[mid]][axis];
    const int left = build_recursive(begin, mid);
    const int right = build_recursive(mid, end);
    nodes_[node_id].axis = axis;
    nodes_[node_id].split = split;
    nodes_[node_id].left = left;
    nodes_[node_id].right = right;
    return node_id;
}

std::optional<KdTree3::Hit> KdTree3::nearest(const Eigen::Vector3d& query) const {
    if (empty()) {
        return std::nullopt;
    }
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    nearest_recursive(root_, query, best, best_sq);
    return Hit{best, std::sqrt(best_sq)};
}

void KdTree3::nearest_recursive(int node_id, const Eigen::Vector3d& q, int& best,
                                double& best_sq) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = indices_[i];
            const double d_sq = (points_[idx] - q).squaredNorm();
            if (d_sq < best_sq) {
                best_sq = d_sq;
                best = idx;
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    nearest_recursive(near, q, best, best_sq);
    if (delta * delta < best_sq) {
        nearest_recursive(far, q, best, best_sq);
    }
}

void KdTree3::radius_search(const Eigen::Vector3d& query, double radius,
                            std::vector<int>& out) const {
    out.clear();
    if (empty() || radius < 0.0) {
        return;
    }
    radius_recursive(root_, query, radius * radius, out);
}

void KdTree3::radius_recursive(int node_id, const Eigen::Vector3d& q,
                               double radius_sq, std::vector<int>& out) const {
    const Node& node = nodes_[node_id];
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            const int idx = indices_[i];
            if ((points_[idx] - q).squaredNorm() <= radius_sq) {
                out.push_back(idx);
            }
        }
        return;
    }
    const double delta = q[node.axis] - node.split;
    const int near = delta < 0.0 ? node.left : node.right;
    const int far = delta < 0.0 ? node.right : node.left;
    radius_recursive(near, q, radius_sq, out);
    if (delta * delta <= radius_sq) {
        radius_recursive(far, q, radius_sq, out);
    }
}

}  // namespace scp::world
