#include "scp/pathsearch/astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace scp::path {

double GuidePath::arc_length() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        s += (waypoints[i + 1] - waypoints[i]).norm();
    }
    return s;
}

namespace {

struct OpenEntry {
    double f;
    double h;  // tie-break: prefer smaller h (larger g) on equal f
    int cell;
};

struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        return a.h > b.h;
    }
};

}  // namespace

AstarResult astar(const world::WorldModel& world, const Eigen::Vector3d& start,
                  const Eigen::Vector3d& goal, std::size_t max_expansions) {
    const auto& occ = world.occupancy();
    const Eigen::Vector3i dims = occ.dims();
    const Eigen::Vector3i start_cell = occ.cell_of(start);
    const Eigen::Vector3i goal_cell = occ.cell_of(goal);

    AstarResult result;
    if (occ.occupied(start_cell)) {
        result.status = AstarStatus::start_occupied;
        return result;
    }
    if (occ.occupied(goal_cell)) {
        result.status = AstarStatus::goal_occupied;
        return result;
    }

    const int nx = dims.x(), ny = dims.y(), nz = dims.z();
    const std::size_t n_cells = static_cast<std::size_t>(nx) * ny * nz;
    auto flat = [&](const Eigen::Vector3i& c) {
        return (static_cast<std::size_t>(c.z()) * ny + c.y()) * nx + c.x();
    };
    auto unflat = [&](std::size_t id) {
        const int x = static_cast<int>(id % nx);
        const int y = static_cast<int>((id / nx) % ny);
        const int z = static_cast<int>(id / (static_cast<std::size_t>(nx) * ny));
        return Eigen::Vector3i(x, y, z);
    };

    // 26-neighborhood offsets with their metric step lengths.
    std::vector<Eigen::Vector3i> offsets;
    std::vector<double> step_cost;
    const double res = occ.resolution();
    for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                offsets.emplace_back(dx, dy, dz);
                step_cost.push_back(res * std::sqrt(double(dx * dx + dy * dy + dz * dz)));
            }
        }
    }

    const Eigen::Vector3d goal_center = occ.center_of(goal_cell);
    auto heuristic = [&](const Eigen::Vector3i& c) {
        return (occ.center_of(c) - goal_center).norm();
    };

    std::vector<double> g(n_cells, std::numeric_limits<double>::infinity());
    std::vector<int> parent(n_cells, -1);
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

    const int start_id = static_cast<int>(flat(start_cell));
    const int goal_id = static_cast<int>(flat(goal_cell));
    g[start_id] = 0.0;
    open.push({heuristic(start_cell), heuristic(start_cell), start_id});

    bool found = false;
    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const int cur = top.cell;
        const Eigen::Vector3i cur_cell = unflat(cur);
        if (top.f > g[cur] + heuristic(cur_cell) + 1e-12) {
            continue;  // stale entry
        }
        if (cur == goal_id) {
            found = true;
            break;
        }
        if (++result.expanded > max_expansions) {
            break;
        }
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            const Eigen::Vector3i nb = cur_cell + offsets[k];
            if (!occ.in_bounds(nb) || occ.occupied(nb)) continue;
            const std::size_t nb_id = flat(nb);
            const double cand = g[cur] + step_cost[k];
            if (cand < g[nb_id]) {
                g[nb_id] = cand;
                parent[nb_id] = cur;
                const double h = heuristic(nb);
                open.push({cand + h, h, static_cast<int>(nb_id)});
            }
        }
    }

    if (!found) {
        result.status = AstarStatus::no_path;
        return result;
    }

    std::vector<Eigen::Vector3d> rev;
    for (int id = goal_id; id != -1; id = parent[id]) {
        rev.push_back(occ.center_of(unflat(id)));
        if (id == start_id) break;
    }
    std::reverse(rev.begin(), rev.end());
    result.path.waypoints = std::move(rev);
    result.cost = g[goal_id];
    result.status = AstarStatus::ok;
    return result;
}

Eigen::Vector3d forward_point(const GuidePath& path,
                              const corridor::Sphere& sphere) {
    for (const auto& wp : path.waypoints) {
        if ((wp - sphere.center).norm() > sphere.radius) {
            return wp;
        }
    }
    return path.waypoints.back();
}

Eigen::Vector3d point_at_arc_length(const GuidePath& path,
                                    const Eigen::Vector3d& from,
                                    double arc_length) {
    double acc = 0.0;
    Eigen::Vector3d prev = from;
    for (const auto& wp : path.waypoints) {
        const double seg = (wp - prev).norm();
        if (acc + seg >= arc_length && seg > 0.0) {
            const double t = (arc_length - acc) / seg;
            return prev + t * (wp - prev);
        }
        acc += seg;
        prev = wp;
    }
    return path.waypoints.back();
}

}  // namespace scp::path
