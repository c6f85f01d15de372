#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <vector>

#include "scp/pathsearch/astar.hpp"
#include "scp/world/world_model.hpp"

using namespace scp;

namespace {

// Plain Dijkstra over the same occupancy graph: 26-connected free cells,
// Euclidean step costs. Returns the cost to the goal cell or infinity.
double dijkstra_cost(const world::WorldModel& world,
                     const Eigen::Vector3d& start, const Eigen::Vector3d& goal) {
    const auto& occ = world.occupancy();
    const Eigen::Vector3i dims = occ.dims();
    const int nx = dims.x(), ny = dims.y(), nz = dims.z();
    const auto flat = [&](const Eigen::Vector3i& c) {
        return (static_cast<std::size_t>(c.z()) * ny + c.y()) * nx + c.x();
    };
    const Eigen::Vector3i sc = occ.cell_of(start);
    const Eigen::Vector3i gc = occ.cell_of(goal);
    if (occ.occupied(sc) || occ.occupied(gc)) {
        return std::numeric_limits<double>::infinity();
    }

    std::vector<double> dist(static_cast<std::size_t>(nx) * ny * nz,
                             std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, Eigen::Vector3i>;
    const auto cmp = [](const Entry& a, const Entry& b) {
        return a.first > b.first;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> open(cmp);
    dist[flat(sc)] = 0.0;
    open.push({0.0, sc});
    while (!open.empty()) {
        const auto [d, cell] = open.top();
        open.pop();
        if (d > dist[flat(cell)] + 1e-12) continue;
        if ((cell - gc).squaredNorm() == 0) return d;
        for (int dz = -1; dz <= 1; ++dz) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0 && dz == 0) continue;
                    const Eigen::Vector3i nb =
                        cell + Eigen::Vector3i(dx, dy, dz);
                    if (!occ.in_bounds(nb) || occ.occupied(nb)) continue;
                    const double cand =
                        d + occ.resolution() *
                                std::sqrt(double(dx * dx + dy * dy + dz * dz));
                    if (cand < dist[flat(nb)]) {
                        dist[flat(nb)] = cand;
                        open.push({cand, nb});
                    }
                }
            }
        }
    }
    return std::numeric_limits<double>::infinity();
}

world::WorldModel boxed_world(const std::vector<Eigen::Vector3d>& pts,
                              double inflate = 0.1) {
    world::WorldModel w(0.2);
    w.enable_occupancy(Eigen::Vector3d(-2.0, -2.0, 0.0),
                       Eigen::Vector3d(2.0, 2.0, 1.2), inflate);
    w.merge(pts);
    return w;
}

}  // namespace

TEST_SUITE("path") {
    TEST_CASE("matches Dijkstra cost on random occupancy grids") {
        std::mt19937_64 rng(61);
        std::uniform_real_distribution<double> u(-1.9, 1.9);
        std::uniform_real_distribution<double> uz(0.05, 1.15);
        const Eigen::Vector3d start(-1.8, -1.8, 0.3);
        const Eigen::Vector3d goal(1.8, 1.8, 0.9);
        int solved = 0;
        for (int trial = 0; trial < 12; ++trial) {
            std::vector<Eigen::Vector3d> pts;
            for (int i = 0; i < 40; ++i) {
                pts.emplace_back(u(rng), u(rng), uz(rng));
            }
            const auto w = boxed_world(pts);
            const double want = dijkstra_cost(w, start, goal);
            const auto got = path::astar(w, start, goal);
            if (!std::isfinite(want)) {
                CHECK(got.status != path::AstarStatus::ok);
                continue;
            }
            ++solved;
            REQUIRE(got.status == path::AstarStatus::ok);
            CHECK(got.cost == doctest::Approx(want).epsilon(1e-9));

            // Path structure: endpoints on the start/goal cell centers,
            // consecutive waypoints 26-adjacent, every cell free, and the
            // summed edge lengths equal the reported cost.
            const auto& occ = w.occupancy();
            const auto& wp = got.path.waypoints;
            REQUIRE(!wp.empty());
            CHECK((wp.front() - occ.center_of(occ.cell_of(start))).norm() <=
                  1e-12);
            CHECK((wp.back() - occ.center_of(occ.cell_of(goal))).norm() <=
                  1e-12);
            double acc = 0.0;
            for (std::size_t i = 0; i < wp.size(); ++i) {
                CHECK(!world::voxel_occupied(w, occ.cell_of(wp[i])));
                if (i + 1 < wp.size()) {
                    const Eigen::Vector3i d =
                        occ.cell_of(wp[i + 1]) - occ.cell_of(wp[i]);
                    CHECK(d.cwiseAbs().maxCoeff() == 1);
                    acc += (wp[i + 1] - wp[i]).norm();
                }
            }
            CHECK(acc == doctest::Approx(got.cost).epsilon(1e-9));
            CHECK(got.path.arc_length() ==
                  doctest::Approx(got.cost).epsilon(1e-9));
        }
        CHECK(solved >= 8);  // the obstacle draw rarely seals the box
    }

    TEST_CASE("occupied endpoints are reported, not searched") {
        const Eigen::Vector3d start(-1.8, -1.8, 0.3);
        const Eigen::Vector3d goal(1.8, 1.8, 0.9);
        {
            const auto w = boxed_world({start});
            const auto r = path::astar(w, start, goal);
            CHECK(r.status == path::AstarStatus::start_occupied);
            CHECK(r.expanded == 0);
        }
        {
            const auto w = boxed_world({goal});
            const auto r = path::astar(w, start, goal);
            CHECK(r.status == path::AstarStatus::goal_occupied);
            CHECK(r.expanded == 0);
        }
    }

    TEST_CASE("sealed worlds report no_path") {
        // A wall across the whole cross-section at x = 0.
        std::vector<Eigen::Vector3d> wall;
        for (double y = -2.0; y <= 2.0; y += 0.1) {
            for (double z = 0.0; z <= 1.2; z += 0.1) {
                wall.emplace_back(0.0, y, z);
            }
        }
        const auto w = boxed_world(wall, 0.15);
        const auto r = path::astar(w, Eigen::Vector3d(-1.8, -1.8, 0.3),
                                   Eigen::Vector3d(1.8, 1.8, 0.9));
        CHECK(r.status == path::AstarStatus::no_path);
    }

    TEST_CASE("forward_point picks the first waypoint outside the sphere") {
        path::GuidePath p;
        for (int i = 0; i <= 4; ++i) {
            p.waypoints.emplace_back(double(i), 0.0, 0.0);
        }
        corridor::Sphere s;
        s.center = Eigen::Vector3d::Zero();
        s.radius = 2.5;
        CHECK((path::forward_point(p, s) - Eigen::Vector3d(3, 0, 0)).norm() ==
              0.0);

        s.radius = 100.0;  // whole path inside: falls back to the last point
        CHECK((path::forward_point(p, s) - p.waypoints.back()).norm() == 0.0);

        s.radius = 0.5;  // even the first waypoint qualifies
        CHECK((path::forward_point(p, s) - p.waypoints.front()).norm() == 0.0);
    }

    TEST_CASE("point_at_arc_length walks from the query point") {
        path::GuidePath p;
        p.waypoints = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(1, 1, 0),
                       Eigen::Vector3d(1, 1, 2)};
        const Eigen::Vector3d from(0, 0, 0);
        // Segment lengths from `from`: 1 (to first waypoint), then 1, then 2.
        CHECK((path::point_at_arc_length(p, from, 0.5) -
               Eigen::Vector3d(0.5, 0, 0))
                  .norm() <= 1e-12);
        CHECK((path::point_at_arc_length(p, from, 1.5) -
               Eigen::Vector3d(1, 0.5, 0))
                  .norm() <= 1e-12);
        CHECK((path::point_at_arc_length(p, from, 2.5) -
               Eigen::Vector3d(1, 1, 0.5))
                  .norm() <= 1e-12);
        // Beyond the end: clamps to the final waypoint.
        CHECK((path::point_at_arc_length(p, from, 50.0) -
               Eigen::Vector3d(1, 1, 2))
                  .norm() == 0.0);
        CHECK(p.arc_length() == doctest::Approx(3.0));
    }
}
