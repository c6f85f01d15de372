#include "scp/corridor/corridor_gen.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>
#include <vector>

namespace scp::corridor {

double lens_volume(const Sphere& a, const Sphere& b) {
    const double ra = a.radius;
    const double rb = b.radius;
    const double d = (a.center - b.center).norm();
    if (d >= ra + rb) {
        return 0.0;
    }
    if (d <= std::abs(ra - rb)) {
        const double r = std::min(ra, rb);
        return 4.0 / 3.0 * M_PI * r * r * r;
    }
    const double s = ra + rb - d;
    return M_PI * s * s *
           (d * d + 2.0 * d * rb - 3.0 * rb * rb + 2.0 * d * ra +
            6.0 * ra * rb - 3.0 * ra * ra) /
           (12.0 * d);
}

double score(const Sphere& candidate, const Sphere& previous,
             const SamplerConfig& cfg) {
    return cfg.score_weight_radius * candidate.volume() +
           cfg.score_weight_overlap * lens_volume(candidate, previous);
}

std::optional<Sphere> generate_one_sphere(const world::WorldModel& world,
                                          const Eigen::Vector3d& center,
                                          const SamplerConfig& cfg) {
    Sphere s;
    s.center = center;
    const auto hit = world.nearest_obstacle(center);
    if (!hit) {
        // Open space: cap the radius and record a sentinel obstacle
        // consistent with it.
        s.radius = cfg.max_radius_cap;
        s.nearest_obstacle =
            center +
            Eigen::Vector3d(cfg.max_radius_cap + cfg.drone_radius, 0.0, 0.0);
        return s;
    }
    s.nearest_obstacle = hit->point;
    s.radius = std::min(hit->distance - cfg.drone_radius, cfg.max_radius_cap);
    if (s.radius < cfg.min_radius) {
        return std::nullopt;
    }
    return s;
}

CandidateSampler::CandidateSampler(const Sphere& previous,
                                   const Eigen::Vector3d& guide_point) {
    mean_ = guide_point;
    const Eigen::Vector3d delta = guide_point - previous.center;
    const double dist = delta.norm();
    if (dist < 1e-9) {
        // Guide point collapsed onto the sphere center: sample isotropically
        // at a scale tied to the sphere.
        axes_.setIdentity();
        sigmas_.setConstant(previous.radius / 4.0);
        return;
    }
    const Eigen::Vector3d x = delta / dist;
    const Eigen::Vector3d ref = std::abs(x.x()) < 0.9
                                    ? Eigen::Vector3d::UnitX()
                                    : Eigen::Vector3d::UnitY();
    axes_.col(0) = x;
    axes_.col(1) = x.cross(ref).normalized();
    axes_.col(2) = x.cross(axes_.col(1));
    const double sigma_x = dist / 2.0;
    sigmas_ = Eigen::Vector3d(sigma_x, sigma_x / 2.0, sigma_x / 2.0);
}

Eigen::Vector3d CandidateSampler::draw(std::mt19937_64& rng) const {
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::Vector3d z;
    z.x() = n01(rng);
    z.y() = n01(rng);
    z.z() = n01(rng);
    return mean_ + axes_ * sigmas_.cwiseProduct(z);
}

std::optional<Sphere> batch_sample(const world::WorldModel& world,
                                   const Sphere& previous,
                                   const Eigen::Vector3d& guide_point,
                                   const SamplerConfig& cfg,
                                   std::mt19937_64& rng, ExecMode mode) {
    const int k = cfg.batch_size;
    const CandidateSampler sampler(previous, guide_point);

    // Centers come off the RNG serially so both execution modes consume the
    // same stream; evaluation below is embarrassingly parallel.
    std::vector<Eigen::Vector3d> centers(k);
    for (int i = 0; i < k; ++i) {
        centers[i] = sampler.draw(rng);
    }

    std::vector<Sphere> spheres(k);
    std::vector<double> scores(k, 0.0);
    std::vector<double> dists(k, 0.0);
    std::vector<char> valid(k, 0);
    const auto eval = [&](int i) {
        // A center inside the previous sphere cannot extend the corridor, and
        // in open space such candidates degenerately win the overlap term
        // (stalling progress), so they are rejected up front.
        if ((centers[i] - previous.center).norm() <= previous.radius) {
            return;
        }
        const auto cand = generate_one_sphere(world, centers[i], cfg);
        if (!cand || lens_volume(*cand, previous) <= 0.0) {
            return;
        }
        spheres[i] = *cand;
        scores[i] = score(*cand, previous, cfg);
        dists[i] = (cand->center - guide_point).norm();
        valid[i] = 1;
    };
    if (mode == ExecMode::openmp) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < k; ++i) {
            eval(i);
        }
    } else {
        for (int i = 0; i < k; ++i) {
            eval(i);
        }
    }

    // Fixed-order selection keeps the result independent of thread count.
    int best = -1;
    for (int i = 0; i < k; ++i) {
        if (!valid[i]) {
            continue;
        }
        if (best < 0 || scores[i] > scores[best] ||
            (scores[i] == scores[best] && dists[i] < dists[best])) {
            best = i;
        }
    }
    if (best < 0) {
        return std::nullopt;
    }
    return spheres[best];
}

CorridorStatus extend_corridor(const world::WorldModel& world,
                               Corridor& corridor, const path::GuidePath& path,
                               const Eigen::Vector3d& goal,
                               const SamplerConfig& cfg, std::mt19937_64& rng,
                               ExecMode mode) {
    // The path is consumed through a monotone cursor: each round the guide
    // point is the first *remaining* waypoint outside the newest sphere.
    // Rescanning from the path start instead would snap the guide point back
    // to the beginning whenever a sphere fails to cover it, and the corridor
    // would oscillate around the start instead of advancing.
    path::GuidePath remaining = path;
    {
        // Start the cursor at the waypoint nearest the corridor tail: a
        // reused prefix may already sit well past the path start, and guiding
        // the extension from the beginning would chain spheres backward.
        const Eigen::Vector3d tail = corridor.spheres.back().center;
        auto& wps = remaining.waypoints;
        std::size_t k0 = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < wps.size(); ++i) {
            const double d = (wps[i] - tail).norm();
            if (d < best) {
                best = d;
                k0 = i;
            }
        }
        if (k0 > 0) {
            wps.erase(wps.begin(), wps.begin() + static_cast<long>(k0));
        }
    }
    while (!corridor.spheres.back().contains(goal)) {
        if (static_cast<int>(corridor.size()) >= cfg.max_spheres) {
            return CorridorStatus::max_spheres_exceeded;
        }
        const Sphere& last = corridor.spheres.back();
        auto& wps = remaining.waypoints;
        std::size_t cursor = 0;
        while (cursor + 1 < wps.size() && last.contains(wps[cursor])) {
            ++cursor;
        }
        if (cursor > 0) {
            wps.erase(wps.begin(), wps.begin() + static_cast<long>(cursor));
        }
        const Eigen::Vector3d p_h = path::forward_point(remaining, last);
        std::optional<Sphere> next;
        for (int attempt = 0; attempt < cfg.max_retries && !next; ++attempt) {
            next = batch_sample(world, last, p_h, cfg, rng, mode);
        }
        if (!next) {
            return CorridorStatus::batch_sample_failed;
        }
        corridor.spheres.push_back(*next);
    }
    return CorridorStatus::ok;
}

CorridorResult generate_corridor(const world::WorldModel& world,
                                 const path::GuidePath& path,
                                 const Eigen::Vector3d& p0,
                                 const Eigen::Vector3d& pg,
                                 const SamplerConfig& cfg,
                                 std::mt19937_64& rng, ExecMode mode) {
    CorridorResult result;
    const auto first = generate_one_sphere(world, p0, cfg);
    if (!first) {
        result.status = CorridorStatus::start_sphere_rejected;
        return result;
    }
    result.corridor.spheres.push_back(*first);
    result.status = extend_corridor(world, result.corridor, path, pg, cfg, rng, mode);
    return result;
}

}  // namespace scp::corridor
