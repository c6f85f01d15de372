#pragma once

#include <Eigen/Core>
#include <optional>
#include <random>

#include "scp/corridor/sphere.hpp"
#include "scp/exec.hpp"
#include "scp/pathsearch/astar.hpp"
#include "scp/world/world_model.hpp"

namespace scp::corridor {

struct SamplerConfig {
    int batch_size = 50;               // K
    double score_weight_radius = 1.0;  // rho_r
    double score_weight_overlap = 2.0; // rho_v
    double drone_radius = 0.3;         // r_d
    double min_radius = 0.2;           // reject spheres smaller than this
    double max_radius_cap = 10.0;      // bound for empty-space spheres
    int max_retries = 3;               // fresh batches before giving up
    int max_spheres = 100;             // corridor length bound

    bool valid() const {
        return batch_size >= 1 && score_weight_radius > 0.0 &&
               score_weight_overlap > 0.0 && drone_radius >= 0.0 &&
               min_radius > 0.0 && max_radius_cap > min_radius;
    }
};

// Exact sphere-sphere intersection volume (spherical lens). Zero when
// disjoint, the smaller sphere's volume when fully contained.
double lens_volume(const Sphere& a, const Sphere& b);

// Eq-style batch score: rho_r * V_candidate + rho_v * V_overlap(previous).
double score(const Sphere& candidate, const Sphere& previous,
             const SamplerConfig& cfg);

// Largest safe sphere centered at `center`: radius is nearest-obstacle
// distance minus the drone radius, capped at max_radius_cap. In an empty
// world the radius is the cap and the recorded obstacle is a sentinel at
// distance cap + r_d along +x. Returns nullopt when the radius falls below
// min_radius.
std::optional<Sphere> generate_one_sphere(const world::WorldModel& world,
                                          const Eigen::Vector3d& center,
                                          const SamplerConfig& cfg);

// Anisotropic Gaussian over candidate centers: mean at the guide point,
// sigma_x = ||o_prev - p_h||/2 along that direction, sigma_y = sigma_z =
// sigma_x/2. Falls back to isotropic sigma = previous.radius/4 when the
// guide point coincides with the previous center.
class CandidateSampler {
public:
    CandidateSampler(const Sphere& previous, const Eigen::Vector3d& guide_point);
    Eigen::Vector3d draw(std::mt19937_64& rng) const;

    const Eigen::Matrix3d& axes() const { return axes_; }
    const Eigen::Vector3d& sigmas() const { return sigmas_; }

private:
    Eigen::Vector3d mean_;
    Eigen::Matrix3d axes_;    // columns: sampling frame
    Eigen::Vector3d sigmas_;  // per-axis standard deviations
};

// Draws K candidates, builds one sphere per candidate (dropping those below
// min_radius or with no overlap against `previous`), and returns the best
// scorer. Ties break toward the candidate closest to the guide point.
std::optional<Sphere> batch_sample(const world::WorldModel& world,
                                   const Sphere& previous,
                                   const Eigen::Vector3d& guide_point,
                                   const SamplerConfig& cfg,
                                   std::mt19937_64& rng,
                                   ExecMode mode = default_exec_mode());

enum class CorridorStatus {
    ok,
    start_sphere_rejected,  // p0 too close to obstacles
    batch_sample_failed,    // every retry batch was fully rejected
    max_spheres_exceeded,
};

struct CorridorResult {
    CorridorStatus status = CorridorStatus::ok;
    Corridor corridor;

    bool ok() const { return status == CorridorStatus::ok; }
};

// Appends spheres to a non-empty corridor (guide point + batch sample loop)
// until the goal lies in the last sphere.
CorridorStatus extend_corridor(const world::WorldModel& world,
                               Corridor& corridor, const path::GuidePath& path,
                               const Eigen::Vector3d& goal,
                               const SamplerConfig& cfg, std::mt19937_64& rng,
                               ExecMode mode = default_exec_mode());

// Full corridor from p0 to pg along the guide path: the first sphere is
// centered at p0; goal containment is checked before the first extension so a
// one-sphere corridor is possible.
CorridorResult generate_corridor(const world::WorldModel& world,
                                 const path::GuidePath& path,
                                 const Eigen::Vector3d& p0,
                                 const Eigen::Vector3d& pg,
                                 const SamplerConfig& cfg, std::mt19937_64& rng,
                                 ExecMode mode = default_exec_mode());

}  // namespace scp::corridor
