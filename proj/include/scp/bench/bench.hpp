#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "scp/corridor/corridor_gen.hpp"
#include "scp/exec.hpp"
#include "scp/replan/replan.hpp"
#include "scp/trajopt/optimize.hpp"
#include "scp/world/world_model.hpp"

namespace scp::bench {

struct TrialSpec {
    world::ForestSpec forest;
    world::SensorSpec sensor;
    corridor::SamplerConfig sampler;
    traj::OptimizerConfig optimizer;
    replan::ReplanConfig replan;
    std::uint64_t seed = 1;          // overrides forest.seed; sampler RNG derives from it
    double start_goal_z = 1.0;       // flight altitude of the endpoints
    double z_min = 0.0;              // planning-volume altitude band
    double z_max = 3.0;
    double bounds_margin = 2.0;      // extra xy room beyond the forest rectangle
    double occupancy_inflation = -1.0;  // < 0: use sampler.drone_radius
    double voxel_resolution = 0.2;
    double timeout_factor = 3.0;     // times the straight-line time at v_max
    // Relative slack on v_max/a_max and, read in metres, the clearance slack
    // below the drone radius (both mirror validate()'s thresholds).
    double violation_tolerance = 0.05;
    int plan_failure_ticks = 90;     // consecutive failed cycles before aborting
    ExecMode mode = ExecMode::openmp;

    Eigen::Vector3d start_point() const {
        return {-forest.length_l / 2.0, 0.0, start_goal_z};
    }
    Eigen::Vector3d goal_point() const {
        return {forest.length_l / 2.0, 0.0, start_goal_z};
    }
};

struct CycleStats {
    double mean_ms = 0.0;
    double stddev_ms = 0.0;
    int samples = 0;
};

CycleStats make_stats(const std::vector<double>& samples_ms);

// A committed plan together with the interval of it the vehicle actually
// flew. Emergency-stop segments carry an empty corridor.
struct FlownSegment {
    traj::Trajectory traj;
    corridor::Corridor corridor;
    double start_time = 0.0;  // global time of trajectory t = 0
    double t_from = 0.0;
    double t_to = 0.0;
};

struct TrialResult {
    std::uint64_t seed = 0;
    double density = 0.0;
    double v_max = 0.0;
    bool success = false;
    std::string failure_reason;  // collision | speed_violation | accel_violation | plan_failure | timeout
    double flight_time = 0.0;
    double path_length = 0.0;
    double max_speed = 0.0;
    CycleStats mapping;
    CycleStats planning;
    double total_cycle_ms = 0.0;  // wall time of all mapping+planning work

    std::vector<replan::ReplanEvent> events;
    std::vector<replan::SpliceRecord> splices;
    std::vector<FlownSegment> segments;
    replan::PlanFailureCounts plan_failures;

    // Control-rate flight samples for plots and offline checks.
    std::vector<double> sample_t;
    std::vector<Eigen::Vector3d> sample_p;
    std::vector<Eigen::Vector3d> sample_v;
    std::vector<Eigen::Vector3d> sample_a;
};

// Closed-loop trial: sense -> merge -> replan at the sensor rate with ideal
// tracking of the committed plan.
TrialResult run_trial(const TrialSpec& spec);

struct RecheckReport {
    double max_speed = 0.0;
    double max_accel = 0.0;
    double min_clearance = 0.0;  // ground-truth obstacle distance minus r_d
    bool ok = false;
};

// Independent offline re-check of the flown composite trajectory against the
// ground-truth world at a fine sampling step.
RecheckReport offline_recheck(const TrialResult& result,
                              const world::WorldModel& truth,
                              const TrialSpec& spec, double dt = 0.005);

struct SweepSpec {
    std::vector<double> densities{1.0 / 49.0, 1.0 / 36.0, 1.0 / 25.0};
    std::vector<double> speeds{5.0, 10.0};
    int trials_per_cell = 10;
    TrialSpec base;
};

struct SweepCell {
    double density = 0.0;
    double v_max = 0.0;
    int trials = 0;
    int successes = 0;
    CycleStats mapping;
    CycleStats planning;
};

struct SweepResult {
    std::vector<TrialResult> trials;  // cell-major, trial index minor
    std::vector<SweepCell> cells;
};

// Grid of independent trials; trial i in every cell uses seed base.seed + i.
SweepResult run_sweep(const SweepSpec& spec);

}  // namespace scp::bench
