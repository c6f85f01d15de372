#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scp/corridor/corridor_gen.hpp"
#include "scp/exec.hpp"
#include "scp/trajopt/optimize.hpp"
#include "scp/world/world_model.hpp"

namespace scp::replan {

struct ReplanConfig {
    double horizon_d = 15.0;        // plan up to this arc length along the guide
    double gamma = 0.4;             // replan after flying gamma * horizon_d
    double reuse_distance = 3.0;    // reuse spheres whose body is this close
    bool reuse_enabled = true;      // sphere reuse + hot initialization
    bool revalidate_reused = true;  // shrink/drop reused spheres vs the new map
    double goal_tolerance = 0.5;
    double collision_check_dt = 0.01;

    bool valid() const {
        return horizon_d > 0.0 && gamma > 0.0 && gamma < 1.0 &&
               reuse_distance >= 0.0 && goal_tolerance > 0.0 &&
               collision_check_dt > 0.0;
    }
};

// One successful planning cycle (or an emergency-stop marker).
struct ReplanEvent {
    double t = 0.0;
    std::string trigger;  // initial | distance | collision | resume | emergency
    int reused_spheres = 0;
    int new_spheres = 0;
    int opt_iterations = 0;
    double opt_wall_ms = 0.0;
    double corridor_wall_ms = 0.0;  // guide search + sphere generation
};

// Where failed planning attempts died (cumulative over a session).
struct PlanFailureCounts {
    int start_blocked = 0;   // start/goal cell occupied, no free cell nearby
    int guide_search = 0;    // A* exhausted or unreachable
    int corridor = 0;        // sphere generation gave up
    int optimize = 0;        // non-finite optimum
    int validation = 0;      // optimum rejected by the feasibility gate

    int total() const {
        return start_blocked + guide_search + corridor + optimize + validation;
    }
};

// Mismatch between the outgoing and incoming plan at a splice instant.
struct SpliceRecord {
    double t = 0.0;
    double pos_error = 0.0;
    double vel_error = 0.0;
    double acc_error = 0.0;
};

// Receding-horizon planning session. Owns the committed plan the vehicle is
// tracking, a pending plan spliced in at a future junction, and the
// emergency-stop state machine. All geometry queries run against the caller's
// world model snapshot.
class PlanSession {
public:
    PlanSession(const Eigen::Vector3d& start, const Eigen::Vector3d& goal,
                const ReplanConfig& rcfg, const corridor::SamplerConfig& scfg,
                const traj::OptimizerConfig& ocfg, std::uint64_t seed,
                ExecMode mode = default_exec_mode());

    // One control-rate update at global time t against the current map.
    void step(const world::WorldModel& world, double t);

    // Ideal-tracking vehicle state on the committed plan (rest pose when no
    // plan is active).
    Eigen::Vector3d position(double t) const;
    Eigen::Vector3d velocity(double t) const;
    Eigen::Vector3d acceleration(double t) const;

    bool flying() const { return phase_ == Phase::flying; }
    bool stopping() const { return phase_ == Phase::stopping; }
    bool stopped() const { return phase_ == Phase::stopped; }
    bool has_pending() const { return pending_.has_value(); }

    const Eigen::Vector3d& goal() const { return goal_; }
    int failure_streak() const { return failure_streak_; }

    const std::vector<ReplanEvent>& events() const { return events_; }
    const std::vector<SpliceRecord>& splices() const { return splices_; }
    const PlanFailureCounts& failure_counts() const { return failures_; }

    // Committed plan (valid while flying/stopping).
    const traj::Trajectory& active_trajectory() const { return current_.traj; }
    const corridor::Corridor& active_corridor() const { return current_.corridor; }
    double active_start_time() const { return current_.start_time; }

private:
    enum class Phase { stopped, flying, stopping };

    struct PlanRecord {
        traj::Trajectory traj;
        corridor::Corridor corridor;
        traj::OptimizerState state;
        double start_time = 0.0;             // global time of trajectory t=0
        Eigen::Vector3d plan_position = Eigen::Vector3d::Zero();
    };

    struct Pending {
        PlanRecord record;
        double splice_time = 0.0;
    };

    double current_end_time() const {
        return current_.start_time + current_.traj.total_duration();
    }
    bool plan_reaches_goal() const;
    bool first_future_junction(double t, double& t_cut, int& junction) const;
    bool collision_on_traj(const traj::Trajectory& traj, double start_time,
                           const world::WorldModel& world, double t_from,
                           double t_to, double& t_col) const;
    bool collision_on_plan(const world::WorldModel& world, double t,
                           double& t_col) const;

    // Head = derivatives 0..s-1 at the start state; returns false and bumps
    // the failure streak when any stage fails.
    bool plan(const world::WorldModel& world, double t_now,
              const Eigen::Matrix3Xd& head, double splice_time,
              int cut_junction, const char* trigger);
    void commit_pending(double t);
    void begin_emergency_stop(double t);

    Eigen::Vector3d goal_;
    ReplanConfig rcfg_;
    corridor::SamplerConfig scfg_;
    traj::OptimizerConfig ocfg_;
    ExecMode mode_;
    std::mt19937_64 rng_;

    Phase phase_ = Phase::stopped;
    Eigen::Vector3d rest_position_;
    PlanRecord current_;
    std::optional<Pending> pending_;
    int failure_streak_ = 0;
    PlanFailureCounts failures_;
    std::vector<ReplanEvent> events_;
    std::vector<SpliceRecord> splices_;
};

}  // namespace scp::replan
