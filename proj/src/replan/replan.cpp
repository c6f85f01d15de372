#include "scp/replan/replan.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "scp/pathsearch/astar.hpp"

namespace scp::replan {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// p itself when its cell is free; otherwise the nearest free cell center in a
// small box around it (the vehicle can sit inside the inflation shell of a
// freshly mapped obstacle without being in actual collision).
std::optional<Eigen::Vector3d> nudge_free(const world::WorldModel& world,
                                          const Eigen::Vector3d& p) {
    const auto& occ = world.occupancy();
    const Eigen::Vector3i c0 = occ.cell_of(p);
    if (!world::voxel_occupied(world, c0)) {
        return p;
    }
    std::optional<Eigen::Vector3d> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (int dz = -3; dz <= 3; ++dz) {
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) {
                const Eigen::Vector3i c = c0 + Eigen::Vector3i(dx, dy, dz);
                if (world::voxel_occupied(world, c)) {
                    continue;
                }
                const Eigen::Vector3d center = occ.center_of(c);
                const double d = (center - p).norm();
                if (d < best_d) {
                    best_d = d;
                    best = center;
                }
            }
        }
    }
    return best;
}

}  // namespace

PlanSession::PlanSession(const Eigen::Vector3d& start,
                         const Eigen::Vector3d& goal,
                         const ReplanConfig& rcfg,
                         const corridor::SamplerConfig& scfg,
                         const traj::OptimizerConfig& ocfg, std::uint64_t seed,
                         ExecMode mode)
    : goal_(goal),
      rcfg_(rcfg),
      scfg_(scfg),
      ocfg_(ocfg),
      mode_(mode),
      rng_(seed),
      rest_position_(start) {}

Eigen::Vector3d PlanSession::position(double t) const {
    if (phase_ == Phase::stopped) {
        return rest_position_;
    }
    return current_.traj.position(t - current_.start_time);
}

Eigen::Vector3d PlanSession::velocity(double t) const {
    if (phase_ == Phase::stopped) {
        return Eigen::Vector3d::Zero();
    }
    return current_.traj.velocity(t - current_.start_time);
}

Eigen::Vector3d PlanSession::acceleration(double t) const {
    if (phase_ == Phase::stopped) {
        return Eigen::Vector3d::Zero();
    }
    return current_.traj.acceleration(t - current_.start_time);
}

bool PlanSession::plan_reaches_goal() const {
    const Eigen::Vector3d end =
        current_.traj.position(current_.traj.total_duration());
    return (end - goal_).norm() <= rcfg_.goal_tolerance;
}

bool PlanSession::first_future_junction(double t, double& t_cut,
                                        int& junction) const {
    const auto times = current_.traj.junction_times();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double gt = current_.start_time + times[i];
        if (gt > t + 1e-9) {
            t_cut = gt;
            junction = static_cast<int>(i);
            return true;
        }
    }
    return false;
}

bool PlanSession::collision_on_traj(const traj::Trajectory& traj,
                                    double start_time,
                                    const world::WorldModel& world,
                                    double t_from, double t_to,
                                    double& t_col) const {
    const double t0 = std::max(0.0, t_from - start_time);
    const double t1 = std::min(traj.total_duration(), t_to - start_time);
    if (t1 < t0) {
        return false;
    }
    for (double tl = t0;; tl += rcfg_.collision_check_dt) {
        const double tc = std::min(tl, t1);
        const auto hit = world.nearest_obstacle(traj.position(tc));
        if (hit && hit->distance < scfg_.drone_radius) {
            t_col = start_time + tc;
            return true;
        }
        if (tl >= t1) {
            return false;
        }
    }
}

// Checks the future that will actually be executed: with a pending plan the
// current trajectory is only flown up to the splice time.
bool PlanSession::collision_on_plan(const world::WorldModel& world, double t,
                                    double& t_col) const {
    const double inf = std::numeric_limits<double>::infinity();
    if (pending_) {
        if (collision_on_traj(current_.traj, current_.start_time, world, t,
                              pending_->splice_time, t_col)) {
            return true;
        }
        return collision_on_traj(pending_->record.traj, pending_->splice_time,
                                 world, pending_->splice_time, inf, t_col);
    }
    return collision_on_traj(current_.traj, current_.start_time, world, t, inf,
                             t_col);
}

bool PlanSession::plan(const world::WorldModel& world, double t_now,
                       const Eigen::Matrix3Xd& head, double splice_time,
                       int cut_junction, const char* trigger) {
    const auto corridor_t0 = Clock::now();
    const Eigen::Vector3d p_start = head.col(0);
    const Eigen::Vector3d p_curr = position(t_now);

    const auto start_pt = nudge_free(world, p_start);
    const auto goal_pt = nudge_free(world, goal_);
    if (!start_pt || !goal_pt) {
        ++failures_.start_blocked;
        ++failure_streak_;
        return false;
    }
    auto search = path::astar(world, *start_pt, *goal_pt);
    if (search.status != path::AstarStatus::ok) {
        ++failures_.guide_search;
        ++failure_streak_;
        return false;
    }
    search.path.waypoints.insert(search.path.waypoints.begin(), p_start);
    search.path.waypoints.push_back(goal_);
    const Eigen::Vector3d local_goal =
        path::point_at_arc_length(search.path, p_start, rcfg_.horizon_d);

    // Reuse the still-valid sphere prefix ahead of the cut junction.
    corridor::Corridor cor;
    int reused = 0;
    if (rcfg_.reuse_enabled && cut_junction >= 0) {
        const auto& old = current_.corridor.spheres;
        for (std::size_t i = static_cast<std::size_t>(cut_junction) + 1;
             i < old.size(); ++i) {
            corridor::Sphere s = old[i];
            // A sphere is close enough to reuse when its body (not just its
            // center) comes within reuse_distance of the vehicle; the center
            // of a 3 m sphere whose surface we are touching is 3 m away.
            if ((s.center - p_curr).norm() - s.radius > rcfg_.reuse_distance) {
                break;
            }
            if (rcfg_.revalidate_reused) {
                const auto hit = world.nearest_obstacle(s.center);
                const double fresh =
                    hit ? std::min(hit->distance - scfg_.drone_radius,
                                   scfg_.max_radius_cap)
                        : scfg_.max_radius_cap;
                s.radius = std::min(s.radius, fresh);
                if (s.radius < scfg_.min_radius) {
                    break;
                }
            }
            cor.spheres.push_back(s);
        }
        if (!cor.empty() && !cor.spheres.front().contains(p_start)) {
            cor.spheres.clear();
        }
        for (std::size_t i = 0; i + 1 < cor.spheres.size(); ++i) {
            const double d =
                (cor.spheres[i].center - cor.spheres[i + 1].center).norm();
            if (d >= cor.spheres[i].radius + cor.spheres[i + 1].radius) {
                cor.spheres.resize(i + 1);
                break;
            }
        }
        reused = static_cast<int>(cor.size());
        cor.reused_prefix_len = reused;
    }

    corridor::CorridorStatus cst;
    if (cor.empty()) {
        auto fresh = corridor::generate_corridor(world, search.path, p_start,
                                                 local_goal, scfg_, rng_, mode_);
        cst = fresh.status;
        cor = std::move(fresh.corridor);
        reused = 0;
    } else {
        cst = corridor::extend_corridor(world, cor, search.path, local_goal,
                                        scfg_, rng_, mode_);
        if (cst != corridor::CorridorStatus::ok) {
            auto fresh = corridor::generate_corridor(
                world, search.path, p_start, local_goal, scfg_, rng_, mode_);
            cst = fresh.status;
            cor = std::move(fresh.corridor);
            reused = 0;
        }
    }
    if (cst != corridor::CorridorStatus::ok) {
        ++failures_.corridor;
        ++failure_streak_;
        return false;
    }
    const double corridor_ms = ms_since(corridor_t0);

    auto init = traj::default_initialization(cor, p_start, local_goal,
                                             ocfg_.v_max);
    if (reused > 0) {
        // Carry the old optimum over the reused prefix: junctions between
        // consecutive reused spheres and durations of the pieces inside them
        // (old piece cut_junction+1+l maps onto new piece l).
        for (int l = 0; l < reused; ++l) {
            const int old_j = cut_junction + 1 + l;
            if (l + 1 < reused && old_j < current_.state.q.cols()) {
                init.q.col(l) = current_.state.q.col(old_j);
            }
            if (old_j < current_.state.tau.size()) {
                init.tau(l) = current_.state.tau(old_j);
            }
        }
    }

    Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, ocfg_.spline_order);
    tail.col(0) = local_goal;

    const auto opt_t0 = Clock::now();
    auto res = traj::optimize(cor, head, tail, init, ocfg_, mode_);
    if (!res.ok) {
        ++failures_.optimize;
        ++failure_streak_;
        return false;
    }
    // Never commit an under-converged plan: a trajectory that escapes its
    // corridor or blows the dynamic limits is worse than keeping the current
    // plan (distance trigger) or stopping (collision trigger).  The committal
    // bar is tighter than the offline 5% check: slack granted here is flown.
    constexpr double kCommitTolerance = 0.02;
    auto check = traj::validate(res.trajectory, cor, ocfg_.v_max, ocfg_.a_max,
                                kCommitTolerance);
    if (!check.ok()) {
        // Penalty continuation: re-solve from the failed iterate with the
        // constraint weights escalated so the violated terms dominate.
        traj::OptimizerConfig hard = ocfg_;
        hard.vel_weight *= 10.0;
        hard.acc_weight *= 10.0;
        hard.collision_weight *= 10.0;
        hard.max_iterations = std::min(hard.max_iterations, 200);
        auto retry = traj::optimize(cor, head, tail, res.state, hard, mode_);
        if (retry.ok) {
            check = traj::validate(retry.trajectory, cor, ocfg_.v_max,
                                   ocfg_.a_max, kCommitTolerance);
            if (check.ok()) {
                res = std::move(retry);
            }
        }
    }
    const double opt_ms = ms_since(opt_t0);
    if (!check.ok()) {
        ++failures_.validation;
        ++failure_streak_;
        return false;
    }

    PlanRecord rec;
    rec.traj = std::move(res.trajectory);
    rec.corridor = std::move(cor);
    rec.state = std::move(res.state);
    rec.start_time = splice_time;
    rec.plan_position = p_curr;

    ReplanEvent ev;
    ev.t = t_now;
    ev.trigger = trigger;
    ev.reused_spheres = reused;
    ev.new_spheres = static_cast<int>(rec.corridor.size()) - reused;
    ev.opt_iterations = res.iterations;
    ev.opt_wall_ms = opt_ms;
    ev.corridor_wall_ms = corridor_ms;
    events_.push_back(std::move(ev));
    failure_streak_ = 0;

    if (splice_time <= t_now) {
        current_ = std::move(rec);
        pending_.reset();
        phase_ = Phase::flying;
    } else {
        pending_ = Pending{std::move(rec), splice_time};
    }
    return true;
}

void PlanSession::commit_pending(double t) {
    const double tl = pending_->splice_time - current_.start_time;
    const auto& incoming = pending_->record.traj;
    SpliceRecord sr;
    sr.t = pending_->splice_time;
    sr.pos_error = (current_.traj.position(tl) - incoming.position(0.0)).norm();
    sr.vel_error = (current_.traj.velocity(tl) - incoming.velocity(0.0)).norm();
    sr.acc_error =
        (current_.traj.acceleration(tl) - incoming.acceleration(0.0)).norm();
    splices_.push_back(sr);
    current_ = std::move(pending_->record);
    pending_.reset();
    phase_ = Phase::flying;
    (void)t;
}

void PlanSession::begin_emergency_stop(double t) {
    pending_.reset();
    const Eigen::Vector3d p = position(t);
    const Eigen::Vector3d v = velocity(t);
    const double speed = v.norm();

    ReplanEvent ev;
    ev.t = t;
    ev.trigger = "emergency";
    events_.push_back(std::move(ev));

    if (speed < 1e-6) {
        rest_position_ = p;
        phase_ = Phase::stopped;
        return;
    }
    // Max-deceleration straight-line stop from the current state.
    traj::PolynomialPiece piece;
    piece.duration = speed / ocfg_.a_max;
    piece.coeffs = Eigen::MatrixX3d::Zero(2 * ocfg_.spline_order, 3);
    piece.coeffs.row(0) = p.transpose();
    piece.coeffs.row(1) = v.transpose();
    piece.coeffs.row(2) = (-0.5 * ocfg_.a_max / speed) * v.transpose();

    PlanRecord rec;
    rec.traj.pieces = {std::move(piece)};
    rec.start_time = t;
    rec.plan_position = p;
    current_ = std::move(rec);
    phase_ = Phase::stopping;
}

void PlanSession::step(const world::WorldModel& world, double t) {
    if (pending_ && t >= pending_->splice_time) {
        commit_pending(t);
    }
    if (phase_ != Phase::stopped && t >= current_end_time()) {
        rest_position_ =
            current_.traj.position(current_.traj.total_duration());
        phase_ = Phase::stopped;
        pending_.reset();
    }

    if (phase_ == Phase::stopped) {
        if ((rest_position_ - goal_).norm() <= rcfg_.goal_tolerance) {
            return;
        }
        Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, ocfg_.spline_order);
        head.col(0) = rest_position_;
        plan(world, t, head, t, -1,
             events_.empty() ? "initial" : "resume");
        return;
    }
    if (phase_ == Phase::stopping) {
        return;
    }

    double t_col = 0.0;
    if (collision_on_plan(world, t, t_col)) {
        pending_.reset();
        // The collision may have been in the discarded pending plan only; the
        // emergency decision depends on whether the plan we keep flying while
        // replanning is itself unsafe.
        double cur_col_t = 0.0;
        const bool cur_col =
            collision_on_traj(current_.traj, current_.start_time, world, t,
                              std::numeric_limits<double>::infinity(),
                              cur_col_t);
        double t_cut = 0.0;
        int jcut = -1;
        if (!first_future_junction(t, t_cut, jcut) ||
            (cur_col && cur_col_t <= t_cut)) {
            begin_emergency_stop(t);
            return;
        }
        Eigen::Matrix3Xd head(3, ocfg_.spline_order);
        for (int k = 0; k < ocfg_.spline_order; ++k) {
            head.col(k) =
                current_.traj.derivative(t_cut - current_.start_time, k);
        }
        if (!plan(world, t, head, t_cut, jcut, "collision") && cur_col) {
            begin_emergency_stop(t);
        }
        return;
    }

    if (pending_ || plan_reaches_goal()) {
        return;
    }
    if ((position(t) - current_.plan_position).norm() >
        rcfg_.gamma * rcfg_.horizon_d) {
        double t_cut = 0.0;
        int jcut = -1;
        if (first_future_junction(t, t_cut, jcut)) {
            Eigen::Matrix3Xd head(3, ocfg_.spline_order);
            for (int k = 0; k < ocfg_.spline_order; ++k) {
                head.col(k) =
                    current_.traj.derivative(t_cut - current_.start_time, k);
            }
            // Failure keeps the (still valid) current plan in play.
            plan(world, t, head, t_cut, jcut, "distance");
        }
    }
}

}  // namespace scp::replan
