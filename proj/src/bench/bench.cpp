#include "scp/bench/bench.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace scp::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

CycleStats make_stats(const std::vector<double>& samples_ms) {
    CycleStats st;
    st.samples = static_cast<int>(samples_ms.size());
    if (st.samples == 0) {
        return st;
    }
    double sum = 0.0, sq = 0.0;
    for (double v : samples_ms) {
        sum += v;
        sq += v * v;
    }
    st.mean_ms = sum / st.samples;
    st.stddev_ms = std::sqrt(std::max(0.0, sq / st.samples - st.mean_ms * st.mean_ms));
    return st;
}

TrialResult run_trial(const TrialSpec& spec) {
    TrialResult out;
    out.seed = spec.seed;
    out.density = spec.forest.density_delta;
    out.v_max = spec.optimizer.v_max;

    world::ForestSpec fs = spec.forest;
    fs.seed = spec.seed;
    const auto forest = world::generate_forest(fs);
    const world::WorldModel& truth = forest.world;

    const Eigen::Vector3d start = spec.start_point();
    const Eigen::Vector3d goal = spec.goal_point();

    world::WorldModel est(spec.voxel_resolution);
    const double inflate = spec.occupancy_inflation < 0.0
                               ? spec.sampler.drone_radius
                               : spec.occupancy_inflation;
    est.enable_occupancy(
        Eigen::Vector3d(-fs.length_l / 2.0 - spec.bounds_margin,
                        -fs.width_w / 2.0 - spec.bounds_margin, spec.z_min),
        Eigen::Vector3d(fs.length_l / 2.0 + spec.bounds_margin,
                        fs.width_w / 2.0 + spec.bounds_margin, spec.z_max),
        inflate);

    replan::PlanSession session(start, goal, spec.replan, spec.sampler,
                                spec.optimizer,
                                spec.seed ^ 0x9e3779b97f4a7c15ull, spec.mode);

    const double dt = 1.0 / spec.sensor.rate_hz;
    const double timeout =
        spec.timeout_factor * (goal - start).norm() / spec.optimizer.v_max;

    std::vector<double> mapping_ms;
    Eigen::Vector3d prev_pos = start;
    double last_segment_start = std::numeric_limits<double>::quiet_NaN();

    const auto track_segments = [&](double t_now) {
        if (!session.flying() && !session.stopping()) {
            return;
        }
        const double st = session.active_start_time();
        if (!out.segments.empty() && st == last_segment_start) {
            out.segments.back().t_to =
                std::min(t_now, st + out.segments.back().traj.total_duration());
            return;
        }
        if (!out.segments.empty()) {
            // The old plan was flown up to the new plan's splice instant.
            FlownSegment& prev = out.segments.back();
            prev.t_to = std::min(st, prev.start_time + prev.traj.total_duration());
        }
        FlownSegment seg;
        seg.traj = session.active_trajectory();
        seg.corridor = session.active_corridor();
        seg.start_time = st;
        seg.t_from = st;
        seg.t_to = std::min(t_now, st + seg.traj.total_duration());
        out.segments.push_back(std::move(seg));
        last_segment_start = st;
    };

    for (int k = 0;; ++k) {
        const double t = k * dt;
        if (t > timeout) {
            out.failure_reason = "timeout";
            out.flight_time = t;
            break;
        }
        const Eigen::Vector3d pos = session.position(t);
        const Eigen::Vector3d vel = session.velocity(t);
        const Eigen::Vector3d acc = session.acceleration(t);
        out.sample_t.push_back(t);
        out.sample_p.push_back(pos);
        out.sample_v.push_back(vel);
        out.sample_a.push_back(acc);
        out.path_length += (pos - prev_pos).norm();
        prev_pos = pos;
        out.max_speed = std::max(out.max_speed, vel.norm());

        // Constraints are enforced softly, so the pass/fail line sits at the
        // validation thresholds: 5% over the dynamic limits, and the absolute
        // containment allowance on clearance (converged penalty solutions sit
        // a few millimetres outside active sphere constraints by design).
        if (const auto hit = truth.nearest_obstacle(pos);
            hit && hit->distance <
                       spec.sampler.drone_radius - spec.violation_tolerance) {
            out.failure_reason = "collision";
            out.flight_time = t;
            break;
        }
        if (vel.norm() >
            spec.optimizer.v_max * (1.0 + spec.violation_tolerance)) {
            out.failure_reason = "speed_violation";
            out.flight_time = t;
            break;
        }
        if (acc.norm() >
            spec.optimizer.a_max * (1.0 + spec.violation_tolerance)) {
            out.failure_reason = "accel_violation";
            out.flight_time = t;
            break;
        }
        if ((pos - goal).norm() <= spec.replan.goal_tolerance) {
            out.success = true;
            out.flight_time = t;
            break;
        }

        const auto map_t0 = Clock::now();
        est.merge(world::sense(truth, pos, spec.sensor));
        const double map_ms = ms_since(map_t0);
        mapping_ms.push_back(map_ms);

        const auto step_t0 = Clock::now();
        session.step(est, t);
        out.total_cycle_ms += map_ms + ms_since(step_t0);

        track_segments(t);
        // A vehicle that is still flying a safe plan can ride out planner
        // failures (it will stop at the plan's end and retry from rest);
        // aborting is only warranted when it is parked and cannot plan.
        if (session.stopped() &&
            session.failure_streak() >= spec.plan_failure_ticks) {
            out.failure_reason = "plan_failure";
            out.flight_time = t;
            break;
        }
    }

    if (!out.segments.empty()) {
        out.segments.back().t_to = std::min(
            out.flight_time, out.segments.back().start_time +
                                 out.segments.back().traj.total_duration());
    }

    out.events = session.events();
    out.splices = session.splices();
    out.plan_failures = session.failure_counts();
    out.mapping = make_stats(mapping_ms);
    std::vector<double> planning_ms;
    for (const auto& ev : out.events) {
        if (ev.trigger != "emergency") {
            planning_ms.push_back(ev.corridor_wall_ms + ev.opt_wall_ms);
        }
    }
    out.planning = make_stats(planning_ms);
    return out;
}

RecheckReport offline_recheck(const TrialResult& result,
                              const world::WorldModel& truth,
                              const TrialSpec& spec, double dt) {
    RecheckReport rep;
    rep.min_clearance = std::numeric_limits<double>::infinity();
    for (const auto& seg : result.segments) {
        const double lo = std::max(0.0, seg.t_from - seg.start_time);
        const double hi =
            std::min(seg.traj.total_duration(), seg.t_to - seg.start_time);
        if (hi < lo) {
            continue;
        }
        for (double tl = lo;; tl += dt) {
            const double tc = std::min(tl, hi);
            const Eigen::Vector3d pos = seg.traj.position(tc);
            rep.max_speed = std::max(rep.max_speed, seg.traj.velocity(tc).norm());
            rep.max_accel =
                std::max(rep.max_accel, seg.traj.acceleration(tc).norm());
            if (const auto hit = truth.nearest_obstacle(pos)) {
                rep.min_clearance = std::min(
                    rep.min_clearance, hit->distance - spec.sampler.drone_radius);
            }
            if (tl >= hi) {
                break;
            }
        }
    }
    const double tol = 1.0 + spec.violation_tolerance;
    rep.ok = rep.max_speed <= spec.optimizer.v_max * tol &&
             rep.max_accel <= spec.optimizer.a_max * tol &&
             rep.min_clearance >= -spec.violation_tolerance;
    return rep;
}

SweepResult run_sweep(const SweepSpec& spec) {
    SweepResult out;
    const int cells =
        static_cast<int>(spec.densities.size() * spec.speeds.size());
    const int total = cells * spec.trials_per_cell;
    out.trials.resize(total);

    const auto spec_for = [&](int flat) {
        const int cell = flat / spec.trials_per_cell;
        const int trial = flat % spec.trials_per_cell;
        const int di = cell / static_cast<int>(spec.speeds.size());
        const int si = cell % static_cast<int>(spec.speeds.size());
        TrialSpec ts = spec.base;
        ts.forest.density_delta = spec.densities[di];
        ts.optimizer.v_max = spec.speeds[si];
        ts.seed = spec.base.seed + static_cast<std::uint64_t>(trial);
        return ts;
    };

    if (spec.base.mode == ExecMode::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int i = 0; i < total; ++i) {
            out.trials[i] = run_trial(spec_for(i));
        }
    } else {
        for (int i = 0; i < total; ++i) {
            out.trials[i] = run_trial(spec_for(i));
        }
    }

    for (std::size_t di = 0; di < spec.densities.size(); ++di) {
        for (std::size_t si = 0; si < spec.speeds.size(); ++si) {
            SweepCell cell;
            cell.density = spec.densities[di];
            cell.v_max = spec.speeds[si];
            // Pool exactly from (n, mean, sigma) via reconstructed moments.
            const auto pool = [](const std::vector<const CycleStats*>& parts) {
                double n = 0.0, sum = 0.0, sq = 0.0;
                for (const CycleStats* p : parts) {
                    n += p->samples;
                    sum += p->mean_ms * p->samples;
                    sq += (p->stddev_ms * p->stddev_ms +
                           p->mean_ms * p->mean_ms) *
                          p->samples;
                }
                CycleStats st;
                st.samples = static_cast<int>(n);
                if (n > 0.0) {
                    st.mean_ms = sum / n;
                    st.stddev_ms = std::sqrt(
                        std::max(0.0, sq / n - st.mean_ms * st.mean_ms));
                }
                return st;
            };
            std::vector<const CycleStats*> map_parts, plan_parts;
            const int cell_base =
                static_cast<int>(di * spec.speeds.size() + si) *
                spec.trials_per_cell;
            for (int i = 0; i < spec.trials_per_cell; ++i) {
                const TrialResult& tr = out.trials[cell_base + i];
                ++cell.trials;
                cell.successes += tr.success ? 1 : 0;
                map_parts.push_back(&tr.mapping);
                plan_parts.push_back(&tr.planning);
            }
            cell.mapping = pool(map_parts);
            cell.planning = pool(plan_parts);
            out.cells.push_back(cell);
        }
    }
    return out;
}

}  // namespace scp::bench
