// Timing comparison of the OpenMP kernels against their serial reference
// paths. Both paths must produce bit-identical results (candidate draws are
// serialized and reductions run in a fixed order), so besides the timings
// this doubles as a parity check; any mismatch exits nonzero.
#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <random>
#include <vector>

#include "scp/bench/bench.hpp"
#include "scp/corridor/corridor_gen.hpp"
#include "scp/exec.hpp"
#include "scp/trajopt/optimize.hpp"
#include "scp/world/world_model.hpp"

using namespace scp;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(const Clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Row {
    std::string name;
    double serial_ms = 0.0;
    double openmp_ms = 0.0;
    bool identical = true;
};

void print_row(const Row& r) {
    std::printf("%-22s %10.3f ms %10.3f ms   speedup %5.2fx   identical %s\n",
                r.name.c_str(), r.serial_ms, r.openmp_ms,
                r.openmp_ms > 0.0 ? r.serial_ms / r.openmp_ms : 0.0,
                r.identical ? "yes" : "NO");
}

Row bench_batch_sample(const world::WorldModel& world, std::uint64_t seed,
                       int reps) {
    corridor::SamplerConfig cfg;
    Row row{"batch_sample", 0, 0, true};
    std::vector<corridor::Sphere> picks[2];
    const ExecMode modes[2] = {ExecMode::serial, ExecMode::openmp};
    double* times[2] = {&row.serial_ms, &row.openmp_ms};

    for (int m = 0; m < 2; ++m) {
        std::mt19937_64 rng(seed);
        const auto prev =
            corridor::generate_one_sphere(world, {-25.0, 0.0, 1.0}, cfg);
        if (!prev) {
            throw std::runtime_error("seed sphere rejected; lower density");
        }
        corridor::Sphere previous = *prev;
        const auto t0 = Clock::now();
        for (int i = 0; i < reps; ++i) {
            const Eigen::Vector3d guide =
                previous.center + Eigen::Vector3d(1.5, 0.0, 0.0);
            const auto next = corridor::batch_sample(world, previous, guide,
                                                     cfg, rng, modes[m]);
            if (next) {
                picks[m].push_back(*next);
                previous = *next;
                if (previous.center.x() > 20.0) {
                    previous = *prev;  // wrap around, keep the workload going
                }
            }
        }
        *times[m] = ms_since(t0);
    }
    row.identical = picks[0].size() == picks[1].size();
    for (std::size_t i = 0; row.identical && i < picks[0].size(); ++i) {
        row.identical = picks[0][i].center == picks[1][i].center &&
                        picks[0][i].radius == picks[1][i].radius;
    }
    return row;
}

Row bench_penalty_cost(const world::WorldModel& world, std::uint64_t seed,
                       int reps) {
    // A moderately long corridor so the per-piece loop has real width.
    corridor::SamplerConfig scfg;
    std::mt19937_64 rng(seed);
    corridor::Corridor corridor;
    auto sphere = corridor::generate_one_sphere(world, {-25.0, 0.0, 1.0}, scfg);
    if (!sphere) {
        throw std::runtime_error("seed sphere rejected; lower density");
    }
    corridor.spheres.push_back(*sphere);
    while (corridor.spheres.size() < 16) {
        const Eigen::Vector3d guide =
            corridor.spheres.back().center + Eigen::Vector3d(2.0, 0.0, 0.0);
        const auto next = corridor::batch_sample(
            world, corridor.spheres.back(), guide, scfg, rng, ExecMode::serial);
        if (!next) {
            break;
        }
        corridor.spheres.push_back(*next);
    }

    const Eigen::Vector3d p0 = corridor.spheres.front().center;
    const Eigen::Vector3d pg = corridor.spheres.back().center;
    traj::OptimizerConfig ocfg;
    Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, ocfg.spline_order);
    Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, ocfg.spline_order);
    head.col(0) = p0;
    tail.col(0) = pg;
    const auto init = traj::default_initialization(corridor, p0, pg, ocfg.v_max);

    Row row{"penalty_cost", 0, 0, true};
    double costs[2] = {0.0, 0.0};
    Eigen::VectorXd grads[2];
    const ExecMode modes[2] = {ExecMode::serial, ExecMode::openmp};
    double* times[2] = {&row.serial_ms, &row.openmp_ms};

    for (int m = 0; m < 2; ++m) {
        traj::TrajOptProblem problem(corridor, head, tail, ocfg, modes[m]);
        const Eigen::VectorXd x = problem.pack(init);
        Eigen::VectorXd grad(x.size());
        const auto t0 = Clock::now();
        double acc = 0.0;
        for (int i = 0; i < reps; ++i) {
            acc = problem.cost(x, grad);
        }
        *times[m] = ms_since(t0);
        costs[m] = acc;
        grads[m] = grad;
    }
    row.identical = costs[0] == costs[1] && grads[0] == grads[1];
    return row;
}

Row bench_sweep(std::uint64_t seed, int trials) {
    bench::SweepSpec spec;
    spec.densities = {1.0 / 36.0};
    spec.speeds = {5.0};
    spec.trials_per_cell = trials;
    spec.base.seed = seed;
    spec.base.forest.length_l = 30.0;  // shortened course, timing only

    Row row{"sweep_trials", 0, 0, true};
    bench::SweepResult results[2];
    const ExecMode modes[2] = {ExecMode::serial, ExecMode::openmp};
    double* times[2] = {&row.serial_ms, &row.openmp_ms};
    for (int m = 0; m < 2; ++m) {
        auto s = spec;
        s.base.mode = modes[m];
        const auto t0 = Clock::now();
        results[m] = bench::run_sweep(s);
        *times[m] = ms_since(t0);
    }
    row.identical = results[0].trials.size() == results[1].trials.size();
    for (std::size_t i = 0; row.identical && i < results[0].trials.size();
         ++i) {
        const auto& a = results[0].trials[i];
        const auto& b = results[1].trials[i];
        row.identical = a.success == b.success &&
                        a.flight_time == b.flight_time &&
                        a.path_length == b.path_length &&
                        a.max_speed == b.max_speed &&
                        a.failure_reason == b.failure_reason;
    }
    return row;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel comparison"};
    std::uint64_t seed = 1;
    int reps = 200;
    double density = 1.0 / 25.0;
    int sweep_trials = 0;
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--reps", reps, "kernel repetitions");
    app.add_option("--density", density, "forest density, trees per m^2");
    app.add_option("--sweep-trials", sweep_trials,
                   "also run a shortened sweep with this many trials per mode "
                   "(0 = skip)");
    CLI11_PARSE(app, argc, argv);

    try {
        world::ForestSpec fsp;
        fsp.density_delta = density;
        fsp.seed = seed;
        const auto forest = world::generate_forest(fsp);
        std::cout << "world: " << forest.world.size() << " points, threads "
                  << hardware_threads() << "\n\n";

        std::vector<Row> rows;
        rows.push_back(bench_batch_sample(forest.world, seed, reps));
        rows.push_back(bench_penalty_cost(forest.world, seed, reps));
        if (sweep_trials > 0) {
            rows.push_back(bench_sweep(seed, sweep_trials));
        }

        std::printf("%-22s %13s %13s\n", "kernel", "serial", "openmp");
        bool all_identical = true;
        for (const auto& r : rows) {
            print_row(r);
            all_identical = all_identical && r.identical;
        }
        if (!all_identical) {
            std::cerr << "\nparity FAILED: serial and openmp outputs differ\n";
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
