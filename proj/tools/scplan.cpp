// Command-line front end: forest generation, offline planning, closed-loop
// trials, benchmark sweeps and plot-data export. Every run writes its fully
// resolved configuration and seeds to <out>/manifest.json.
#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scp/bench/bench.hpp"
#include "scp/bench/config.hpp"
#include "scp/bench/io.hpp"
#include "scp/pathsearch/astar.hpp"

namespace fs = std::filesystem;
using namespace scp;
namespace io = scp::bench::io;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(const Clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct CommonOpts {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<double> density;
    std::optional<double> vmax;
    std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, CommonOpts& o, const std::string& default_out) {
    o.out = default_out;
    cmd->add_option("--config", o.config, "JSON config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--set", o.sets,
                    "config override key=value, dotted path into the JSON "
                    "document; value parsed as JSON, bare words as strings");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--density", o.density, "forest density, trees per m^2");
    cmd->add_option("--vmax", o.vmax, "speed limit, m/s");
    cmd->add_option("--mode", o.mode, "execution mode: serial | openmp")
        ->check(CLI::IsMember({"serial", "openmp"}));
}

std::string num(double v) { return nlohmann::json(v).dump(); }

const char* corridor_status_name(corridor::CorridorStatus s) {
    switch (s) {
        case corridor::CorridorStatus::ok: return "ok";
        case corridor::CorridorStatus::start_sphere_rejected:
            return "start_sphere_rejected";
        case corridor::CorridorStatus::batch_sample_failed:
            return "batch_sample_failed";
        case corridor::CorridorStatus::max_spheres_exceeded:
            return "max_spheres_exceeded";
    }
    return "unknown";
}

// Merge --config, --set overrides and the convenience flags (flags win).
nlohmann::json resolve_config(const CommonOpts& o, bool sweep) {
    std::vector<std::string> sets = o.sets;
    const std::string base = sweep ? "base." : "";
    if (o.seed) {
        sets.push_back(base + "seed=" + std::to_string(*o.seed));
    }
    if (o.density) {
        if (sweep) {
            sets.push_back("densities=[" + num(*o.density) + "]");
        }
        sets.push_back(base + "forest.density_delta=" + num(*o.density));
    }
    if (o.vmax) {
        if (sweep) {
            sets.push_back("speeds=[" + num(*o.vmax) + "]");
        }
        sets.push_back(base + "optimizer.v_max=" + num(*o.vmax));
    }
    if (o.mode) {
        sets.push_back(base + "exec_mode=" + *o.mode);
    }
    return bench::load_config(o.config, sets);
}

fs::path make_out_dir(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& verb,
                    const nlohmann::json& config, const nlohmann::json& seeds,
                    const std::vector<std::string>& outputs,
                    const nlohmann::json& result = nullptr) {
    nlohmann::json m{{"verb", verb},
                     {"config", config},
                     {"seeds", seeds},
                     {"outputs", outputs}};
    if (!result.is_null()) {
        m["result"] = result;
    }
    io::write_json((dir / "manifest.json").string(), m);
}

int run_forest(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts, false);
    const bench::TrialSpec spec = bench::trial_from_json(cfg);
    const fs::path dir = make_out_dir(opts.out);

    world::ForestSpec fsp = spec.forest;
    fsp.seed = spec.seed;
    const auto forest = world::generate_forest(fsp);

    io::write_xyz_csv((dir / "cloud.csv").string(), forest.world.points());
    io::write_json((dir / "forest_spec.json").string(),
                   io::forest_spec_json(fsp));
    write_manifest(dir, "forest", bench::to_json(spec), {spec.seed},
                   {"cloud.csv", "forest_spec.json"},
                   {{"trees", forest.tree_centers.size()},
                    {"points", forest.world.size()}});
    std::cout << "forest: " << forest.tree_centers.size() << " trees, "
              << forest.world.size() << " points -> " << dir << '\n';
    return 0;
}

int run_plan(const CommonOpts& opts, const std::string& cloud_path) {
    const auto cfg = resolve_config(opts, false);
    bench::TrialSpec spec = bench::trial_from_json(cfg);
    // A full-course offline plan has several times the pieces of a
    // receding-horizon cycle; give it a matching iteration budget unless the
    // config pins one.
    if (!(cfg.contains("optimizer") &&
          cfg["optimizer"].contains("max_iterations"))) {
        spec.optimizer.max_iterations = 3000;
    }
    const fs::path dir = make_out_dir(opts.out);

    world::WorldModel world(spec.voxel_resolution);
    const double inflate = spec.occupancy_inflation < 0.0
                               ? spec.sampler.drone_radius
                               : spec.occupancy_inflation;
    world.enable_occupancy(
        Eigen::Vector3d(-spec.forest.length_l / 2.0 - spec.bounds_margin,
                        -spec.forest.width_w / 2.0 - spec.bounds_margin,
                        spec.z_min),
        Eigen::Vector3d(spec.forest.length_l / 2.0 + spec.bounds_margin,
                        spec.forest.width_w / 2.0 + spec.bounds_margin,
                        spec.z_max),
        inflate);
    if (!cloud_path.empty()) {
        world.merge(io::read_xyz_csv(cloud_path));
    } else {
        world::ForestSpec fsp = spec.forest;
        fsp.seed = spec.seed;
        world.merge(world::generate_forest(fsp).world.points());
    }

    const Eigen::Vector3d start = spec.start_point();
    const Eigen::Vector3d goal = spec.goal_point();
    nlohmann::json result{{"ok", false}};
    std::vector<std::string> outputs;

    const auto t0 = Clock::now();
    auto search = path::astar(world, start, goal);
    if (search.status != path::AstarStatus::ok) {
        result["stage"] = "guide_search";
        write_manifest(dir, "plan", bench::to_json(spec), {spec.seed}, outputs,
                       result);
        std::cout << "plan: guide search failed\n";
        return 0;
    }
    path::GuidePath guide = std::move(search.path);
    guide.waypoints.insert(guide.waypoints.begin(), start);
    guide.waypoints.push_back(goal);

    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    auto cres = corridor::generate_corridor(world, guide, start, goal,
                                            spec.sampler, rng, spec.mode);
    const double corridor_ms = ms_since(t0);
    io::write_xyz_csv((dir / "guide.csv").string(), guide.waypoints);
    outputs.push_back("guide.csv");
    io::write_json((dir / "corridor.json").string(),
                   io::corridor_json(cres.corridor));
    outputs.push_back("corridor.json");
    if (!cres.ok()) {
        result["stage"] = "corridor";
        result["status"] = corridor_status_name(cres.status);
        write_manifest(dir, "plan", bench::to_json(spec), {spec.seed}, outputs,
                       result);
        std::cout << "plan: corridor generation failed ("
                  << corridor_status_name(cres.status) << ", "
                  << cres.corridor.spheres.size() << " spheres)\n";
        return 0;
    }

    const int s = spec.optimizer.spline_order;
    Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, s);
    Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, s);
    head.col(0) = start;
    tail.col(0) = goal;
    const auto init = traj::default_initialization(cres.corridor, start, goal,
                                                   spec.optimizer.v_max);
    const auto t1 = Clock::now();
    const auto ores = traj::optimize(cres.corridor, head, tail, init,
                                     spec.optimizer, spec.mode);
    const double opt_ms = ms_since(t1);
    if (!ores.ok) {
        result["stage"] = "optimize";
        write_manifest(dir, "plan", bench::to_json(spec), {spec.seed}, outputs,
                       result);
        std::cout << "plan: trajectory optimization failed\n";
        return 0;
    }

    io::write_json((dir / "trajectory.json").string(),
                   io::trajectory_json(ores.trajectory));
    io::write_sampled_csv((dir / "sampled.csv").string(), ores.trajectory,
                          0.01);
    outputs.insert(outputs.end(), {"trajectory.json", "sampled.csv"});

    const auto check =
        traj::validate(ores.trajectory, cres.corridor, spec.optimizer.v_max,
                       spec.optimizer.a_max, spec.violation_tolerance);
    result = {{"ok", true},
              {"spheres", cres.corridor.spheres.size()},
              {"pieces", ores.trajectory.piece_count()},
              {"duration", ores.trajectory.total_duration()},
              {"cost", ores.cost},
              {"iterations", ores.iterations},
              {"corridor_ms", corridor_ms},
              {"optimize_ms", opt_ms},
              {"valid", check.ok()},
              {"max_speed", check.max_speed},
              {"max_accel", check.max_accel},
              {"min_corridor_margin", check.min_corridor_margin}};
    write_manifest(dir, "plan", bench::to_json(spec), {spec.seed}, outputs,
                   result);
    std::cout << "plan: " << cres.corridor.spheres.size() << " spheres, "
              << ores.trajectory.piece_count() << " pieces, "
              << ores.trajectory.total_duration() << " s flight, corridor "
              << corridor_ms << " ms, optimize " << opt_ms << " ms, valid="
              << (check.ok() ? "yes" : "no") << " -> " << dir << '\n';
    return 0;
}

int run_fly(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts, false);
    const bench::TrialSpec spec = bench::trial_from_json(cfg);
    const fs::path dir = make_out_dir(opts.out);

    const auto result = bench::run_trial(spec);

    std::vector<std::string> outputs{"results.csv", "events.jsonl",
                                     "samples.csv"};
    io::write_results_csv((dir / "results.csv").string(), {result});
    io::write_events_jsonl((dir / "events.jsonl").string(), result.events);
    io::write_sampled_csv((dir / "samples.csv").string(),
                          io::sample_series(result));
    if (!result.segments.empty()) {
        io::write_json((dir / "corridor.json").string(),
                       io::corridor_json(result.segments.front().corridor));
        io::write_json((dir / "trajectory.json").string(),
                       io::trajectory_json(result.segments.front().traj));
        outputs.insert(outputs.end(), {"corridor.json", "trajectory.json"});
    }

    // Independent re-check against the ground-truth forest.
    world::ForestSpec fsp = spec.forest;
    fsp.seed = spec.seed;
    const auto truth = world::generate_forest(fsp);
    const auto recheck = bench::offline_recheck(result, truth.world, spec);

    write_manifest(dir, "fly", bench::to_json(spec), {spec.seed}, outputs,
                   {{"success", result.success},
                    {"failure_reason", result.failure_reason},
                    {"flight_time", result.flight_time},
                    {"path_length", result.path_length},
                    {"max_speed", result.max_speed},
                    {"mapping_mu_ms", result.mapping.mean_ms},
                    {"planning_mu_ms", result.planning.mean_ms},
                    {"replans", result.events.size()},
                    {"plan_failures",
                     {{"start_blocked", result.plan_failures.start_blocked},
                      {"guide_search", result.plan_failures.guide_search},
                      {"corridor", result.plan_failures.corridor},
                      {"optimize", result.plan_failures.optimize},
                      {"validation", result.plan_failures.validation}}},
                    {"recheck_ok", recheck.ok},
                    {"recheck_min_clearance", recheck.min_clearance}});
    std::cout << "fly: " << (result.success ? "success" : "failure")
              << (result.success ? "" : " (" + result.failure_reason + ")")
              << ", flight " << result.flight_time << " s, path "
              << result.path_length << " m, max speed " << result.max_speed
              << " m/s, recheck " << (recheck.ok ? "ok" : "FAILED") << " -> "
              << dir << '\n';
    return 0;
}

int run_sweep_cmd(const CommonOpts& opts, std::optional<int> trials) {
    auto cfg = resolve_config(opts, true);
    if (trials) {
        cfg["trials_per_cell"] = *trials;
    }
    const bench::SweepSpec spec = bench::sweep_from_json(cfg);
    const fs::path dir = make_out_dir(opts.out);

    const auto result = bench::run_sweep(spec);

    std::vector<std::string> outputs{"results.csv", "cells.csv",
                                     "success_matrix.csv"};
    io::write_results_csv((dir / "results.csv").string(), result.trials);
    io::write_cells_csv((dir / "cells.csv").string(), result);
    io::write_success_matrix_csv((dir / "success_matrix.csv").string(),
                                 result.trials);
    fs::create_directories(dir / "events");
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof(name), "events/trial_%03zu.jsonl", i);
        io::write_events_jsonl((dir / name).string(),
                               result.trials[i].events);
        outputs.emplace_back(name);
    }

    nlohmann::json seeds = nlohmann::json::array();
    for (const auto& t : result.trials) {
        seeds.push_back(t.seed);
    }
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : result.cells) {
        cells.push_back({{"density", c.density},
                         {"v_max", c.v_max},
                         {"trials", c.trials},
                         {"successes", c.successes},
                         {"mapping_mu_ms", c.mapping.mean_ms},
                         {"planning_mu_ms", c.planning.mean_ms}});
        std::cout << "cell density=" << c.density << " v_max=" << c.v_max
                  << ": " << c.successes << "/" << c.trials
                  << " success, mapping " << c.mapping.mean_ms
                  << " ms, planning " << c.planning.mean_ms << " ms\n";
    }
    write_manifest(dir, "sweep", bench::to_json(spec), seeds, outputs,
                   {{"cells", cells}});
    std::cout << "sweep: " << result.trials.size() << " trials -> " << dir
              << '\n';
    return 0;
}

int run_export(const std::string& run_dir, std::string out) {
    const fs::path run(run_dir);
    if (!fs::exists(run)) {
        throw std::runtime_error("run directory not found: " + run_dir);
    }
    if (out.empty()) {
        out = (run / "plots").string();
    }
    const fs::path dir = make_out_dir(out);
    std::vector<std::string> outputs;

    if (fs::exists(run / "samples.csv")) {
        const auto series = io::read_sampled_csv((run / "samples.csv").string());
        io::write_speed_profile_csv((dir / "speed_profile.csv").string(),
                                    series);
        io::write_path_speed_csv((dir / "path_speed.csv").string(), series);
        outputs.insert(outputs.end(), {"speed_profile.csv", "path_speed.csv"});
    } else if (fs::exists(run / "trajectory.json")) {
        const auto traj = io::trajectory_from_json(
            io::read_json((run / "trajectory.json").string()));
        io::write_speed_profile_csv((dir / "speed_profile.csv").string(), traj,
                                    0.01);
        outputs.emplace_back("speed_profile.csv");
    }
    if (fs::exists(run / "corridor.json")) {
        const auto corridor = io::corridor_from_json(
            io::read_json((run / "corridor.json").string()));
        io::write_corridor_geometry_csv(
            (dir / "corridor_geometry.csv").string(), corridor);
        outputs.emplace_back("corridor_geometry.csv");
    }
    if (fs::exists(run / "results.csv")) {
        const auto rows = io::read_results_csv((run / "results.csv").string());
        io::write_success_matrix_csv((dir / "success_matrix.csv").string(),
                                     rows);
        outputs.emplace_back("success_matrix.csv");
    }
    if (outputs.empty()) {
        throw std::runtime_error("no exportable artifacts in " + run_dir);
    }
    write_manifest(dir, "export", {{"run", run_dir}}, nlohmann::json::array(),
                   outputs);
    std::cout << "export: " << outputs.size() << " files -> " << dir << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sphere-corridor quadrotor trajectory planner"};
    app.require_subcommand(1);

    CommonOpts forest_opts, plan_opts, fly_opts, sweep_opts;
    std::string cloud_path, run_dir, export_out;
    std::optional<int> trials;

    auto* forest_cmd =
        app.add_subcommand("forest", "generate a random forest point cloud");
    add_common(forest_cmd, forest_opts, "runs/forest");

    auto* plan_cmd = app.add_subcommand(
        "plan", "single offline plan across a fully known world");
    add_common(plan_cmd, plan_opts, "runs/plan");
    plan_cmd->add_option("--cloud", cloud_path,
                         "point cloud CSV (default: generate from config)")
        ->check(CLI::ExistingFile);

    auto* fly_cmd =
        app.add_subcommand("fly", "one closed-loop trial with onboard sensing");
    add_common(fly_cmd, fly_opts, "runs/fly");

    auto* sweep_cmd =
        app.add_subcommand("sweep", "benchmark grid over density x speed");
    add_common(sweep_cmd, sweep_opts, "runs/sweep");
    sweep_cmd->add_option("--trials", trials, "trials per cell");

    auto* export_cmd =
        app.add_subcommand("export", "plot-data bundle from a prior run");
    export_cmd->add_option("--run", run_dir, "run directory to export")
        ->required();
    export_cmd->add_option("--out", export_out,
                           "output directory (default <run>/plots)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (forest_cmd->parsed()) {
            return run_forest(forest_opts);
        }
        if (plan_cmd->parsed()) {
            return run_plan(plan_opts, cloud_path);
        }
        if (fly_cmd->parsed()) {
            return run_fly(fly_opts);
        }
        if (sweep_cmd->parsed()) {
            return run_sweep_cmd(sweep_opts, trials);
        }
        if (export_cmd->parsed()) {
            return run_export(run_dir, export_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
