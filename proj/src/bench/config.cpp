#include "scp/bench/config.hpp"

#include <fstream>
#include <stdexcept>

namespace scp::bench {

namespace {

using nlohmann::json;

json forest_json(const world::ForestSpec& f) {
    return {{"length_l", f.length_l},
            {"width_w", f.width_w},
            {"density_delta", f.density_delta},
            {"tree_radius", f.tree_radius},
            {"tree_height", f.tree_height},
            {"points_per_tree_surface", f.points_per_tree_surface},
            {"seed", f.seed}};
}

world::ForestSpec forest_from(const json& j) {
    world::ForestSpec f;
    f.length_l = j.value("length_l", f.length_l);
    f.width_w = j.value("width_w", f.width_w);
    f.density_delta = j.value("density_delta", f.density_delta);
    f.tree_radius = j.value("tree_radius", f.tree_radius);
    f.tree_height = j.value("tree_height", f.tree_height);
    f.points_per_tree_surface =
        j.value("points_per_tree_surface", f.points_per_tree_surface);
    f.seed = j.value("seed", f.seed);
    return f;
}

json sensor_json(const world::SensorSpec& s) {
    return {{"range", s.range}, {"rate_hz", s.rate_hz}};
}

world::SensorSpec sensor_from(const json& j) {
    world::SensorSpec s;
    s.range = j.value("range", s.range);
    s.rate_hz = j.value("rate_hz", s.rate_hz);
    return s;
}

json sampler_json(const corridor::SamplerConfig& c) {
    return {{"batch_size", c.batch_size},
            {"score_weight_radius", c.score_weight_radius},
            {"score_weight_overlap", c.score_weight_overlap},
            {"drone_radius", c.drone_radius},
            {"min_radius", c.min_radius},
            {"max_radius_cap", c.max_radius_cap},
            {"max_retries", c.max_retries},
            {"max_spheres", c.max_spheres}};
}

corridor::SamplerConfig sampler_from(const json& j) {
    corridor::SamplerConfig c;
    c.batch_size = j.value("batch_size", c.batch_size);
    c.score_weight_radius = j.value("score_weight_radius", c.score_weight_radius);
    c.score_weight_overlap =
        j.value("score_weight_overlap", c.score_weight_overlap);
    c.drone_radius = j.value("drone_radius", c.drone_radius);
    c.min_radius = j.value("min_radius", c.min_radius);
    c.max_radius_cap = j.value("max_radius_cap", c.max_radius_cap);
    c.max_retries = j.value("max_retries", c.max_retries);
    c.max_spheres = j.value("max_spheres", c.max_spheres);
    return c;
}

json optimizer_json(const traj::OptimizerConfig& c) {
    return {{"spline_order", c.spline_order},
            {"time_weight", c.time_weight},
            {"vel_weight", c.vel_weight},
            {"acc_weight", c.acc_weight},
            {"collision_weight", c.collision_weight},
            {"v_max", c.v_max},
            {"a_max", c.a_max},
            {"barrier_mu", c.barrier_mu},
            {"quadrature_nodes", c.quadrature_nodes},
            {"max_iterations", c.max_iterations},
            {"grad_tolerance", c.grad_tolerance},
            {"literal_collision_radius", c.literal_collision_radius}};
}

traj::OptimizerConfig optimizer_from(const json& j) {
    traj::OptimizerConfig c;
    c.spline_order = j.value("spline_order", c.spline_order);
    c.time_weight = j.value("time_weight", c.time_weight);
    c.vel_weight = j.value("vel_weight", c.vel_weight);
    c.acc_weight = j.value("acc_weight", c.acc_weight);
    c.collision_weight = j.value("collision_weight", c.collision_weight);
    c.v_max = j.value("v_max", c.v_max);
    c.a_max = j.value("a_max", c.a_max);
    c.barrier_mu = j.value("barrier_mu", c.barrier_mu);
    c.quadrature_nodes = j.value("quadrature_nodes", c.quadrature_nodes);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.grad_tolerance = j.value("grad_tolerance", c.grad_tolerance);
    c.literal_collision_radius =
        j.value("literal_collision_radius", c.literal_collision_radius);
    return c;
}

json replan_json(const replan::ReplanConfig& c) {
    return {{"horizon_d", c.horizon_d},
            {"gamma", c.gamma},
            {"reuse_distance", c.reuse_distance},
            {"reuse_enabled", c.reuse_enabled},
            {"revalidate_reused", c.revalidate_reused},
            {"goal_tolerance", c.goal_tolerance},
            {"collision_check_dt", c.collision_check_dt}};
}

replan::ReplanConfig replan_from(const json& j) {
    replan::ReplanConfig c;
    c.horizon_d = j.value("horizon_d", c.horizon_d);
    c.gamma = j.value("gamma", c.gamma);
    c.reuse_distance = j.value("reuse_distance", c.reuse_distance);
    c.reuse_enabled = j.value("reuse_enabled", c.reuse_enabled);
    c.revalidate_reused = j.value("revalidate_reused", c.revalidate_reused);
    c.goal_tolerance = j.value("goal_tolerance", c.goal_tolerance);
    c.collision_check_dt = j.value("collision_check_dt", c.collision_check_dt);
    return c;
}

std::string mode_name(ExecMode m) {
    return m == ExecMode::openmp ? "openmp" : "serial";
}

ExecMode mode_from(const std::string& name) {
    if (name == "openmp") {
        return ExecMode::openmp;
    }
    if (name == "serial") {
        return ExecMode::serial;
    }
    throw std::runtime_error("unknown exec mode: " + name);
}

}  // namespace

nlohmann::json to_json(const TrialSpec& spec) {
    return {{"forest", forest_json(spec.forest)},
            {"sensor", sensor_json(spec.sensor)},
            {"sampler", sampler_json(spec.sampler)},
            {"optimizer", optimizer_json(spec.optimizer)},
            {"replan", replan_json(spec.replan)},
            {"seed", spec.seed},
            {"start_goal_z", spec.start_goal_z},
            {"z_min", spec.z_min},
            {"z_max", spec.z_max},
            {"bounds_margin", spec.bounds_margin},
            {"occupancy_inflation", spec.occupancy_inflation},
            {"voxel_resolution", spec.voxel_resolution},
            {"timeout_factor", spec.timeout_factor},
            {"violation_tolerance", spec.violation_tolerance},
            {"plan_failure_ticks", spec.plan_failure_ticks},
            {"exec_mode", mode_name(spec.mode)}};
}

TrialSpec trial_from_json(const nlohmann::json& j) {
    TrialSpec spec;
    if (j.contains("forest")) spec.forest = forest_from(j.at("forest"));
    if (j.contains("sensor")) spec.sensor = sensor_from(j.at("sensor"));
    if (j.contains("sampler")) spec.sampler = sampler_from(j.at("sampler"));
    if (j.contains("optimizer"))
        spec.optimizer = optimizer_from(j.at("optimizer"));
    if (j.contains("replan")) spec.replan = replan_from(j.at("replan"));
    spec.seed = j.value("seed", spec.seed);
    spec.start_goal_z = j.value("start_goal_z", spec.start_goal_z);
    spec.z_min = j.value("z_min", spec.z_min);
    spec.z_max = j.value("z_max", spec.z_max);
    spec.bounds_margin = j.value("bounds_margin", spec.bounds_margin);
    spec.occupancy_inflation =
        j.value("occupancy_inflation", spec.occupancy_inflation);
    spec.voxel_resolution = j.value("voxel_resolution", spec.voxel_resolution);
    spec.timeout_factor = j.value("timeout_factor", spec.timeout_factor);
    spec.violation_tolerance =
        j.value("violation_tolerance", spec.violation_tolerance);
    spec.plan_failure_ticks =
        j.value("plan_failure_ticks", spec.plan_failure_ticks);
    spec.mode = mode_from(j.value("exec_mode", mode_name(spec.mode)));
    return spec;
}

nlohmann::json to_json(const SweepSpec& spec) {
    return {{"densities", spec.densities},
            {"speeds", spec.speeds},
            {"trials_per_cell", spec.trials_per_cell},
            {"base", to_json(spec.base)}};
}

SweepSpec sweep_from_json(const nlohmann::json& j) {
    SweepSpec spec;
    if (j.contains("densities"))
        spec.densities = j.at("densities").get<std::vector<double>>();
    if (j.contains("speeds"))
        spec.speeds = j.at("speeds").get<std::vector<double>>();
    spec.trials_per_cell = j.value("trials_per_cell", spec.trials_per_cell);
    if (j.contains("base")) spec.base = trial_from_json(j.at("base"));
    return spec;
}

nlohmann::json load_config(const std::string& path,
                           const std::vector<std::string>& overrides) {
    nlohmann::json j = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) {
            throw std::runtime_error("cannot open config file: " + path);
        }
        in >> j;
    }
    for (const std::string& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("override must be key=value: " + ov);
        }
        const std::string key = ov.substr(0, eq);
        const std::string raw = ov.substr(eq + 1);
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error&) {
            value = raw;  // bare word: treat as string
        }
        nlohmann::json* node = &j;
        std::size_t pos = 0;
        while (true) {
            const auto dot = key.find('.', pos);
            const std::string part = key.substr(
                pos, dot == std::string::npos ? std::string::npos : dot - pos);
            if (part.empty()) {
                throw std::runtime_error("bad override path: " + key);
            }
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            pos = dot + 1;
        }
    }
    return j;
}

}  // namespace scp::bench
