#include "scp/bench/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "scp/corridor/corridor_gen.hpp"

namespace scp::bench::io {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write file: " + path);
    }
    out << std::setprecision(17);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read file: " + path);
    }
    return in;
}

json vec_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw std::runtime_error("expected a 3-element array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

void write_xyz_csv(const std::string& path,
                   const std::vector<Eigen::Vector3d>& points) {
    auto out = open_out(path);
    for (const auto& p : points) {
        out << p.x() << ',' << p.y() << ',' << p.z() << '\n';
    }
}

std::vector<Eigen::Vector3d> read_xyz_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<Eigen::Vector3d> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        Eigen::Vector3d p;
        char comma = 0;
        if (!(row >> p.x() >> comma >> p.y() >> comma >> p.z())) {
            throw std::runtime_error("bad x,y,z line in " + path + ": " + line);
        }
        points.push_back(p);
    }
    return points;
}

nlohmann::json forest_spec_json(const world::ForestSpec& spec) {
    return {{"length", spec.length_l},
            {"width", spec.width_w},
            {"density", spec.density_delta},
            {"tree_radius", spec.tree_radius},
            {"tree_height", spec.tree_height},
            {"surface_points", spec.points_per_tree_surface},
            {"seed", spec.seed}};
}

world::ForestSpec forest_spec_from_json(const nlohmann::json& j) {
    world::ForestSpec spec;
    spec.length_l = j.value("length", spec.length_l);
    spec.width_w = j.value("width", spec.width_w);
    spec.density_delta = j.value("density", spec.density_delta);
    spec.tree_radius = j.value("tree_radius", spec.tree_radius);
    spec.tree_height = j.value("tree_height", spec.tree_height);
    spec.points_per_tree_surface =
        j.value("surface_points", spec.points_per_tree_surface);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

nlohmann::json corridor_json(const corridor::Corridor& corridor) {
    json arr = json::array();
    for (const auto& s : corridor.spheres) {
        arr.push_back({{"center", vec_json(s.center)},
                       {"radius", s.radius},
                       {"nearest", vec_json(s.nearest_obstacle)}});
    }
    return arr;
}

corridor::Corridor corridor_from_json(const nlohmann::json& j) {
    corridor::Corridor corridor;
    for (const auto& e : j) {
        corridor::Sphere s;
        s.center = vec_from(e.at("center"));
        s.radius = e.at("radius").get<double>();
        s.nearest_obstacle = vec_from(e.at("nearest"));
        corridor.spheres.push_back(s);
    }
    return corridor;
}

nlohmann::json trajectory_json(const traj::Trajectory& traj) {
    json pieces = json::array();
    for (const auto& piece : traj.pieces) {
        json coeffs = json::array();
        for (Eigen::Index r = 0; r < piece.coeffs.rows(); ++r) {
            for (Eigen::Index c = 0; c < 3; ++c) {
                coeffs.push_back(piece.coeffs(r, c));
            }
        }
        pieces.push_back({{"duration", piece.duration}, {"coeffs", coeffs}});
    }
    return {{"order", traj.order()}, {"pieces", pieces}};
}

traj::Trajectory trajectory_from_json(const nlohmann::json& j) {
    traj::Trajectory traj;
    const int order = j.at("order").get<int>();
    const int rows = 2 * order;
    for (const auto& e : j.at("pieces")) {
        traj::PolynomialPiece piece;
        piece.duration = e.at("duration").get<double>();
        const auto& coeffs = e.at("coeffs");
        if (static_cast<int>(coeffs.size()) != rows * 3) {
            throw std::runtime_error("trajectory piece has wrong coeff count");
        }
        piece.coeffs.resize(rows, 3);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < 3; ++c) {
                piece.coeffs(r, c) = coeffs[3 * r + c].get<double>();
            }
        }
        traj.pieces.push_back(std::move(piece));
    }
    return traj;
}

SampleSeries sample_series(const TrialResult& result) {
    return {result.sample_t, result.sample_p, result.sample_v, result.sample_a};
}

void write_sampled_csv(const std::string& path, const SampleSeries& series) {
    auto out = open_out(path);
    out << "t,x,y,z,vx,vy,vz,ax,ay,az\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const auto& p = series.p[i];
        const auto& v = series.v[i];
        const auto& a = series.a[i];
        out << series.t[i] << ',' << p.x() << ',' << p.y() << ',' << p.z()
            << ',' << v.x() << ',' << v.y() << ',' << v.z() << ',' << a.x()
            << ',' << a.y() << ',' << a.z() << '\n';
    }
}

void write_sampled_csv(const std::string& path, const traj::Trajectory& traj,
                       double dt) {
    SampleSeries series;
    const double total = traj.total_duration();
    const int steps = static_cast<int>(std::ceil(total / dt));
    for (int i = 0; i <= steps; ++i) {
        const double t = std::min(i * dt, total);
        series.t.push_back(t);
        series.p.push_back(traj.position(t));
        series.v.push_back(traj.velocity(t));
        series.a.push_back(traj.acceleration(t));
    }
    write_sampled_csv(path, series);
}

SampleSeries read_sampled_csv(const std::string& path) {
    auto in = open_in(path);
    SampleSeries series;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        double vals[10];
        char comma = 0;
        row >> vals[0];
        for (int i = 1; i < 10; ++i) {
            row >> comma >> vals[i];
        }
        if (!row) {
            throw std::runtime_error("bad sample line in " + path + ": " + line);
        }
        series.t.push_back(vals[0]);
        series.p.emplace_back(vals[1], vals[2], vals[3]);
        series.v.emplace_back(vals[4], vals[5], vals[6]);
        series.a.emplace_back(vals[7], vals[8], vals[9]);
    }
    return series;
}

void write_results_csv(const std::string& path,
                       const std::vector<TrialResult>& results) {
    auto out = open_out(path);
    out << "seed,density,v_max,success,failure_reason,flight_time,"
           "path_length,max_speed,mapping_mu,mapping_sigma,planning_mu,"
           "planning_sigma\n";
    for (const auto& r : results) {
        out << r.seed << ',' << r.density << ',' << r.v_max << ','
            << (r.success ? 1 : 0) << ',' << r.failure_reason << ','
            << r.flight_time << ',' << r.path_length << ',' << r.max_speed
            << ',' << r.mapping.mean_ms << ',' << r.mapping.stddev_ms << ','
            << r.planning.mean_ms << ',' << r.planning.stddev_ms << '\n';
    }
}

std::vector<TrialResult> read_results_csv(const std::string& path) {
    auto in = open_in(path);
    std::vector<TrialResult> results;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) {
            fields.push_back(field);
        }
        if (fields.size() != 12) {
            throw std::runtime_error("bad results row in " + path + ": " + line);
        }
        TrialResult r;
        r.seed = std::stoull(fields[0]);
        r.density = std::stod(fields[1]);
        r.v_max = std::stod(fields[2]);
        r.success = fields[3] == "1";
        r.failure_reason = fields[4];
        r.flight_time = std::stod(fields[5]);
        r.path_length = std::stod(fields[6]);
        r.max_speed = std::stod(fields[7]);
        r.mapping.mean_ms = std::stod(fields[8]);
        r.mapping.stddev_ms = std::stod(fields[9]);
        r.planning.mean_ms = std::stod(fields[10]);
        r.planning.stddev_ms = std::stod(fields[11]);
        results.push_back(std::move(r));
    }
    return results;
}

void write_events_jsonl(const std::string& path,
                        const std::vector<replan::ReplanEvent>& events) {
    auto out = open_out(path);
    for (const auto& e : events) {
        const json j = {{"t", e.t},
                        {"trigger", e.trigger},
                        {"reused_spheres", e.reused_spheres},
                        {"new_spheres", e.new_spheres},
                        {"opt_iterations", e.opt_iterations},
                        {"opt_wall_ms", e.opt_wall_ms},
                        {"corridor_wall_ms", e.corridor_wall_ms}};
        out << j.dump() << '\n';
    }
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
    auto in = open_in(path);
    json j;
    in >> j;
    return j;
}

void write_speed_profile_csv(const std::string& path,
                             const SampleSeries& series) {
    auto out = open_out(path);
    out << "t,speed,accel\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        out << series.t[i] << ',' << series.v[i].norm() << ','
            << series.a[i].norm() << '\n';
    }
}

void write_speed_profile_csv(const std::string& path,
                             const traj::Trajectory& traj, double dt) {
    auto out = open_out(path);
    out << "t,speed,accel\n";
    const double total = traj.total_duration();
    const int steps = static_cast<int>(std::ceil(total / dt));
    for (int i = 0; i <= steps; ++i) {
        const double t = std::min(i * dt, total);
        out << t << ',' << traj.velocity(t).norm() << ','
            << traj.acceleration(t).norm() << '\n';
    }
}

void write_corridor_geometry_csv(const std::string& path,
                                 const corridor::Corridor& corridor) {
    auto out = open_out(path);
    out << "index,radius,volume,overlap_with_next\n";
    const auto& spheres = corridor.spheres;
    for (std::size_t i = 0; i < spheres.size(); ++i) {
        double overlap = 0.0;
        if (i + 1 < spheres.size()) {
            overlap = corridor::lens_volume(spheres[i], spheres[i + 1]);
        }
        out << i << ',' << spheres[i].radius << ',' << spheres[i].volume()
            << ',' << overlap << '\n';
    }
}

void write_path_speed_csv(const std::string& path,
                          const SampleSeries& series) {
    auto out = open_out(path);
    out << "t,x,y,z,speed\n";
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        const auto& p = series.p[i];
        out << series.t[i] << ',' << p.x() << ',' << p.y() << ',' << p.z()
            << ',' << series.v[i].norm() << '\n';
    }
}

void write_success_matrix_csv(const std::string& path,
                              const std::vector<TrialResult>& results) {
    // Axis values in first-seen order (sweeps emit density-major rows).
    std::vector<double> densities;
    std::vector<double> speeds;
    for (const auto& r : results) {
        if (std::find(densities.begin(), densities.end(), r.density) ==
            densities.end()) {
            densities.push_back(r.density);
        }
        if (std::find(speeds.begin(), speeds.end(), r.v_max) == speeds.end()) {
            speeds.push_back(r.v_max);
        }
    }
    auto rate_for = [&](double density, double v_max) {
        int trials = 0, successes = 0;
        for (const auto& r : results) {
            if (r.density == density && r.v_max == v_max) {
                ++trials;
                successes += r.success ? 1 : 0;
            }
        }
        return trials > 0 ? static_cast<double>(successes) / trials : 0.0;
    };
    auto out = open_out(path);
    out << "density";
    for (double v : speeds) {
        out << ",v" << v;
    }
    out << '\n';
    for (double d : densities) {
        out << d;
        for (double v : speeds) {
            out << ',' << rate_for(d, v);
        }
        out << '\n';
    }
}

void write_cells_csv(const std::string& path, const SweepResult& sweep) {
    auto out = open_out(path);
    out << "density,v_max,trials,successes,success_rate,mapping_mu,"
           "mapping_sigma,planning_mu,planning_sigma\n";
    for (const auto& c : sweep.cells) {
        const double rate =
            c.trials > 0 ? static_cast<double>(c.successes) / c.trials : 0.0;
        out << c.density << ',' << c.v_max << ',' << c.trials << ','
            << c.successes << ',' << rate << ',' << c.mapping.mean_ms << ','
            << c.mapping.stddev_ms << ',' << c.planning.mean_ms << ','
            << c.planning.stddev_ms << '\n';
    }
}

}  // namespace scp::bench::io
