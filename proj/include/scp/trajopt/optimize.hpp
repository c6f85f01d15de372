#pragma once

#include <Eigen/Core>

#include "scp/corridor/sphere.hpp"
#include "scp/exec.hpp"
#include "scp/opt/lbfgs.hpp"
#include "scp/trajopt/minco.hpp"
#include "scp/trajopt/trajectory.hpp"

namespace scp::traj {

struct OptimizerConfig {
    int spline_order = 4;            // s: minimize the s-th derivative
    double time_weight = 3000.0;     // rho_T on total duration
    double vel_weight = 1e4;         // rho_v
    double acc_weight = 1e4;         // rho_a
    double collision_weight = 1e5;   // rho_c
    double v_max = 10.0;
    double a_max = 15.0;
    double barrier_mu = 0.02;
    int quadrature_nodes = 16;       // midpoint nodes per piece
    int max_iterations = 500;
    double grad_tolerance = 1e-3;
    // Penalize ||p - o||^2 - r^2 (consistent units) by default; the literal
    // variant ||p - o||^2 - r mixes m^2 with m and is kept only as a switch.
    bool literal_collision_radius = false;

    bool valid() const {
        return spline_order >= 2 && time_weight > 0.0 && v_max > 0.0 &&
               a_max > 0.0 && barrier_mu > 0.0 && quadrature_nodes >= 1 &&
               max_iterations >= 1 && grad_tolerance > 0.0;
    }
};

// Decision variables: log durations tau (T = exp(tau)) and free junction
// positions q (one per adjacent sphere pair).
struct OptimizerState {
    Eigen::VectorXd tau;    // piece_count
    Eigen::Matrix3Xd q;     // 3 x (piece_count - 1)

    bool consistent() const { return q.cols() + 1 == tau.size(); }
};

struct CostBreakdown {
    double energy = 0.0;
    double time = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
    double collision = 0.0;

    double total() const {
        return energy + time + velocity + acceleration + collision;
    }
};

// Smooth penalty objective over one trajectory piece per corridor sphere:
// control effort + weighted total time + barrier penalties on speed,
// acceleration, and sphere containment, integrated by the midpoint rule.
class TrajOptProblem {
public:
    TrajOptProblem(const corridor::Corridor& corridor,
                   const Eigen::Matrix3Xd& head, const Eigen::Matrix3Xd& tail,
                   const OptimizerConfig& cfg,
                   ExecMode mode = default_exec_mode());

    int piece_count() const { return m_; }
    int variable_count() const { return m_ + 3 * (m_ - 1); }

    Eigen::VectorXd pack(const OptimizerState& state) const;
    OptimizerState unpack(const Eigen::VectorXd& x) const;

    // Objective callback for the minimizer; also usable standalone.
    double cost(const Eigen::VectorXd& x, Eigen::VectorXd& grad);

    // Breakdown of the last evaluated cost (diagnostics only).
    const CostBreakdown& last_breakdown() const { return breakdown_; }
    // Spline for the last evaluated point.
    const MincoSpline& spline() const { return spline_; }

private:
    void penalties(Eigen::MatrixX3d& grad_c, Eigen::VectorXd& grad_T);

    const corridor::Corridor& corridor_;
    OptimizerConfig cfg_;
    ExecMode mode_;
    int m_;
    MincoSpline spline_;
    CostBreakdown breakdown_;
};

struct OptimizeResult {
    bool ok = false;
    opt::LbfgsStatus status = opt::LbfgsStatus::converged;
    Trajectory trajectory;
    OptimizerState state;    // variables at the returned optimum
    double cost = 0.0;
    CostBreakdown breakdown;
    int iterations = 0;
    int evaluations = 0;
};

// Chord-midpoint waypoints in the sphere overlaps and chord-time durations;
// the standard cold start.
OptimizerState default_initialization(const corridor::Corridor& corridor,
                                      const Eigen::Vector3d& p0,
                                      const Eigen::Vector3d& pg, double v_max);

// Minimizes the penalty objective from `init`. head/tail: boundary
// derivatives 0..s-1 as columns.
OptimizeResult optimize(const corridor::Corridor& corridor,
                        const Eigen::Matrix3Xd& head,
                        const Eigen::Matrix3Xd& tail,
                        const OptimizerState& init, const OptimizerConfig& cfg,
                        ExecMode mode = default_exec_mode());

struct ValidationReport {
    double max_speed = 0.0;
    double max_accel = 0.0;
    // Over all samples: the worst containment margin against the best
    // corridor sphere (>= 0 means always inside some sphere).
    double min_corridor_margin = 0.0;
    bool speed_ok = false;
    bool accel_ok = false;
    bool corridor_ok = false;

    bool ok() const { return speed_ok && accel_ok && corridor_ok; }
};

// Dense sampling check of dynamic limits (with relative tolerance) and
// corridor containment.
ValidationReport validate(const Trajectory& traj,
                          const corridor::Corridor& corridor, double v_max,
                          double a_max, double tolerance = 0.05,
                          double dt = 0.005);

}  // namespace scp::traj
