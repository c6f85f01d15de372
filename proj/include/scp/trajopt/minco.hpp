#pragma once

#include <Eigen/Core>

#include "scp/trajopt/banded.hpp"
#include "scp/trajopt/trajectory.hpp"

namespace scp::traj {

// Minimum-control-effort spline through intermediate waypoints, parametrized
// by (q, T): q are the free junction positions, T the piece durations. The
// coefficients of the degree-(2s-1) pieces are the unique solution of the
// boundary + waypoint + C^{2s-2} continuity system, assembled banded and
// solved by LU. Gradients of any cost in the coefficients pull back to (q, T)
// through the adjoint solve.
class MincoSpline {
public:
    // s >= 2 (order of the minimized derivative), piece_count >= 1.
    MincoSpline(int s, int piece_count);

    // Boundary states: column k holds the k-th derivative (0..s-1) at the
    // start / end of the trajectory.
    void set_boundary(const Eigen::Matrix3Xd& head, const Eigen::Matrix3Xd& tail);

    // q: 3 x (piece_count - 1) junction positions; T: positive durations.
    void update(const Eigen::Matrix3Xd& q, const Eigen::VectorXd& T);

    int order() const { return s_; }
    int piece_count() const { return m_; }
    const Eigen::VectorXd& durations() const { return T_; }
    const Eigen::MatrixX3d& coefficients() const { return c_; }

    Trajectory trajectory() const;

    // Control-effort cost  sum_i int_0^{T_i} ||p^(s)||^2 dt  and its partial
    // gradients in the raw parameters (accumulated into the outputs).
    double energy() const;
    void energy_gradient(Eigen::MatrixX3d& grad_c, Eigen::VectorXd& grad_T) const;

    // Pulls (dJ/dc, explicit dJ/dT) back to (dJ/dq, dJ/dT) through the
    // constraint system.
    void propagate_gradient(const Eigen::MatrixX3d& grad_c,
                            const Eigen::VectorXd& grad_T_direct,
                            Eigen::Matrix3Xd& grad_q,
                            Eigen::VectorXd& grad_T) const;

private:
    int waypoint_row(int i) const { return 2 * s_ * i + 2 * s_ - 1; }

    int s_;
    int m_;
    Eigen::Matrix3Xd head_;  // 3 x s
    Eigen::Matrix3Xd tail_;  // 3 x s
    Eigen::VectorXd T_;
    Eigen::MatrixX3d c_;     // (2 s m) x 3
    BandedLU lu_;
};

}  // namespace scp::traj
