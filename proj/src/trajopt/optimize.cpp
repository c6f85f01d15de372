#include "scp/trajopt/optimize.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

#include "scp/trajopt/barrier.hpp"

namespace scp::traj {

namespace {

// Monomial basis values and first three derivatives at t, one column per
// derivative order. Stack-allocated for orders s <= 8.
using BasisMat = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::ColMajor, 16, 4>;

void basis4(int n, double t, BasisMat& b) {
    b.setZero(n, 4);
    for (int k = 0; k < 4; ++k) {
        double perm = 1.0;
        for (int m = 2; m <= k; ++m) {
            perm *= m;
        }
        double tp = 1.0;
        for (int j = k; j < n; ++j) {
            b(j, k) = perm * tp;
            tp *= t;
            perm *= static_cast<double>(j + 1) / static_cast<double>(j + 1 - k);
        }
    }
}

}  // namespace

TrajOptProblem::TrajOptProblem(const corridor::Corridor& corridor,
                               const Eigen::Matrix3Xd& head,
                               const Eigen::Matrix3Xd& tail,
                               const OptimizerConfig& cfg, ExecMode mode)
    : corridor_(corridor),
      cfg_(cfg),
      mode_(mode),
      m_(static_cast<int>(corridor.size())),
      spline_(cfg.spline_order, static_cast<int>(corridor.size())) {
    assert(m_ >= 1);
    spline_.set_boundary(head, tail);
}

Eigen::VectorXd TrajOptProblem::pack(const OptimizerState& state) const {
    assert(state.tau.size() == m_ && state.q.cols() == m_ - 1);
    Eigen::VectorXd x(variable_count());
    x.head(m_) = state.tau;
    for (int i = 0; i + 1 < m_; ++i) {
        x.segment<3>(m_ + 3 * i) = state.q.col(i);
    }
    return x;
}

OptimizerState TrajOptProblem::unpack(const Eigen::VectorXd& x) const {
    OptimizerState state;
    state.tau = x.head(m_);
    state.q.resize(3, m_ - 1);
    for (int i = 0; i + 1 < m_; ++i) {
        state.q.col(i) = x.segment<3>(m_ + 3 * i);
    }
    return state;
}

double TrajOptProblem::cost(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    grad.setZero(x.size());
    const OptimizerState state = unpack(x);
    const Eigen::VectorXd t_vec = state.tau.array().exp();
    if (!t_vec.allFinite()) {
        return std::numeric_limits<double>::infinity();
    }
    spline_.update(state.q, t_vec);

    const int n2s = 2 * cfg_.spline_order;
    Eigen::MatrixX3d grad_c = Eigen::MatrixX3d::Zero(n2s * m_, 3);
    Eigen::VectorXd grad_t = Eigen::VectorXd::Zero(m_);

    breakdown_ = {};
    breakdown_.energy = spline_.energy();
    spline_.energy_gradient(grad_c, grad_t);

    breakdown_.time = cfg_.time_weight * t_vec.sum();
    grad_t.array() += cfg_.time_weight;

    penalties(grad_c, grad_t);

    Eigen::Matrix3Xd grad_q;
    Eigen::VectorXd grad_t_full;
    spline_.propagate_gradient(grad_c, grad_t, grad_q, grad_t_full);

    grad.head(m_) = grad_t_full.cwiseProduct(t_vec);  // d/dtau via T = exp(tau)
    for (int i = 0; i + 1 < m_; ++i) {
        grad.segment<3>(m_ + 3 * i) = grad_q.col(i);
    }
    return breakdown_.total();
}

void TrajOptProblem::penalties(Eigen::MatrixX3d& grad_c,
                               Eigen::VectorXd& grad_t) {
    const int n2s = 2 * cfg_.spline_order;
    const int nq = cfg_.quadrature_nodes;
    const Eigen::VectorXd& t_vec = spline_.durations();
    const Eigen::MatrixX3d& c = spline_.coefficients();

    std::vector<double> vel_part(m_, 0.0);
    std::vector<double> acc_part(m_, 0.0);
    std::vector<double> col_part(m_, 0.0);

    const auto piece = [&](int i) {
        double pv = 0.0, pa = 0.0, pc = 0.0, gt = 0.0;
        auto gc = grad_c.middleRows(n2s * i, n2s);
        const auto ci = c.middleRows(n2s * i, n2s);
        const corridor::Sphere& sph = corridor_[i];
        const double radius_term = cfg_.literal_collision_radius
                                       ? sph.radius
                                       : sph.radius * sph.radius;
        const double ti = t_vec(i);
        const double h = ti / nq;
        BasisMat b;
        for (int j = 0; j < nq; ++j) {
            const double aj = (j + 0.5) / nq;
            basis4(n2s, aj * ti, b);
            const Eigen::Vector3d pos = ci.transpose() * b.col(0);
            const Eigen::Vector3d vel = ci.transpose() * b.col(1);
            const Eigen::Vector3d acc = ci.transpose() * b.col(2);
            const Eigen::Vector3d jer = ci.transpose() * b.col(3);

            const double xv = vel.squaredNorm() - cfg_.v_max * cfg_.v_max;
            if (const Barrier bar = barrier(xv, cfg_.barrier_mu);
                bar.value > 0.0) {
                const double w = cfg_.vel_weight;
                pv += w * h * bar.value;
                gc += (w * h * bar.d1 * 2.0) * (b.col(1) * vel.transpose());
                gt += w * (bar.value / nq +
                           h * bar.d1 * 2.0 * vel.dot(acc) * aj);
            }

            const double xa = acc.squaredNorm() - cfg_.a_max * cfg_.a_max;
            if (const Barrier bar = barrier(xa, cfg_.barrier_mu);
                bar.value > 0.0) {
                const double w = cfg_.acc_weight;
                pa += w * h * bar.value;
                gc += (w * h * bar.d1 * 2.0) * (b.col(2) * acc.transpose());
                gt += w * (bar.value / nq +
                           h * bar.d1 * 2.0 * acc.dot(jer) * aj);
            }

            const Eigen::Vector3d off = pos - sph.center;
            const double xc = off.squaredNorm() - radius_term;
            if (const Barrier bar = barrier(xc, cfg_.barrier_mu);
                bar.value > 0.0) {
                const double w = cfg_.collision_weight;
                pc += w * h * bar.value;
                gc += (w * h * bar.d1 * 2.0) * (b.col(0) * off.transpose());
                gt += w * (bar.value / nq +
                           h * bar.d1 * 2.0 * off.dot(vel) * aj);
            }
        }
        vel_part[i] = pv;
        acc_part[i] = pa;
        col_part[i] = pc;
        grad_t(i) += gt;
    };

    if (mode_ == ExecMode::openmp) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m_; ++i) {
            piece(i);
        }
    } else {
        for (int i = 0; i < m_; ++i) {
            piece(i);
        }
    }

    // Fixed-order reduction: totals match the serial path bit for bit.
    for (int i = 0; i < m_; ++i) {
        breakdown_.velocity += vel_part[i];
        breakdown_.acceleration += acc_part[i];
        breakdown_.collision += col_part[i];
    }
}

OptimizerState default_initialization(const corridor::Corridor& corridor,
                                      const Eigen::Vector3d& p0,
                                      const Eigen::Vector3d& pg,
                                      double v_max) {
    const int m = static_cast<int>(corridor.size());
    OptimizerState state;
    state.q.resize(3, m - 1);
    for (int i = 0; i + 1 < m; ++i) {
        const corridor::Sphere& a = corridor[i];
        const corridor::Sphere& b = corridor[i + 1];
        const Eigen::Vector3d dir = b.center - a.center;
        const double d = dir.norm();
        if (d < 1e-9) {
            state.q.col(i) = a.center;
            continue;
        }
        // Midpoint of the chord of the center segment inside both spheres.
        const double lo = std::max(0.0, d - b.radius);
        const double hi = std::min(d, a.radius);
        state.q.col(i) = a.center + (0.5 * (lo + hi) / d) * dir;
    }

    state.tau.resize(m);
    Eigen::Vector3d prev = p0;
    for (int i = 0; i < m; ++i) {
        const Eigen::Vector3d next = i + 1 < m
                                         ? Eigen::Vector3d(state.q.col(i))
                                         : pg;
        state.tau(i) = std::log(std::max((next - prev).norm() / v_max, 1e-2));
        prev = next;
    }
    return state;
}

OptimizeResult optimize(const corridor::Corridor& corridor,
                        const Eigen::Matrix3Xd& head,
                        const Eigen::Matrix3Xd& tail,
                        const OptimizerState& init, const OptimizerConfig& cfg,
                        ExecMode mode) {
    OptimizeResult out;
    TrajOptProblem problem(corridor, head, tail, cfg, mode);
    Eigen::VectorXd x = problem.pack(init);

    opt::LbfgsConfig lc;
    lc.max_iterations = cfg.max_iterations;
    lc.grad_tolerance = cfg.grad_tolerance;
    const opt::LbfgsResult lr = opt::minimize(
        [&problem](const Eigen::VectorXd& xx, Eigen::VectorXd& gg) {
            return problem.cost(xx, gg);
        },
        x, lc);

    // Re-evaluate at the returned point so the spline matches it exactly.
    Eigen::VectorXd scratch;
    out.cost = problem.cost(x, scratch);
    out.ok = std::isfinite(out.cost);
    out.status = lr.status;
    out.trajectory = problem.spline().trajectory();
    out.state = problem.unpack(x);
    out.breakdown = problem.last_breakdown();
    out.iterations = lr.iterations;
    out.evaluations = lr.evaluations + 1;
    return out;
}

ValidationReport validate(const Trajectory& traj,
                          const corridor::Corridor& corridor, double v_max,
                          double a_max, double tolerance, double dt) {
    ValidationReport rep;
    if (traj.empty() || corridor.empty()) {
        return rep;
    }
    rep.min_corridor_margin = std::numeric_limits<double>::infinity();
    const double total = traj.total_duration();
    for (double t = 0.0;; t += dt) {
        const double tc = std::min(t, total);
        const Eigen::Vector3d pos = traj.position(tc);
        rep.max_speed = std::max(rep.max_speed, traj.velocity(tc).norm());
        rep.max_accel = std::max(rep.max_accel, traj.acceleration(tc).norm());
        double margin = -std::numeric_limits<double>::infinity();
        for (const corridor::Sphere& s : corridor.spheres) {
            margin = std::max(margin, s.radius - (pos - s.center).norm());
        }
        rep.min_corridor_margin = std::min(rep.min_corridor_margin, margin);
        if (t >= total) {
            break;
        }
    }
    rep.speed_ok = rep.max_speed <= v_max * (1.0 + tolerance);
    rep.accel_ok = rep.max_accel <= a_max * (1.0 + tolerance);
    // Containment slack is absolute (metres): every sphere carries a full
    // drone radius of clearance on top of its nominal radius, and penalty
    // solutions equilibrate a few millimetres outside active constraints.
    rep.corridor_ok = rep.min_corridor_margin >= -tolerance;
    return rep;
}

}  // namespace scp::traj
