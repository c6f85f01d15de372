#include "scp/trajopt/minco.hpp"

#include <cassert>
#include <vector>

namespace scp::traj {

namespace {

double fact(int k) {
    double f = 1.0;
    for (int m = 2; m <= k; ++m) {
        f *= m;
    }
    return f;
}

// j! / (j - k)!
double falling(int j, int k) {
    double f = 1.0;
    for (int m = j - k + 1; m <= j; ++m) {
        f *= m;
    }
    return f;
}

}  // namespace

MincoSpline::MincoSpline(int s, int piece_count) : s_(s), m_(piece_count) {
    assert(s_ >= 2 && m_ >= 1);
    head_.setZero(3, s_);
    tail_.setZero(3, s_);
    T_.setZero(m_);
    const int n = 2 * s_ * m_;
    c_.setZero(n, 3);
    lu_.resize(n, 2 * s_, 2 * s_);
}

void MincoSpline::set_boundary(const Eigen::Matrix3Xd& head,
                               const Eigen::Matrix3Xd& tail) {
    assert(head.cols() == s_ && tail.cols() == s_);
    head_ = head;
    tail_ = tail;
}

void MincoSpline::update(const Eigen::Matrix3Xd& q, const Eigen::VectorXd& T) {
    assert(q.cols() == m_ - 1 && T.size() == m_);
    T_ = T;
    const int n2s = 2 * s_;
    const int n = n2s * m_;
    lu_.set_zero();
    Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(n, 3);

    for (int k = 0; k < s_; ++k) {
        lu_(k, k) = fact(k);
        rhs.row(k) = head_.col(k).transpose();
    }

    for (int i = 0; i + 1 < m_; ++i) {
        const double ti = T(i);
        const int base = n2s * i;
        for (int k = s_; k <= n2s - 2; ++k) {
            const int r = base + k;
            const Eigen::VectorXd beta = basis(n2s, ti, k);
            for (int j = k; j < n2s; ++j) {
                lu_(r, base + j) = beta(j);
            }
            lu_(r, base + n2s + k) = -fact(k);
        }
        {
            const int r = base + n2s - 1;
            double tp = 1.0;
            for (int j = 0; j < n2s; ++j) {
                lu_(r, base + j) = tp;
                tp *= ti;
            }
            rhs.row(r) = q.col(i).transpose();
        }
        for (int k = 0; k < s_; ++k) {
            const int r = base + n2s + k;
            const Eigen::VectorXd beta = basis(n2s, ti, k);
            for (int j = k; j < n2s; ++j) {
                lu_(r, base + j) = beta(j);
            }
            lu_(r, base + n2s + k) = -fact(k);
        }
    }

    {
        const int base = n2s * (m_ - 1);
        const double tl = T(m_ - 1);
        for (int k = 0; k < s_; ++k) {
            const int r = n - s_ + k;
            const Eigen::VectorXd beta = basis(n2s, tl, k);
            for (int j = k; j < n2s; ++j) {
                lu_(r, base + j) = beta(j);
            }
            rhs.row(r) = tail_.col(k).transpose();
        }
    }

    lu_.factorize();
    c_ = rhs;
    lu_.solve(c_);
}

Trajectory MincoSpline::trajectory() const {
    const int n2s = 2 * s_;
    Trajectory traj;
    traj.pieces.resize(m_);
    for (int i = 0; i < m_; ++i) {
        traj.pieces[i].duration = T_(i);
        traj.pieces[i].coeffs = c_.middleRows(n2s * i, n2s);
    }
    return traj;
}

double MincoSpline::energy() const {
    const int n2s = 2 * s_;
    double total = 0.0;
    std::vector<double> tp(n2s);
    for (int i = 0; i < m_; ++i) {
        tp[0] = T_(i);
        for (int e = 1; e < n2s; ++e) {
            tp[e] = tp[e - 1] * T_(i);
        }
        const auto ci = c_.middleRows(n2s * i, n2s);
        for (int j = s_; j < n2s; ++j) {
            for (int k = s_; k < n2s; ++k) {
                const int e = j + k - 2 * s_ + 1;  // power of T, >= 1
                total += falling(j, s_) * falling(k, s_) * tp[e - 1] / e *
                         ci.row(j).dot(ci.row(k));
            }
        }
    }
    return total;
}

void MincoSpline::energy_gradient(Eigen::MatrixX3d& grad_c,
                                  Eigen::VectorXd& grad_T) const {
    const int n2s = 2 * s_;
    std::vector<double> tp(n2s);
    for (int i = 0; i < m_; ++i) {
        tp[0] = T_(i);
        for (int e = 1; e < n2s; ++e) {
            tp[e] = tp[e - 1] * T_(i);
        }
        const int base = n2s * i;
        const auto ci = c_.middleRows(base, n2s);
        for (int j = s_; j < n2s; ++j) {
            for (int k = s_; k < n2s; ++k) {
                const int e = j + k - 2 * s_ + 1;
                grad_c.row(base + j) += 2.0 * falling(j, s_) * falling(k, s_) *
                                        tp[e - 1] / e * ci.row(k);
            }
        }
        // dE/dT_i is the squared s-th derivative at the piece end.
        const Eigen::Vector3d ds =
            ci.transpose() * basis(n2s, T_(i), s_);
        grad_T(i) += ds.squaredNorm();
    }
}

void MincoSpline::propagate_gradient(const Eigen::MatrixX3d& grad_c,
                                     const Eigen::VectorXd& grad_T_direct,
                                     Eigen::Matrix3Xd& grad_q,
                                     Eigen::VectorXd& grad_T) const {
    const int n2s = 2 * s_;
    Eigen::MatrixX3d g = grad_c;
    lu_.solve_adjoint(g);

    grad_q.resize(3, m_ - 1);
    for (int i = 0; i + 1 < m_; ++i) {
        grad_q.col(i) = g.row(waypoint_row(i)).transpose();
    }

    grad_T = grad_T_direct;
    for (int i = 0; i < m_; ++i) {
        const int base = n2s * i;
        const auto ci = c_.middleRows(base, n2s);
        // Row r constrains the k-th derivative at T_i; its T-derivative is
        // the (k+1)-th derivative of the piece evaluated there.
        const auto pull = [&](int r, int k) {
            const Eigen::Vector3d d =
                ci.transpose() * basis(n2s, T_(i), k + 1);
            grad_T(i) -= g.row(r).dot(d);
        };
        if (i + 1 < m_) {
            for (int k = s_; k <= n2s - 2; ++k) {
                pull(base + k, k);
            }
            pull(base + n2s - 1, 0);
            for (int k = 0; k < s_; ++k) {
                pull(base + n2s + k, k);
            }
        } else {
            for (int k = 0; k < s_; ++k) {
                pull(n2s * m_ - s_ + k, k);
            }
        }
    }
}

}  // namespace scp::traj
