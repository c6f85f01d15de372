#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <utility>
#include <vector>

namespace scp::traj {

// k-th derivative of the monomial basis [1, t, t^2, ...] of length n:
// component j is j!/(j-k)! * t^(j-k) for j >= k, zero below.
inline Eigen::VectorXd basis(int n, double t, int k) {
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    double perm = 1.0;
    for (int m = 2; m <= k; ++m) {
        perm *= m;  // k! for j == k
    }
    double tp = 1.0;
    for (int j = k; j < n; ++j) {
        b(j) = perm * tp;
        tp *= t;
        perm *= static_cast<double>(j + 1) / static_cast<double>(j + 1 - k);
    }
    return b;
}

// One polynomial piece p(t) = sum_j coeffs.row(j)^T * t^j over [0, duration].
// A piece of a min-control-effort spline of order s has 2s rows.
struct PolynomialPiece {
    double duration = 0.0;
    Eigen::MatrixX3d coeffs;  // ascending powers, one row per monomial

    Eigen::Vector3d derivative(double t, int k) const {
        return coeffs.transpose() *
               basis(static_cast<int>(coeffs.rows()), t, k);
    }
};

class Trajectory {
public:
    std::vector<PolynomialPiece> pieces;

    bool empty() const { return pieces.empty(); }
    int piece_count() const { return static_cast<int>(pieces.size()); }
    // s: half the coefficient count (continuity order at junctions is 2s-2).
    int order() const {
        return pieces.empty() ? 0
                              : static_cast<int>(pieces.front().coeffs.rows()) / 2;
    }

    double total_duration() const {
        double total = 0.0;
        for (const auto& p : pieces) {
            total += p.duration;
        }
        return total;
    }

    // Piece index and local time for global time t, clamped to [0, total].
    std::pair<int, double> locate(double t) const {
        if (t <= 0.0) {
            return {0, 0.0};
        }
        double acc = 0.0;
        for (int i = 0; i + 1 < piece_count(); ++i) {
            if (t < acc + pieces[i].duration) {
                return {i, t - acc};
            }
            acc += pieces[i].duration;
        }
        const int last = piece_count() - 1;
        return {last, std::min(t - acc, pieces[last].duration)};
    }

    Eigen::Vector3d derivative(double t, int k) const {
        const auto [i, tau] = locate(t);
        return pieces[i].derivative(tau, k);
    }
    Eigen::Vector3d position(double t) const { return derivative(t, 0); }
    Eigen::Vector3d velocity(double t) const { return derivative(t, 1); }
    Eigen::Vector3d acceleration(double t) const { return derivative(t, 2); }

    // Global times of the piece junctions (piece_count - 1 interior times).
    std::vector<double> junction_times() const {
        std::vector<double> ts;
        double acc = 0.0;
        for (int i = 0; i + 1 < piece_count(); ++i) {
            acc += pieces[i].duration;
            ts.push_back(acc);
        }
        return ts;
    }
};

}  // namespace scp::traj
