#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "scp/corridor/sphere.hpp"
#include "scp/trajopt/banded.hpp"
#include "scp/trajopt/barrier.hpp"
#include "scp/trajopt/minco.hpp"
#include "scp/trajopt/optimize.hpp"

using namespace scp;

namespace {

double falling(int j, int k) {
    double f = 1.0;
    for (int m = j - k + 1; m <= j; ++m) {
        f *= m;
    }
    return f;
}

// Energy quadratic form of one piece: Q(j,k) for j,k >= s, zero elsewhere.
Eigen::MatrixXd piece_energy_form(int s, double T) {
    const int n = 2 * s;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int j = s; j < n; ++j) {
        for (int k = s; k < n; ++k) {
            const int e = j + k - 2 * s + 1;
            q(j, k) = falling(j, s) * falling(k, s) * std::pow(T, e) / e;
        }
    }
    return q;
}

// Constraints of the variational problem (per axis): boundary derivatives,
// waypoint positions, and C^{s-1} junction continuity. The energy minimizer
// under these alone should coincide with the spline the builder returns.
void variational_constraints(int s, const Eigen::VectorXd& T,
                             const Eigen::VectorXd& head,
                             const Eigen::VectorXd& tail,
                             const Eigen::VectorXd& waypoints,
                             Eigen::MatrixXd& c_mat, Eigen::VectorXd& rhs) {
    const int n2s = 2 * s;
    const int m = static_cast<int>(T.size());
    const int rows = 2 * s + (m - 1) + s * (m - 1);
    c_mat = Eigen::MatrixXd::Zero(rows, n2s * m);
    rhs = Eigen::VectorXd::Zero(rows);
    int r = 0;
    for (int k = 0; k < s; ++k, ++r) {
        c_mat.row(r).segment(0, n2s) = traj::basis(n2s, 0.0, k).transpose();
        rhs(r) = head(k);
    }
    for (int i = 0; i + 1 < m; ++i) {
        c_mat.row(r).segment(n2s * i, n2s) =
            traj::basis(n2s, T(i), 0).transpose();
        rhs(r) = waypoints(i);
        ++r;
        for (int k = 0; k < s; ++k, ++r) {
            c_mat.row(r).segment(n2s * i, n2s) =
                traj::basis(n2s, T(i), k).transpose();
            c_mat.row(r).segment(n2s * (i + 1), n2s) -=
                traj::basis(n2s, 0.0, k).transpose();
        }
    }
    for (int k = 0; k < s; ++k, ++r) {
        c_mat.row(r).segment(n2s * (m - 1), n2s) =
            traj::basis(n2s, T(m - 1), k).transpose();
        rhs(r) = tail(k);
    }
    REQUIRE(r == rows);
}

// Direct equality-constrained QP solve (KKT system, dense).
Eigen::VectorXd kkt_minimizer(int s, const Eigen::VectorXd& T,
                              const Eigen::MatrixXd& c_mat,
                              const Eigen::VectorXd& rhs) {
    const int n2s = 2 * s;
    const int m = static_cast<int>(T.size());
    const int n = n2s * m;
    const int nc = static_cast<int>(c_mat.rows());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + nc, n + nc);
    for (int i = 0; i < m; ++i) {
        kkt.block(n2s * i, n2s * i, n2s, n2s) =
            2.0 * piece_energy_form(s, T(i));
    }
    kkt.block(n, 0, nc, n) = c_mat;
    kkt.block(0, n, n, nc) = c_mat.transpose();
    Eigen::VectorXd full_rhs = Eigen::VectorXd::Zero(n + nc);
    full_rhs.tail(nc) = rhs;
    const Eigen::VectorXd sol = Eigen::FullPivLU<Eigen::MatrixXd>(kkt).solve(full_rhs);
    return sol.head(n);
}

corridor::Corridor line_corridor(int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> rad(1.6, 3.0);
    std::uniform_real_distribution<double> off(-0.4, 0.4);
    corridor::Corridor cor;
    for (int i = 0; i < m; ++i) {
        corridor::Sphere s;
        s.center = Eigen::Vector3d(2.0 * i, off(rng), 1.0 + off(rng));
        s.radius = rad(rng);
        s.nearest_obstacle =
            s.center + Eigen::Vector3d(0.0, 0.0, s.radius + 0.3);
        cor.spheres.push_back(s);
    }
    return cor;
}

}  // namespace

TEST_SUITE("banded") {
    TEST_CASE("matches dense LU on random banded systems") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> n01;
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 12 + trial;
            const int lower = 3, upper = 4;
            traj::BandedLU banded(n, lower, upper);
            Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = std::max(0, i - lower);
                     j <= std::min(n - 1, i + upper); ++j) {
                    const double v = n01(rng) + (i == j ? 6.0 : 0.0);
                    banded(i, j) = v;
                    dense(i, j) = v;
                }
            }
            Eigen::MatrixXd b(n, 3);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < 3; ++j) {
                    b(i, j) = n01(rng);
                }
            }
            Eigen::MatrixXd x1 = b, x2 = b;
            banded.factorize();
            banded.solve(x1);
            banded.solve_adjoint(x2);
            CHECK((dense * x1 - b).norm() <= 1e-9 * b.norm());
            CHECK((dense.transpose() * x2 - b).norm() <= 1e-9 * b.norm());
        }
    }
}

TEST_SUITE("barrier") {
    TEST_CASE("piecewise values") {
        const double mu = 0.02;
        CHECK(traj::barrier(-1.0, mu).value == 0.0);
        CHECK(traj::barrier(0.0, mu).value == 0.0);
        CHECK(traj::barrier(0.01, mu).value == doctest::Approx(0.001875).epsilon(1e-12));
        CHECK(traj::barrier(1.0, mu).value == doctest::Approx(1.0 - 0.01).epsilon(1e-12));
        CHECK(traj::barrier(mu, mu).value == doctest::Approx(mu / 2.0).epsilon(1e-12));
    }

    TEST_CASE("derivatives match finite differences") {
        const double mu = 0.02;
        const double h = 1e-7;
        for (double x : {-0.5, 0.003, 0.011, 0.019, 0.05, 2.0}) {
            const auto b = traj::barrier(x, mu);
            const double d1 =
                (traj::barrier(x + h, mu).value - traj::barrier(x - h, mu).value) /
                (2.0 * h);
            const double d2 =
                (traj::barrier(x + h, mu).d1 - traj::barrier(x - h, mu).d1) /
                (2.0 * h);
            CHECK(b.d1 == doctest::Approx(d1).epsilon(1e-4));
            CHECK(b.d2 == doctest::Approx(d2).epsilon(1e-3));
        }
    }

    TEST_CASE("C2 at both seams") {
        const double mu = 0.02;
        const double eps = 1e-10;
        // |f'''| peaks at 6/mu^2, so the d2 change across 2*eps can reach
        // 12*eps/mu^2 even though f is C2.
        const double d2_tol = 2.0 * eps * 6.0 / (mu * mu) * 1.1;
        for (double seam : {0.0, mu}) {
            const auto lo = traj::barrier(seam - eps, mu);
            const auto hi = traj::barrier(seam + eps, mu);
            CHECK(std::abs(hi.value - lo.value) <= 1e-8);
            CHECK(std::abs(hi.d1 - lo.d1) <= 1e-8);
            CHECK(std::abs(hi.d2 - lo.d2) <= d2_tol);
        }
    }
}

TEST_SUITE("minco") {
    TEST_CASE("single piece reproduces the cubic Hermite interpolant") {
        traj::MincoSpline spline(2, 1);
        Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, 2);
        Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, 2);
        tail.col(0) = Eigen::Vector3d(1.0, 1.0, 1.0);
        spline.set_boundary(head, tail);
        spline.update(Eigen::Matrix3Xd(3, 0), Eigen::VectorXd::Ones(1));
        // Minimum-acceleration solution: 3 t^2 - 2 t^3 on each axis.
        const auto& c = spline.coefficients();
        for (int axis = 0; axis < 3; ++axis) {
            CHECK(std::abs(c(0, axis)) <= 1e-12);
            CHECK(std::abs(c(1, axis)) <= 1e-12);
            CHECK(c(2, axis) == doctest::Approx(3.0).epsilon(1e-12));
            CHECK(c(3, axis) == doctest::Approx(-2.0).epsilon(1e-12));
        }
    }

    TEST_CASE("junction continuity and waypoint interpolation") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::uniform_real_distribution<double> ut(0.4, 2.5);
        for (int s : {2, 3, 4}) {
            const int m = 5;
            traj::MincoSpline spline(s, m);
            Eigen::Matrix3Xd head(3, s), tail(3, s);
            for (int k = 0; k < s; ++k) {
                head.col(k) = Eigen::Vector3d(u(rng), u(rng), u(rng));
                tail.col(k) = Eigen::Vector3d(u(rng), u(rng), u(rng));
            }
            spline.set_boundary(head, tail);
            Eigen::Matrix3Xd q(3, m - 1);
            Eigen::VectorXd T(m);
            for (int i = 0; i < m - 1; ++i) {
                q.col(i) = Eigen::Vector3d(u(rng), u(rng), u(rng));
            }
            for (int i = 0; i < m; ++i) {
                T(i) = ut(rng);
            }
            spline.update(q, T);
            const auto traj = spline.trajectory();

            for (int k = 0; k < s; ++k) {
                CHECK((traj.pieces.front().derivative(0.0, k) - head.col(k)).norm() <=
                      1e-9 * std::max(1.0, head.col(k).norm()));
                CHECK((traj.pieces.back().derivative(T(m - 1), k) - tail.col(k)).norm() <=
                      1e-9 * std::max(1.0, tail.col(k).norm()));
            }
            for (int i = 0; i + 1 < m; ++i) {
                const Eigen::Vector3d end = traj.pieces[i].derivative(T(i), 0);
                CHECK((end - q.col(i)).norm() <= 1e-9 * std::max(1.0, q.col(i).norm()));
                for (int k = 0; k <= 2 * s - 2; ++k) {
                    const Eigen::Vector3d left = traj.pieces[i].derivative(T(i), k);
                    const Eigen::Vector3d right = traj.pieces[i + 1].derivative(0.0, k);
                    CHECK((left - right).norm() <=
                          1e-9 * std::max(1.0, left.norm()));
                }
            }
        }
    }

    TEST_CASE("coefficients equal the constrained least-squares minimizer") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        std::uniform_real_distribution<double> ut(0.5, 2.0);
        for (int s : {2, 3, 4}) {
            const int m = 4;
            traj::MincoSpline spline(s, m);
            Eigen::Matrix3Xd head(3, s), tail(3, s);
            for (int k = 0; k < s; ++k) {
                head.col(k) = Eigen::Vector3d(u(rng), u(rng), u(rng));
                tail.col(k) = Eigen::Vector3d(u(rng), u(rng), u(rng));
            }
            spline.set_boundary(head, tail);
            Eigen::Matrix3Xd q(3, m - 1);
            Eigen::VectorXd T(m);
            for (int i = 0; i < m - 1; ++i) {
                q.col(i) = Eigen::Vector3d(u(rng), u(rng), u(rng));
            }
            for (int i = 0; i < m; ++i) {
                T(i) = ut(rng);
            }
            spline.update(q, T);
            const auto& c = spline.coefficients();
            for (int axis = 0; axis < 3; ++axis) {
                Eigen::MatrixXd c_mat;
                Eigen::VectorXd rhs;
                variational_constraints(s, T, head.row(axis).transpose(),
                                        tail.row(axis).transpose(),
                                        q.row(axis).transpose(), c_mat, rhs);
                const Eigen::VectorXd direct = kkt_minimizer(s, T, c_mat, rhs);
                const Eigen::VectorXd mine = c.col(axis);
                CHECK((direct - mine).norm() <=
                      1e-6 * std::max(1.0, mine.norm()));
            }
        }
    }

    TEST_CASE("energy matches dense quadrature") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(-1.5, 1.5);
        const int s = 4, m = 3;
        traj::MincoSpline spline(s, m);
        Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, s);
        Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, s);
        head.col(0) = Eigen::Vector3d(0, 0, 1);
        tail.col(0) = Eigen::Vector3d(4, 1, 1);
        spline.set_boundary(head, tail);
        Eigen::Matrix3Xd q(3, m - 1);
        q.col(0) = Eigen::Vector3d(1.5, u(rng), 1.0);
        q.col(1) = Eigen::Vector3d(3.0, u(rng), 1.2);
        Eigen::VectorXd T(m);
        T << 0.8, 1.1, 0.9;
        spline.update(q, T);

        const auto traj = spline.trajectory();
        double numeric = 0.0;
        const int steps = 20000;
        for (int i = 0; i < m; ++i) {
            const double h = T(i) / steps;
            for (int j = 0; j < steps; ++j) {
                numeric +=
                    h * traj.pieces[i].derivative((j + 0.5) * h, s).squaredNorm();
            }
        }
        CHECK(spline.energy() == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_SUITE("trajopt_gradient") {
    TEST_CASE("analytic gradient matches central differences") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> n01;
        for (int trial = 0; trial < 10; ++trial) {
            const int m = 3 + static_cast<int>(rng() % 3);
            auto cor = line_corridor(m, rng);
            traj::OptimizerConfig cfg;
            cfg.v_max = 5.0;
            cfg.a_max = 10.0;
            const Eigen::Vector3d p0 = cor[0].center;
            const Eigen::Vector3d pg = cor[m - 1].center;
            Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, cfg.spline_order);
            Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, cfg.spline_order);
            head.col(0) = p0;
            head.col(1) = Eigen::Vector3d(0.5, 0.1, 0.0);
            tail.col(0) = pg;
            auto st = traj::default_initialization(cor, p0, pg, cfg.v_max);
            for (int i = 0; i < st.tau.size(); ++i) {
                st.tau(i) += 0.1 * n01(rng);
            }
            for (int i = 0; i < st.q.cols(); ++i) {
                st.q.col(i) += 0.15 * Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
            }
            traj::TrajOptProblem prob(cor, head, tail, cfg);
            Eigen::VectorXd x = prob.pack(st);
            Eigen::VectorXd g(x.size());
            prob.cost(x, g);
            const double h = 1e-6;
            Eigen::VectorXd gfd(x.size());
            Eigen::VectorXd scratch(x.size());
            for (int i = 0; i < x.size(); ++i) {
                Eigen::VectorXd xp = x, xm = x;
                xp(i) += h;
                xm(i) -= h;
                gfd(i) = (prob.cost(xp, scratch) - prob.cost(xm, scratch)) /
                         (2.0 * h);
            }
            const double scale = std::max(1.0, g.lpNorm<Eigen::Infinity>());
            CHECK((g - gfd).lpNorm<Eigen::Infinity>() / scale <= 1e-5);
        }
    }
}

TEST_SUITE("optimize") {
    TEST_CASE("default initialization lands waypoints in the overlaps") {
        std::mt19937_64 rng(29);
        for (int trial = 0; trial < 10; ++trial) {
            auto cor = line_corridor(5, rng);
            const auto st = traj::default_initialization(
                cor, cor[0].center, cor[4].center, 5.0);
            REQUIRE(st.q.cols() == 4);
            for (int i = 0; i < 4; ++i) {
                const Eigen::Vector3d p = st.q.col(i);
                CHECK(cor[i].contains(p));
                CHECK(cor[i + 1].contains(p));
            }
            for (int i = 0; i < st.tau.size(); ++i) {
                CHECK(std::isfinite(st.tau(i)));
            }
        }
    }

    TEST_CASE("optimizer reduces cost and satisfies limits on a line corridor") {
        std::mt19937_64 rng(31);
        auto cor = line_corridor(5, rng);
        traj::OptimizerConfig cfg;
        cfg.v_max = 5.0;
        cfg.a_max = 10.0;
        const Eigen::Vector3d p0 = cor[0].center;
        const Eigen::Vector3d pg = cor[4].center;
        Eigen::Matrix3Xd head = Eigen::Matrix3Xd::Zero(3, cfg.spline_order);
        Eigen::Matrix3Xd tail = Eigen::Matrix3Xd::Zero(3, cfg.spline_order);
        head.col(0) = p0;
        tail.col(0) = pg;
        const auto init = traj::default_initialization(cor, p0, pg, cfg.v_max);

        traj::TrajOptProblem prob(cor, head, tail, cfg);
        Eigen::VectorXd g0(prob.variable_count());
        const double initial_cost = prob.cost(prob.pack(init), g0);

        const auto res = traj::optimize(cor, head, tail, init, cfg);
        REQUIRE(res.ok);
        CHECK(res.cost <= initial_cost + 1e-9);
        CHECK(res.trajectory.piece_count() == 5);

        const auto rep = traj::validate(res.trajectory, cor, cfg.v_max,
                                        cfg.a_max, 0.05, 0.01);
        CHECK(rep.speed_ok);
        CHECK(rep.accel_ok);
        CHECK(rep.corridor_ok);
    }
}
