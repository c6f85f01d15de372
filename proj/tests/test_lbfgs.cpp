#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "scp/opt/lbfgs.hpp"

using namespace scp;

TEST_SUITE("lbfgs") {
    TEST_CASE("convex quadratic reaches the analytic minimizer") {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n01;
        const int n = 12;
        Eigen::MatrixXd a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = n01(rng);
            }
        }
        const Eigen::MatrixXd h =
            a.transpose() * a + Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd target(n);
        for (int i = 0; i < n; ++i) {
            target(i) = n01(rng);
        }

        opt::LbfgsConfig cfg;
        cfg.grad_tolerance = 1e-10;
        cfg.max_iterations = 300;
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        const auto res = opt::minimize(
            [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
                const Eigen::VectorXd d = v - target;
                g = h * d;
                return 0.5 * d.dot(g);
            },
            x, cfg);

        CHECK(res.status == opt::LbfgsStatus::converged);
        CHECK((x - target).norm() <= 1e-6);
        CHECK(res.cost <= 1e-12);
    }

    TEST_CASE("Rosenbrock valley") {
        opt::LbfgsConfig cfg;
        cfg.grad_tolerance = 1e-10;
        cfg.max_iterations = 2000;
        Eigen::VectorXd x(2);
        x << -1.2, 1.0;
        const auto res = opt::minimize(
            [](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
                const double a = 1.0 - v(0);
                const double b = v(1) - v(0) * v(0);
                g.resize(2);
                g(0) = -2.0 * a - 400.0 * v(0) * b;
                g(1) = 200.0 * b;
                return a * a + 100.0 * b * b;
            },
            x, cfg);

        CHECK(res.status == opt::LbfgsStatus::converged);
        CHECK(std::abs(x(0) - 1.0) <= 1e-5);
        CHECK(std::abs(x(1) - 1.0) <= 1e-5);
        CHECK(res.iterations < cfg.max_iterations);
    }

    TEST_CASE("retreats from non-finite regions") {
        // Pull toward x = 5 but poison everything past x = 2: the line search
        // must back off and the result must stay finite and inside the valid
        // half-space.
        opt::LbfgsConfig cfg;
        cfg.max_iterations = 100;
        Eigen::VectorXd x(1);
        x << 0.0;
        const auto res = opt::minimize(
            [](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
                g.resize(1);
                if (v(0) > 2.0) {
                    g(0) = std::numeric_limits<double>::quiet_NaN();
                    return std::numeric_limits<double>::quiet_NaN();
                }
                g(0) = 2.0 * (v(0) - 5.0);
                return (v(0) - 5.0) * (v(0) - 5.0);
            },
            x, cfg);

        CHECK(std::isfinite(res.cost));
        CHECK(std::isfinite(x(0)));
        CHECK(x(0) <= 2.0 + 1e-9);
        CHECK(res.cost <= 25.0);  // no worse than the start
    }

    TEST_CASE("stationary start converges immediately") {
        opt::LbfgsConfig cfg;
        Eigen::VectorXd x(3);
        x << 1.0, -2.0, 0.5;
        const Eigen::VectorXd x0 = x;
        const auto res = opt::minimize(
            [&](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
                const Eigen::VectorXd d = v - x0;
                g = 2.0 * d;
                return d.squaredNorm();
            },
            x, cfg);

        CHECK(res.status == opt::LbfgsStatus::converged);
        CHECK(res.iterations <= 1);
        CHECK((x - x0).norm() == 0.0);
    }

    TEST_CASE("nonsmooth stall still returns the best visited point") {
        // |x| defeats the Wolfe conditions near the kink; whatever the exit
        // status, the reported point must be the best one seen.
        opt::LbfgsConfig cfg;
        cfg.grad_tolerance = 1e-14;
        cfg.max_iterations = 200;
        Eigen::VectorXd x(1);
        x << 3.0;
        const auto res = opt::minimize(
            [](const Eigen::VectorXd& v, Eigen::VectorXd& g) {
                g.resize(1);
                g(0) = v(0) >= 0.0 ? 1.0 : -1.0;
                return std::abs(v(0));
            },
            x, cfg);

        CHECK(std::isfinite(res.cost));
        CHECK(res.cost <= 3.0);
        CHECK(res.cost == doctest::Approx(std::abs(x(0))));
    }
}
