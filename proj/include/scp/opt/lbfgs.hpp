#pragma once

#include <Eigen/Core>
#include <functional>

namespace scp::opt {

struct LbfgsConfig {
    int memory = 8;
    int max_iterations = 200;
    // Stop when ||g||_inf <= grad_tolerance * max(1, |f|): dimensionless, so
    // heavily weighted objectives converge at the same relative accuracy.
    double grad_tolerance = 1e-4;
    double wolfe_c1 = 1e-4;        // sufficient decrease
    double wolfe_c2 = 0.9;         // curvature
    int max_line_search_evals = 60;

    bool valid() const {
        return memory >= 1 && max_iterations >= 1 && grad_tolerance > 0.0 &&
               0.0 < wolfe_c1 && wolfe_c1 < wolfe_c2 && wolfe_c2 < 1.0;
    }
};

enum class LbfgsStatus {
    converged,          // gradient tolerance reached
    max_iterations,     // iteration budget exhausted (best iterate kept)
    line_search_failed  // no Wolfe step found (best iterate kept)
};

struct LbfgsResult {
    LbfgsStatus status = LbfgsStatus::converged;
    double cost = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

// f evaluates the objective and writes the gradient. Returning a non-finite
// value marks the point infeasible; the line search retreats from it.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Limited-memory BFGS with a strong-Wolfe line search. `x` holds the initial
// guess and is overwritten with the best iterate seen (monotone in f even
// when the search aborts).
LbfgsResult minimize(const Objective& f, Eigen::VectorXd& x,
                     const LbfgsConfig& cfg = {});

}  // namespace scp::opt
