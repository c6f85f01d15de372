#pragma once

namespace scp::traj {

// One-sided C^2 penalty ramp with smoothing width mu > 0:
//   x <= 0      -> 0
//   0 < x < mu  -> (mu - x/2) (x/mu)^3
//   x >= mu     -> x - mu/2
// Value, first, and second derivative are continuous at both seams.
struct Barrier {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline Barrier barrier(double x, double mu) {
    if (x <= 0.0) {
        return {};
    }
    if (x < mu) {
        const double mu3 = mu * mu * mu;
        return {(mu - 0.5 * x) * x * x * x / mu3,
                (3.0 * mu - 2.0 * x) * x * x / mu3,
                6.0 * x * (mu - x) / mu3};
    }
    return {x - 0.5 * mu, 1.0, 0.0};
}

}  // namespace scp::traj
