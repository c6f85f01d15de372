#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace scp::traj {

// Banded square system stored as in Golub & Van Loan: entry (i, j) lives at
// data[(i - j + upper) * n + j]. Factorization is in-place LU without
// pivoting, which is stable for the spline systems assembled here (every
// diagonal carries a factorial or a positive duration power).
class BandedLU {
public:
    BandedLU() = default;
    BandedLU(int n, int lower, int upper) { resize(n, lower, upper); }

    void resize(int n, int lower, int upper) {
        n_ = n;
        lower_ = lower;
        upper_ = upper;
        data_.assign(static_cast<std::size_t>(n) * (lower + upper + 1), 0.0);
    }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

    int rows() const { return n_; }

    double& operator()(int i, int j) {
        return data_[static_cast<std::size_t>(i - j + upper_) * n_ + j];
    }
    double operator()(int i, int j) const {
        return data_[static_cast<std::size_t>(i - j + upper_) * n_ + j];
    }

    void factorize() {
        for (int k = 0; k + 1 < n_; ++k) {
            const int im = std::min(k + lower_, n_ - 1);
            const double piv = (*this)(k, k);
            for (int i = k + 1; i <= im; ++i) {
                if ((*this)(i, k) != 0.0) {
                    (*this)(i, k) /= piv;
                }
            }
            const int jm = std::min(k + upper_, n_ - 1);
            for (int j = k + 1; j <= jm; ++j) {
                const double ukj = (*this)(k, j);
                if (ukj == 0.0) {
                    continue;
                }
                for (int i = k + 1; i <= im; ++i) {
                    if ((*this)(i, k) != 0.0) {
                        (*this)(i, j) -= (*this)(i, k) * ukj;
                    }
                }
            }
        }
    }

    // Solves A x = b in place; b may have multiple columns.
    template <typename Mat>
    void solve(Mat& b) const {
        for (int j = 0; j < n_; ++j) {
            const int im = std::min(j + lower_, n_ - 1);
            for (int i = j + 1; i <= im; ++i) {
                if ((*this)(i, j) != 0.0) {
                    b.row(i) -= (*this)(i, j) * b.row(j);
                }
            }
        }
        for (int j = n_ - 1; j >= 0; --j) {
            b.row(j) /= (*this)(j, j);
            const int im = std::max(0, j - upper_);
            for (int i = im; i < j; ++i) {
                if ((*this)(i, j) != 0.0) {
                    b.row(i) -= (*this)(i, j) * b.row(j);
                }
            }
        }
    }

    // Solves A^T x = b in place (U^T is lower triangular, L^T unit upper).
    template <typename Mat>
    void solve_adjoint(Mat& b) const {
        for (int j = 0; j < n_; ++j) {
            b.row(j) /= (*this)(j, j);
            const int im = std::min(j + upper_, n_ - 1);
            for (int i = j + 1; i <= im; ++i) {
                if ((*this)(j, i) != 0.0) {
                    b.row(i) -= (*this)(j, i) * b.row(j);
                }
            }
        }
        for (int j = n_ - 1; j >= 0; --j) {
            const int im = std::max(0, j - lower_);
            for (int i = im; i < j; ++i) {
                if ((*this)(j, i) != 0.0) {
                    b.row(i) -= (*this)(j, i) * b.row(j);
                }
            }
        }
    }

private:
    int n_ = 0;
    int lower_ = 0;
    int upper_ = 0;
    std::vector<double> data_;
};

}  // namespace scp::traj
