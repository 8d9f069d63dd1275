#pragma once

#include <vector>

#include <Eigen/Dense>

namespace diskbeam {

/// Symmetric banded matrix, lower triangle stored by diagonals:
/// entry(d, i) = A(i, i-d) for d = 0..hbw, i = d..n-1.
struct BandedSymmetric {
    int n = 0;
    int hbw = 0;
    std::vector<double> a;

    BandedSymmetric() = default;
    BandedSymmetric(int n_, int hbw_) : n(n_), hbw(hbw_), a(static_cast<size_t>(hbw_ + 1) * n_, 0.0) {}

    double& entry(int d, int i) { return a[static_cast<size_t>(d) * n + i]; }
    double entry(int d, int i) const { return a[static_cast<size_t>(d) * n + i]; }

    /// A(i, j) with |i - j| <= hbw; symmetric access.
    double& at(int i, int j);
    double at(int i, int j) const;

    Eigen::VectorXd multiply(const Eigen::VectorXd& x) const;
    double quad(const Eigen::VectorXd& x) const { return x.dot(multiply(x)); }
    Eigen::MatrixXd dense() const;
};

/// alpha*A + beta*B for same-shaped banded matrices.
BandedSymmetric banded_combine(double alpha, const BandedSymmetric& A, double beta, const BandedSymmetric& B);

/// In-band Cholesky factorization A = L L^T; throws NumericError when the
/// matrix is not positive definite.
struct BandedCholesky {
    int n = 0;
    int hbw = 0;
    std::vector<double> l;

    static BandedCholesky factor(const BandedSymmetric& A);
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
};

} // namespace diskbeam
