#include "diskbeam/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

/// Diagonal similarity balancing with powers of two (exact in floating
/// point); equalizes row/column 1-norms before the nonsymmetric solve.
void balance_in_place(Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    bool converged = false;
    int sweeps = 0;
    while (!converged && sweeps++ < 50) {
        converged = true;
        for (int i = 0; i < n; ++i) {
            double c = A.col(i).lpNorm<1>() - std::abs(A(i, i));
            double r = A.row(i).lpNorm<1>() - std::abs(A(i, i));
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r < 0.95 * s) {
                converged = false;
                A.col(i) *= f;
                A.row(i) /= f;
            }
        }
    }
}

} // namespace

SpectralResult spectral_abscissa(const Operators& ops, double linear_gain) {
    const int n = ops.grid.n_free();
    const BandedSymmetric Keff = ops.stiffness(ops.params.varpi);
    const BandedCholesky mchol = BandedCholesky::factor(ops.M);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    A.topRightCorner(n, n).setIdentity();
    // bottom-left: -M^-1 Keff, column by column through the banded factor
    Eigen::VectorXd col(n);
    for (int j = 0; j < n; ++j) {
        col.setZero();
        for (int i = std::max(0, j - Keff.hbw); i <= std::min(n - 1, j + Keff.hbw); ++i)
            col[i] = Keff.at(i, j);
        A.block(n, j, n, 1) = -mchol.solve(col);
    }
    // bottom-right: -EI gain (M^-1 e_tip) e_tip^T
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g[ops.tip_slope_dof] = 1.0;
    const Eigen::VectorXd mg = mchol.solve(g);
    A.block(n, n, n, n).col(ops.tip_slope_dof) = -ops.params.EI * linear_gain * mg;

    balance_in_place(A);
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
    if (es.info() != Eigen::Success) throw NumericError("spectral_abscissa: eigensolver failed");

    SpectralResult out;
    out.eigenvalues.reserve(2 * n);
    for (int i = 0; i < 2 * n; ++i) out.eigenvalues.push_back(es.eigenvalues()[i]);
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
              });
    out.max_real_part = out.eigenvalues.back().real();
    for (const auto& ev : out.eigenvalues)
        out.max_real_part = std::max(out.max_real_part, ev.real());
    return out;
}

} // namespace diskbeam
