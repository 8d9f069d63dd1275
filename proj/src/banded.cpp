#include "diskbeam/banded.hpp"

#include <cmath>

#include "diskbeam/errors.hpp"

namespace diskbeam {

double& BandedSymmetric::at(int i, int j) {
    if (j > i) std::swap(i, j);
    return entry(i - j, i);
}

double BandedSymmetric::at(int i, int j) const {
    if (j > i) std::swap(i, j);
    return i - j > hbw ? 0.0 : entry(i - j, i);
}

Eigen::VectorXd BandedSymmetric::multiply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
        double acc = entry(0, i) * x[i];
        const int lo = std::max(0, i - hbw);
        for (int j = lo; j < i; ++j) {
            const double aij = entry(i - j, i);
            acc += aij * x[j];
            y[j] += aij * x[i];
        }
        y[i] += acc;
    }
    return y;
}

Eigen::MatrixXd BandedSymmetric::dense() const {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d <= std::min(hbw, i); ++d) {
            D(i, i - d) = entry(d, i);
            D(i - d, i) = entry(d, i);
        }
    return D;
}

BandedSymmetric banded_combine(double alpha, const BandedSymmetric& A, double beta,
                               const BandedSymmetric& B) {
    if (A.n != B.n || A.hbw != B.hbw) throw NumericError("banded_combine: shape mismatch");
    BandedSymmetric C(A.n, A.hbw);
    for (size_t k = 0; k < C.a.size(); ++k) C.a[k] = alpha * A.a[k] + beta * B.a[k];
    return C;
}

BandedCholesky BandedCholesky::factor(const BandedSymmetric& A) {
    BandedCholesky ch;
    ch.n = A.n;
    ch.hbw = A.hbw;
    ch.l = A.a;
    auto L = [&ch](int d, int i) -> double& { return ch.l[static_cast<size_t>(d) * ch.n + i]; };

    for (int j = 0; j < ch.n; ++j) {
        double diag = L(0, j);
        for (int k = std::max(0, j - ch.hbw); k < j; ++k) {
            const double ljk = L(j - k, j);
            diag -= ljk * ljk;
        }
        if (!(diag > 0.0)) throw NumericError("banded Cholesky: matrix not positive definite");
        const double ljj = std::sqrt(diag);
        L(0, j) = ljj;
        for (int i = j + 1; i <= std::min(ch.n - 1, j + ch.hbw); ++i) {
            double v = L(i - j, i);
            for (int k = std::max(0, i - ch.hbw); k < j; ++k)
                v -= L(i - k, i) * L(j - k, j);
            L(i - j, i) = v / ljj;
        }
    }
    return ch;
}

Eigen::VectorXd BandedCholesky::solve(const Eigen::VectorXd& rhs) const {
    auto L = [this](int d, int i) { return l[static_cast<size_t>(d) * n + i]; };
    Eigen::VectorXd x = rhs;
    // forward: L z = rhs
    for (int i = 0; i < n; ++i) {
        double v = x[i];
        for (int k = std::max(0, i - hbw); k < i; ++k) v -= L(i - k, i) * x[k];
        x[i] = v / L(0, i);
    }
    // backward: L^T x = z
    for (int i = n - 1; i >= 0; --i) {
        double v = x[i];
        for (int k = i + 1; k <= std::min(n - 1, i + hbw); ++k) v -= L(k - i, k) * x[k];
        x[i] = v / L(0, i);
    }
    return x;
}

} // namespace diskbeam
