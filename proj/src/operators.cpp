#include "diskbeam/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

// 4-point Gauss-Legendre on [0, 1]: exact for polynomials up to degree 7.
constexpr std::array<double, 4> kGaussXi = {
    0.069431844202973714,
    0.33000947820757187,
    0.66999052179242813,
    0.93056815579702629,
};
constexpr std::array<double, 4> kGaussW = {
    0.17392742256872692,
    0.32607257743127307,
    0.32607257743127307,
    0.17392742256872692,
};

struct HermiteShape {
    std::array<double, 4> N;   // values
    std::array<double, 4> dN;  // d/dx
};

HermiteShape hermite_at(double xi, double h) {
    HermiteShape s;
    const double xi2 = xi * xi, xi3 = xi2 * xi;
    s.N = {1.0 - 3.0 * xi2 + 2.0 * xi3, h * (xi - 2.0 * xi2 + xi3), 3.0 * xi2 - 2.0 * xi3,
           h * (-xi2 + xi3)};
    s.dN = {(-6.0 * xi + 6.0 * xi2) / h, 1.0 - 4.0 * xi + 3.0 * xi2, (6.0 * xi - 6.0 * xi2) / h,
            -2.0 * xi + 3.0 * xi2};
    return s;
}

// element dof order: (value_l, slope_l, value_r, slope_r); element e spans
// nodes e-1, e, so its global free indices are 2e-4+a (negative for the two
// clamped dofs of node 0).
void scatter_element(BandedSymmetric& A, int elem, const std::array<std::array<double, 4>, 4>& ke) {
    for (int a = 0; a < 4; ++a) {
        const int ga = 2 * elem - 4 + a;
        if (ga < 0) continue;
        for (int b = 0; b <= a; ++b) {
            const int gb = 2 * elem - 4 + b;
            if (gb < 0) continue;
            A.at(ga, gb) += ke[a][b];
        }
    }
}

std::array<std::array<double, 4>, 4> element_bending(double h) {
    const double h2 = h * h, h3 = h2 * h;
    return {{{12.0 / h3, 6.0 / h2, -12.0 / h3, 6.0 / h2},
             {6.0 / h2, 4.0 / h, -6.0 / h2, 2.0 / h},
             {-12.0 / h3, -6.0 / h2, 12.0 / h3, -6.0 / h2},
             {6.0 / h2, 2.0 / h, -6.0 / h2, 4.0 / h}}};
}

std::array<std::array<double, 4>, 4> element_mass(double h) {
    const double h2 = h * h;
    const double k = h / 420.0;
    return {{{156.0 * k, 22.0 * h * k, 54.0 * k, -13.0 * h * k},
             {22.0 * h * k, 4.0 * h2 * k, 13.0 * h * k, -3.0 * h2 * k},
             {54.0 * k, 13.0 * h * k, 156.0 * k, -22.0 * h * k},
             {-13.0 * h * k, -3.0 * h2 * k, -22.0 * h * k, 4.0 * h2 * k}}};
}

} // namespace

BandedSymmetric Operators::stiffness(double omega) const {
    return banded_combine(params.EI, Kb, -params.rho * omega * omega, M0);
}

double Operators::norm_form(const Eigen::VectorXd& y) const {
    return params.EI * Kb.quad(y) - params.rho * params.varpi * params.varpi * M0.quad(y);
}

Operators assemble(const PhysicalParams& params, const Grid& grid) {
    if (grid.n_elements < 4) throw ConfigError("grid requires n_elements >= 4");
    const auto rep = validate_params(params);
    if (!rep.admissible) throw ConfigError("assemble: inadmissible physical parameters");

    Operators ops;
    ops.grid = grid;
    ops.params = params;
    const int n = grid.n_free();
    ops.M0 = BandedSymmetric(n, 3);
    ops.Kb = BandedSymmetric(n, 3);
    const double h = grid.h();
    const auto ke = element_bending(h);
    const auto me = element_mass(h);
    for (int e = 1; e <= grid.n_elements; ++e) {
        scatter_element(ops.Kb, e, ke);
        scatter_element(ops.M0, e, me);
    }
    ops.M = banded_combine(params.rho, ops.M0, 0.0, ops.M0);
    ops.tip_value_dof = n - 2;
    ops.tip_slope_dof = n - 1;
    return ops;
}

Eigen::VectorXd interpolate(const Grid& grid, const std::function<double(double)>& value,
                            const std::function<double(double)>& slope) {
    Eigen::VectorXd y(grid.n_free());
    for (int i = 1; i <= grid.n_elements; ++i) {
        const double x = grid.node(i);
        y[2 * i - 2] = value(x);
        y[2 * i - 1] = slope(x);
    }
    return y;
}

Eigen::VectorXd load_vector(const Grid& grid, const std::function<double(double)>& q) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(grid.n_free());
    const double h = grid.h();
    for (int e = 1; e <= grid.n_elements; ++e) {
        const double x0 = grid.node(e - 1);
        for (int g = 0; g < 4; ++g) {
            const double xi = kGaussXi[g];
            const double w = kGaussW[g] * h;
            const auto s = hermite_at(xi, h);
            const double qv = q(x0 + xi * h);
            for (int a = 0; a < 4; ++a) {
                const int ga = 2 * e - 4 + a;
                if (ga < 0) continue;
                f[ga] += w * qv * s.N[a];
            }
        }
    }
    return f;
}

Eigen::VectorXd static_solve(const Operators& ops, const Eigen::VectorXd& load) {
    BandedSymmetric K = banded_combine(ops.params.EI, ops.Kb, 0.0, ops.Kb);
    return BandedCholesky::factor(K).solve(load);
}

std::vector<double> beam_modes(const Operators& ops, int count) {
    if (count < 1 || count > ops.grid.n_free())
        throw ConfigError("beam_modes: count must be in [1, dof count]");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(ops.Kb.dense(), ops.M0.dense());
    if (es.info() != Eigen::Success) throw NumericError("beam_modes: eigensolver failed");
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = es.eigenvalues()[i];
    return out;
}

double coercivity_min_eig(const Operators& ops, const PhysicalParams& params) {
    const BandedSymmetric K = banded_combine(params.EI, ops.Kb,
                                             -params.rho * params.varpi * params.varpi, ops.M0);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K.dense(), ops.M0.dense());
    if (es.info() != Eigen::Success) throw NumericError("coercivity_min_eig: eigensolver failed");
    return es.eigenvalues()[0];
}

double coercivity_min_eig(const Operators& ops) { return coercivity_min_eig(ops, ops.params); }

std::vector<double> clamped_free_roots(int count) {
    std::vector<double> roots;
    auto g = [](double b) { return std::cos(b) * std::cosh(b) + 1.0; };
    double lo = 1e-6;
    while (static_cast<int>(roots.size()) < count) {
        // roots are near (2k-1) pi/2; scan unit intervals for sign changes
        double hi = lo + 0.5;
        while (g(lo) * g(hi) > 0.0) {
            lo = hi;
            hi += 0.5;
        }
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
        }
        roots.push_back(0.5 * (lo + hi));
        lo = roots.back() + 0.5;
    }
    return roots;
}

double mode_shape(double beta, double x) {
    const double sigma = (std::cosh(beta) + std::cos(beta)) / (std::sinh(beta) + std::sin(beta));
    return std::cosh(beta * x) - std::cos(beta * x) -
           sigma * (std::sinh(beta * x) - std::sin(beta * x));
}

double mode_shape_deriv(double beta, double x) {
    const double sigma = (std::cosh(beta) + std::cos(beta)) / (std::sinh(beta) + std::sin(beta));
    return beta * (std::sinh(beta * x) + std::sin(beta * x) -
                   sigma * (std::cosh(beta * x) - std::cos(beta * x)));
}

} // namespace diskbeam
