#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "diskbeam/banded.hpp"
#include "diskbeam/params.hpp"

namespace diskbeam {

/// Uniform grid on [0, 1] with cubic Hermite (C^1) elements. Each node
/// carries a (value, slope) dof pair; the clamped end eliminates y(0) and
/// y_x(0), leaving 2*n_elements free dofs. Free dof of node i >= 1:
/// value at 2i-2, slope at 2i-1.
struct Grid {
    int n_elements = 64;

    double h() const { return 1.0 / n_elements; }
    int n_free() const { return 2 * n_elements; }
    double node(int i) const { return static_cast<double>(i) / n_elements; }
};

/// Assembled spatial operators. Kb is the plain bending integral of
/// y_xx v_xx (no EI factor); M0 the unit-weight mass; M = rho * M0. The free
/// end's shear and moment conditions enter as natural boundary terms, so the
/// semi-discrete equation reads
///   M a + (EI Kb - rho omega^2 M0) y + EI f(v[tip_slope]) e_tip_slope = 0.
struct Operators {
    Grid grid;
    PhysicalParams params;
    BandedSymmetric M;
    BandedSymmetric M0;
    BandedSymmetric Kb;
    int tip_value_dof = 0;
    int tip_slope_dof = 0;

    double tip_value(const Eigen::VectorXd& y) const { return y[tip_value_dof]; }
    double tip_slope(const Eigen::VectorXd& y) const { return y[tip_slope_dof]; }

    /// EI*Kb - rho*omega^2*M0.
    BandedSymmetric stiffness(double omega) const;
    /// Quadratic form EI y^T Kb y - rho varpi^2 y^T M0 y of the state norm.
    double norm_form(const Eigen::VectorXd& y) const;
};

/// Assembles mass, bending and coupling matrices with exact element-level
/// integration. Throws ConfigError for inadmissible params or a grid with
/// fewer than 4 elements.
Operators assemble(const PhysicalParams& params, const Grid& grid);

/// Nodal interpolation of an analytic shape (value and slope at each node)
/// onto the free dofs.
Eigen::VectorXd interpolate(const Grid& grid, const std::function<double(double)>& value,
                            const std::function<double(double)>& slope);

/// Consistent load vector of a distributed load q(x), 4-point Gauss per element.
Eigen::VectorXd load_vector(const Grid& grid, const std::function<double(double)>& q);

/// Solves EI*Kb*y = load (varpi = 0 oracle path).
Eigen::VectorXd static_solve(const Operators& ops, const Eigen::VectorXd& load);

/// Smallest `count` eigenvalues of Kb relative to M0 (EI = rho = 1
/// normalization), ascending.
std::vector<double> beam_modes(const Operators& ops, int count);

/// Minimum eigenvalue of (EI*Kb - rho*varpi^2*M0) relative to M0; a positive
/// value certifies discrete coercivity of the state norm.
double coercivity_min_eig(const Operators& ops, const PhysicalParams& params);
double coercivity_min_eig(const Operators& ops);

/// First `count` positive roots of cos(b)*cosh(b) = -1 (clamped-free beam),
/// by bisection. Mode frequencies are beta^2, stiffness eigenvalues beta^4.
std::vector<double> clamped_free_roots(int count);

/// Clamped-free mode shape for root beta, and its spatial derivative.
double mode_shape(double beta, double x);
double mode_shape_deriv(double beta, double x);

} // namespace diskbeam
