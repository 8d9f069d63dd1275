#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "diskbeam/decay.hpp"
#include "diskbeam/integrator.hpp"

namespace diskbeam {

/// Scalar functionals of one sampled state.
struct FunctionalSample {
    double t = 0.0;
    double E = 0.0;                   ///< energy in the state norm (uses varpi)
    double E0 = 0.0;                  ///< E plus the energy of (v, a)
    double F = 0.0;                   ///< multiplier 2 int x y_t y_x dx
    double V = 0.0;                   ///< Lyapunov value (beam energy + disk term)
    double omega = 0.0;
    double tip_slope_velocity = 0.0;  ///< y_tx(1, t)
    double boundary_flux = 0.0;       ///< EI * y_tx(1,t) * f(y_tx(1,t))
    double torque_flux = 0.0;         ///< (omega - varpi) * gamma(omega - varpi)
};

/// 1/2 [ v^T M v + EI y^T Kb y - rho varpi^2 y^T M0 y ].
double energy_E(const BeamState& s, const Operators& ops, const PhysicalParams& params);

/// E(y, v) + E(v, a): the same quadratic form applied to the differentiated
/// state, with the acceleration taken from the state (consistent by invariant).
double energy_E0(const BeamState& s, const Operators& ops, const PhysicalParams& params);

/// 2 int_0^1 x y_t y_x dx, exact element-level Gauss integration.
double functional_F(const BeamState& s, const Operators& ops);

/// Lyapunov value with explicit EI, rho weights:
/// E + (omega - varpi)^2 (Id + rho int y^2) / 2. Reduces to the unit-parameter
/// formula when EI = rho = 1.
double lyapunov_V(const BeamState& s, const Operators& ops, const PhysicalParams& params);

FunctionalSample evaluate_sample(const BeamState& s, const Operators& ops,
                                 const PhysicalParams& params, const FeedbackLaw& law);

std::vector<FunctionalSample> evaluate_series(const Trace& trace, const Operators& ops,
                                              const PhysicalParams& params, const FeedbackLaw& law);

/// Discrete residuals of the dissipation identities between consecutive
/// samples: residual_E = dE/dt + midpoint boundary flux, residual_V adds the
/// torque flux. Maxima are normalized by E(0) + 1.
struct DissipationResiduals {
    std::vector<double> t_mid;
    std::vector<double> residual_E;
    std::vector<double> residual_V;
    double max_normalized_E = 0.0;
    double max_normalized_V = 0.0;
};

DissipationResiduals dissipation_residuals(const std::vector<FunctionalSample>& samples);

/// Proof-shadowing diagnostic R = H'(eps0 E0/E0_init) E0 + delta E, where H'
/// is the derivative of the profile's convex transform. Not applicable when
/// E0_init = 0.
std::optional<double> diagnostic_R(double E0, double E, const DecayCalculus& calc,
                                   double delta, double E0_init);

/// Derived series E1 = E0 + eps * F with eps chosen so |eps F(0)| <= E0(0)/2.
std::vector<double> derived_E1(const std::vector<FunctionalSample>& samples);
double default_E1_eps(const std::vector<FunctionalSample>& samples);

} // namespace diskbeam
