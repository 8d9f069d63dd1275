#include "diskbeam/functionals.hpp"

#include <array>
#include <cmath>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

// 4-point Gauss-Legendre on [0, 1] (degree-7 exactness covers the degree-6
// integrand of the multiplier functional).
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

/// Element-level Gauss integrals of u^2, (u'')^2 and w^2 for free-dof vectors
/// u, w. Squared integrands avoid the cancellation noise of the assembled
/// stiffness form, so energy drifts remain measurable near roundoff.
struct StateIntegrals {
    double u_sq = 0.0;
    double u_curv_sq = 0.0;
    double w_sq = 0.0;
};

StateIntegrals element_integrals(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                                 const Grid& grid) {
    StateIntegrals out;
    const double h = grid.h();
    for (int e = 1; e <= grid.n_elements; ++e) {
        std::array<double, 4> ue{}, we{};
        for (int a = 0; a < 4; ++a) {
            const int ga = 2 * e - 4 + a;
            if (ga < 0) continue;
            ue[a] = u[ga];
            we[a] = w[ga];
        }
        for (int g = 0; g < 4; ++g) {
            const double xi = kGaussXi[g];
            const double wq = kGaussW[g] * h;
            const double xi2 = xi * xi, xi3 = xi2 * xi;
            const std::array<double, 4> N = {1.0 - 3.0 * xi2 + 2.0 * xi3,
                                             h * (xi - 2.0 * xi2 + xi3), 3.0 * xi2 - 2.0 * xi3,
                                             h * (-xi2 + xi3)};
            const std::array<double, 4> ddN = {(-6.0 + 12.0 * xi) / (h * h),
                                               (-4.0 + 6.0 * xi) / h, (6.0 - 12.0 * xi) / (h * h),
                                               (-2.0 + 6.0 * xi) / h};
            double uv = 0.0, uc = 0.0, wv = 0.0;
            for (int a = 0; a < 4; ++a) {
                uv += ue[a] * N[a];
                uc += ue[a] * ddN[a];
                wv += we[a] * N[a];
            }
            out.u_sq += wq * uv * uv;
            out.u_curv_sq += wq * uc * uc;
            out.w_sq += wq * wv * wv;
        }
    }
    return out;
}

/// 1/2 int [ rho w^2 + EI (u'')^2 - rho varpi^2 u^2 ]: the state-norm
/// quadratic form on a (displacement-like, velocity-like) pair, integrated
/// exactly at the element level.
double half_norm_form(const Eigen::VectorXd& u, const Eigen::VectorXd& w, const Operators& ops,
                      const PhysicalParams& params) {
    const StateIntegrals q = element_integrals(u, w, ops.grid);
    return 0.5 * (params.rho * q.w_sq + params.EI * q.u_curv_sq -
                  params.rho * params.varpi * params.varpi * q.u_sq);
}

} // namespace

double energy_E(const BeamState& s, const Operators& ops, const PhysicalParams& params) {
    return half_norm_form(s.y, s.v, ops, params);
}

double energy_E0(const BeamState& s, const Operators& ops, const PhysicalParams& params) {
    return half_norm_form(s.y, s.v, ops, params) + half_norm_form(s.v, s.a, ops, params);
}

double functional_F(const BeamState& s, const Operators& ops) {
    const Grid& grid = ops.grid;
    const double h = grid.h();
    double acc = 0.0;
    for (int e = 1; e <= grid.n_elements; ++e) {
        const double x0 = grid.node(e - 1);
        // element dofs (value_l, slope_l, value_r, slope_r); clamped dofs are 0
        std::array<double, 4> ye{}, ve{};
        for (int a = 0; a < 4; ++a) {
            const int ga = 2 * e - 4 + a;
            if (ga < 0) continue;
            ye[a] = s.y[ga];
            ve[a] = s.v[ga];
        }
        for (int g = 0; g < 4; ++g) {
            const double xi = kGaussXi[g];
            const double xi2 = xi * xi, xi3 = xi2 * xi;
            const std::array<double, 4> N = {1.0 - 3.0 * xi2 + 2.0 * xi3,
                                             h * (xi - 2.0 * xi2 + xi3), 3.0 * xi2 - 2.0 * xi3,
                                             h * (-xi2 + xi3)};
            const std::array<double, 4> dN = {(-6.0 * xi + 6.0 * xi2) / h,
                                              1.0 - 4.0 * xi + 3.0 * xi2,
                                              (6.0 * xi - 6.0 * xi2) / h, -2.0 * xi + 3.0 * xi2};
            double vt = 0.0, yx = 0.0;
            for (int a = 0; a < 4; ++a) {
                vt += ve[a] * N[a];
                yx += ye[a] * dN[a];
            }
            acc += kGaussW[g] * h * (x0 + xi * h) * vt * yx;
        }
    }
    return 2.0 * acc;
}

double lyapunov_V(const BeamState& s, const Operators& ops, const PhysicalParams& params) {
    const StateIntegrals q = element_integrals(s.y, s.v, ops.grid);
    const double beam = 0.5 * (params.rho * q.w_sq + params.EI * q.u_curv_sq -
                               params.rho * params.varpi * params.varpi * q.u_sq);
    const double gap = s.omega - params.varpi;
    return beam + 0.5 * gap * gap * (params.Id + params.rho * q.u_sq);
}

FunctionalSample evaluate_sample(const BeamState& s, const Operators& ops,
                                 const PhysicalParams& params, const FeedbackLaw& law) {
    FunctionalSample out;
    out.t = s.t;
    out.E = energy_E(s, ops, params);
    out.E0 = energy_E0(s, ops, params);
    out.F = functional_F(s, ops);
    out.V = lyapunov_V(s, ops, params);
    out.omega = s.omega;
    out.tip_slope_velocity = ops.tip_slope(s.v);
    out.boundary_flux =
        params.EI * out.tip_slope_velocity * law.damping_value(out.tip_slope_velocity);
    const double gap = s.omega - params.varpi;
    out.torque_flux = gap * law.torque_value(gap);
    return out;
}

std::vector<FunctionalSample> evaluate_series(const Trace& trace, const Operators& ops,
                                              const PhysicalParams& params,
                                              const FeedbackLaw& law) {
    std::vector<FunctionalSample> out;
    out.reserve(trace.states.size());
    for (const auto& s : trace.states) out.push_back(evaluate_sample(s, ops, params, law));
    return out;
}

DissipationResiduals dissipation_residuals(const std::vector<FunctionalSample>& samples) {
    if (samples.size() < 2)
        throw ConfigError("dissipation_residuals: need at least two samples");
    DissipationResiduals out;
    const double scale = samples.front().E + 1.0;
    out.t_mid.reserve(samples.size() - 1);
    for (size_t i = 0; i + 1 < samples.size(); ++i) {
        const auto& s0 = samples[i];
        const auto& s1 = samples[i + 1];
        const double dt = s1.t - s0.t;
        const double rE = (s1.E - s0.E) / dt + 0.5 * (s0.boundary_flux + s1.boundary_flux);
        const double rV = (s1.V - s0.V) / dt + 0.5 * (s0.boundary_flux + s1.boundary_flux +
                                                      s0.torque_flux + s1.torque_flux);
        out.t_mid.push_back(0.5 * (s0.t + s1.t));
        out.residual_E.push_back(rE);
        out.residual_V.push_back(rV);
        out.max_normalized_E = std::max(out.max_normalized_E, std::abs(rE) / scale);
        out.max_normalized_V = std::max(out.max_normalized_V, std::abs(rV) / scale);
    }
    return out;
}

std::optional<double> diagnostic_R(double E0, double E, const DecayCalculus& calc, double delta,
                                   double E0_init) {
    if (E0_init == 0.0) return std::nullopt;
    return calc.transform_deriv(calc.eps0() * E0 / E0_init) * E0 + delta * E;
}

double default_E1_eps(const std::vector<FunctionalSample>& samples) {
    if (samples.empty()) return 1.0;
    const double e0 = samples.front().E0;
    const double f0 = std::abs(samples.front().F);
    if (e0 <= 0.0 || f0 == 0.0) return 1.0;
    return 0.5 * e0 / f0;
}

std::vector<double> derived_E1(const std::vector<FunctionalSample>& samples) {
    const double eps = default_E1_eps(samples);
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.E0 + eps * s.F);
    return out;
}

} // namespace diskbeam
