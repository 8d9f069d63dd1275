#pragma once

#include <functional>
#include <optional>

#include "diskbeam/feedback.hpp"

namespace diskbeam {

/// Convexity calculus of a damping growth profile: the convex transform
/// H(x) = sqrt(x) f0(sqrt(x)), its derivative, the comparison rate
/// H2(t) = t H'(eps0 t), the decay clock H1(t) = int_t^1 1/H2, its inverse,
/// and the Legendre conjugate of H. The clock maps trace decay onto time:
/// a trace obeying E' <= -k1 H2(E/E(0)) satisfies E(t)/E(0) <= H1^-1(k1 t + k2).
class DecayCalculus {
public:
    /// eps0 must lie in (0, r^2); pass eps0 <= 0 for the default 0.5 r^2.
    DecayCalculus(GrowthProfile profile, double eps0 = -1.0);

    const GrowthProfile& profile() const { return profile_; }
    double eps0() const { return eps0_; }
    /// True for profiles whose transform is affine (linear f0): the conjugate
    /// and the Young inequality are not applicable.
    bool affine_transform() const {
        return profile_.kind == ProfileKind::Linear ||
               (profile_.kind == ProfileKind::Power && profile_.p == 1.0);
    }

    /// H(x), x > 0.
    double transform(double x) const;
    /// H'(x): analytic for catalog profiles, central difference for tabulated.
    double transform_deriv(double x) const;
    /// H2(t) = t H'(eps0 t), t in (0, 1].
    double rate(double t) const;

    /// H1(t) = int_t^1 1/H2(s) ds, closed form for linear/power profiles,
    /// adaptive quadrature otherwise. Strictly decreasing, H1(1) = 0.
    double clock(double t) const;
    /// Definitional quadrature route, regardless of closed forms.
    double clock_quadrature(double t) const;
    /// H1^-1(tau) for tau >= 0 (monotone bracketing + safeguarded Newton).
    double clock_inverse(double tau) const;

    /// (H')^-1(s) for s in (0, H'(r^2)); nullopt for affine transforms.
    std::optional<double> deriv_inverse(double s) const;
    /// Legendre conjugate H*(s) = s (H')^-1(s) - H((H')^-1(s)).
    std::optional<double> conjugate(double s) const;
    /// Young margin H*(A) + H(B) - A B >= 0 for A in (0, H'(r^2)), B in (0, r^2];
    /// nullopt for affine transforms. Throws DataError outside the domain.
    std::optional<double> young_margin(double A, double B) const;

private:
    GrowthProfile profile_;
    double eps0_ = 0.0;
};

/// Adaptive Simpson quadrature with absolute tolerance (deterministic).
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 48);

} // namespace diskbeam
