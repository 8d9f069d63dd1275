#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diskbeam/params.hpp"

namespace diskbeam {

enum class ProfileKind { Linear, Power, ExpType, Tabulated };

/// Growth profile of the boundary damping near s = 0. It induces the convex
/// transform x -> sqrt(x) * f0(sqrt(x)) used by the decay analysis; that
/// transform is strictly convex on (0, r^2].
struct GrowthProfile {
    ProfileKind kind = ProfileKind::Linear;
    double c = 1.0;  ///< scale coefficient, > 0
    double p = 1.0;  ///< power exponent, >= 1 (Power kind)
    double r = 1.0;  ///< convexity radius, in (0, 1]
    /// Samples (s, f0(s)) on s >= 0 for Tabulated, strictly increasing.
    std::vector<std::pair<double, double>> points;

    /// f0(s) for s >= 0. Catalog profiles continue linearly beyond s = 1 so
    /// that f0 is strictly increasing on [0, inf).
    double f0(double s) const;
    /// Inverse of f0 on [0, inf), by closed form or monotone bisection.
    double f0_inverse(double u) const;

    static GrowthProfile linear(double c, double r = 1.0);
    static GrowthProfile power(double c, double p, double r = 1.0);
    static GrowthProfile exp_type(double r = 0.4);
};

enum class DampingKind { Linear, Power, ExpType, Tabulated };

/// The nonlinear moment feedback f. Catalog laws are odd and continued
/// linearly for |s| >= 1:
///   Linear   f(s) = c s
///   Power    f(s) = sign(s) c |s|^p on |s| <= 1, c s beyond
///   ExpType  f(s) = sign(s) (1/|s|) exp(-1/s^2) on 0 < |s| <= 1, e^-1 s beyond
///   Tabulated: piecewise-linear through user samples, end-slope continuation.
struct DampingSpec {
    DampingKind kind = DampingKind::Linear;
    double c = 1.0;
    double p = 3.0;
    std::vector<std::pair<double, double>> points;

    double value(double s) const;
    /// One-sided derivative where f has corners; used only to accelerate the
    /// scalar Newton solve (bisection safeguards correctness).
    double slope(double s) const;
};

enum class TorqueKind { Linear };

/// The torque feedback gamma. Only sector-compliant laws are admitted
/// (gamma(x) x >= 0 and |gamma(x)| >= K |x|).
struct TorqueSpec {
    TorqueKind kind = TorqueKind::Linear;
    double K = 1.0;

    double value(double x) const;
    double slope(double x) const;
};

struct FeedbackLaw {
    DampingSpec damping;
    TorqueSpec torque;
    /// Growth profile attached to the damping (auto-derived for catalog laws).
    std::optional<GrowthProfile> profile;
    /// Linear-growth bounds of f for |s| >= 1: c1 |s| <= |f(s)| <= c2 |s|.
    double c1 = 0.0;
    double c2 = 0.0;

    double damping_value(double s) const { return damping.value(s); }
    double damping_slope(double s) const { return damping.slope(s); }
    double torque_value(double x) const { return torque.value(x); }
    double torque_slope(double x) const { return torque.slope(x); }
};

/// Builds a law from its specs, deriving the default growth profile and the
/// linear-growth constants c1, c2. A profile override replaces the default.
FeedbackLaw make_feedback_law(const DampingSpec& damping, const TorqueSpec& torque,
                              std::optional<GrowthProfile> profile_override = std::nullopt);

enum class FeedbackChannel { Damping, Torque };

/// Evaluates f(s) or gamma(s).
double eval_feedback(const FeedbackLaw& law, FeedbackChannel which, double s);

struct HypothesisReport {
    std::vector<CheckItem> checks;
    bool all_passed = true;

    const CheckItem* find(const std::string& name) const;
};

/// Verifies the standing hypotheses on a sample grid: monotonicity of f with
/// f(0) = 0, the growth sandwich f0(|s|) <= |f(s)| <= f0^-1(|s|) on |s| <= 1,
/// the linear bounds for |s| >= 1, the sector condition on gamma, and
/// convexity of the induced transform on (0, r^2]. The grid must span at
/// least [-10, 10] and contain points inside (0, 1) and beyond 1.
HypothesisReport check_hypotheses(const FeedbackLaw& law, const std::vector<double>& sample_grid);

/// Default sample grid for check_hypotheses: uniform on [-10, 10].
std::vector<double> default_hypothesis_grid();

} // namespace diskbeam
