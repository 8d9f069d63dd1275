#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diskbeam/feedback.hpp"
#include "diskbeam/operators.hpp"

namespace diskbeam {

enum class Mode { Subsystem, Coupled };

/// State at a time instant. The acceleration always satisfies the
/// semi-discrete equation at (y, v, omega) to solver tolerance.
struct BeamState {
    double t = 0.0;
    Eigen::VectorXd y;
    Eigen::VectorXd v;
    Eigen::VectorXd a;
    double omega = 0.0;
};

struct StepControls {
    double newton_rel_tol = 1e-14;  ///< scalar boundary solve, relative to |b|
    int newton_max_iter = 100;
    double stagger_rel_tol = 1e-12; ///< omega sub-iteration
    int stagger_max_iter = 25;
    int max_halvings = 4;
};

struct StepFailure {
    double t = 0.0;
    std::string what;
    std::vector<double> residual_history;
};

struct Trace {
    std::vector<BeamState> states;  ///< sampled states, strictly increasing t
    bool failed = false;
    StepFailure failure;

    const BeamState& front() const { return states.front(); }
    const BeamState& back() const { return states.back(); }
};

struct SimOptions {
    Mode mode = Mode::Subsystem;
    double dt = 1e-3;
    double horizon = 50.0;
    int sample_every = 10;
    StepControls controls;
};

/// Solves M a = -(EI Kb - rho omega^2 M0) y - EI f(v[tip]) e_tip for a.
Eigen::VectorXd consistent_acceleration(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                        double omega, const Operators& ops, const FeedbackLaw& law);

/// Residual norm of the semi-discrete equation at the state (diagnostic).
double state_residual(const BeamState& s, const Operators& ops, const FeedbackLaw& law);

/// One average-acceleration Newmark step. The scalar boundary nonlinearity is
/// solved by safeguarded Newton on the tip slope (bisection fallback); in
/// Coupled mode omega advances simultaneously by the trapezoidal rule with a
/// staggered sub-iteration, dt-halving on non-convergence. Returns a failure
/// record instead of mutating the state when the step cannot be completed.
std::optional<StepFailure> step(BeamState& state, double dt, Mode mode, const Operators& ops,
                                const FeedbackLaw& law, const StepControls& controls = {});

/// Integrates from (y0, v0, omega0) to the horizon with fixed dt, sampling
/// every sample_every steps (state 0 and the final state are always sampled).
/// Step failures abort the run; the partial trace is preserved.
Trace simulate(const Operators& ops, const FeedbackLaw& law, const SimOptions& opts,
               const Eigen::VectorXd& y0, const Eigen::VectorXd& v0, double omega0);

} // namespace diskbeam
