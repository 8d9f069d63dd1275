#include "diskbeam/integrator.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "diskbeam/banded.hpp"
#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

/// Factored effective system of one (dt, omega) level:
/// S = M + (dt^2/4)(EI Kb - rho omega^2 M0).
struct Effective {
    BandedSymmetric Keff;
    BandedCholesky chol;
    Eigen::VectorXd w;  ///< S^-1 e_tip
    double gw = 0.0;    ///< e_tip^T S^-1 e_tip > 0
};

Effective build_effective(const Operators& ops, double dt, double omega) {
    Effective eff;
    eff.Keff = ops.stiffness(omega);
    const BandedSymmetric S = banded_combine(1.0, ops.M, dt * dt / 4.0, eff.Keff);
    eff.chol = BandedCholesky::factor(S);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(ops.grid.n_free());
    g[ops.tip_slope_dof] = 1.0;
    eff.w = eff.chol.solve(g);
    eff.gw = eff.w[ops.tip_slope_dof];
    return eff;
}

struct StepperCache {
    double dt = std::numeric_limits<double>::quiet_NaN();
    double omega = std::numeric_limits<double>::quiet_NaN();
    Effective eff;

    const Effective& get(const Operators& ops, double dt_, double omega_) {
        if (!(dt == dt_) || !(omega == omega_)) {
            eff = build_effective(ops, dt_, omega_);
            dt = dt_;
            omega = omega_;
        }
        return eff;
    }
};

struct ScalarRoot {
    double s = 0.0;
    bool ok = false;
    std::vector<double> history;
};

/// Root of phi(s) = s + alpha f(s) - b with alpha > 0 and f non-decreasing,
/// so phi is strictly increasing and the root is bracketed by [min(0,b),
/// max(0,b)]. Safeguarded Newton; bisection keeps the bracket valid through
/// corner points of f. All operations are odd-symmetric in (b -> -b).
ScalarRoot solve_tip_equation(const FeedbackLaw& law, double alpha, double b,
                              const StepControls& c) {
    ScalarRoot out;
    double lo = std::min(0.0, b), hi = std::max(0.0, b);
    double s = b;
    const double tol = c.newton_rel_tol * (1.0 + std::abs(b));
    for (int it = 0; it < c.newton_max_iter; ++it) {
        const double r = s + alpha * law.damping_value(s) - b;
        out.history.push_back(r);
        if (std::abs(r) <= tol) {
            out.s = s;
            out.ok = true;
            return out;
        }
        if (r > 0.0) hi = s; else lo = s;
        const double d = 1.0 + alpha * law.damping_slope(s);
        double next = s - r / d;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (next == s) {  // bracket exhausted at machine precision
            out.s = s;
            out.ok = true;
            return out;
        }
        s = next;
    }
    out.s = s;
    out.ok = false;
    return out;
}

struct BeamSub {
    Eigen::VectorXd y, v, a;
    double tip_s = 0.0;
    bool ok = false;
    std::vector<double> history;
};

/// One average-acceleration Newmark update at a fixed omega level. The
/// boundary nonlinearity reduces to the scalar tip-slope equation through the
/// rank-one structure of the feedback force.
BeamSub newmark_substep(const BeamState& st, double dt, const Operators& ops,
                        const FeedbackLaw& law, const Effective& eff, const StepControls& c) {
    BeamSub sub;
    const double EI = ops.params.EI;
    const Eigen::VectorXd ytil = st.y + dt * st.v + (dt * dt / 4.0) * st.a;
    const Eigen::VectorXd vtil = st.v + (dt / 2.0) * st.a;
    const Eigen::VectorXd a0 = eff.chol.solve(-eff.Keff.multiply(ytil));
    const double b = vtil[ops.tip_slope_dof] + (dt / 2.0) * a0[ops.tip_slope_dof];
    const double alpha = (dt / 2.0) * EI * eff.gw;

    const ScalarRoot root = solve_tip_equation(law, alpha, b, c);
    sub.history = root.history;
    if (!root.ok) return sub;

    sub.tip_s = root.s;
    const double force = EI * law.damping_value(root.s);
    sub.a = a0 - force * eff.w;
    sub.v = vtil + (dt / 2.0) * sub.a;
    sub.y = ytil + (dt * dt / 4.0) * sub.a;
    sub.ok = true;
    return sub;
}

double omega_rhs(const Operators& ops, const FeedbackLaw& law, const Eigen::VectorXd& y,
                 const Eigen::VectorXd& v, double omega) {
    const auto& pp = ops.params;
    const double p = y.dot(ops.M0.multiply(v));
    const double q = y.dot(ops.M0.multiply(y));
    return (-law.torque_value(omega - pp.varpi) - 2.0 * pp.rho * omega * p) /
           (pp.Id + pp.rho * q);
}

struct OmegaRoot {
    double omega = 0.0;
    bool ok = false;
};

/// Trapezoidal update of the disk equation at fixed beam state (y, v):
/// psi(w) = w - omega_n - dt/2 (Omega_n + Omega(w; y, v)) = 0.
OmegaRoot solve_omega_trapezoid(const Operators& ops, const FeedbackLaw& law, double omega_n,
                                double Omega_n, double dt, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& v) {
    const auto& pp = ops.params;
    const double p = y.dot(ops.M0.multiply(v));
    const double q = y.dot(ops.M0.multiply(y));
    const double denom = pp.Id + pp.rho * q;
    auto psi = [&](double w) {
        const double Om = (-law.torque_value(w - pp.varpi) - 2.0 * pp.rho * w * p) / denom;
        return w - omega_n - (dt / 2.0) * (Omega_n + Om);
    };
    auto dpsi = [&](double w) {
        return 1.0 + (dt / 2.0) * (law.torque_slope(w - pp.varpi) + 2.0 * pp.rho * p) / denom;
    };

    // bracket around the explicit predictor
    double center = omega_n + dt * Omega_n;
    double delta = std::max(1.0, std::abs(center)) * 1e-3;
    double lo = center - delta, hi = center + delta;
    int guard = 0;
    while (psi(lo) > 0.0 && guard++ < 200) { delta *= 2.0; lo = center - delta; }
    guard = 0;
    while (psi(hi) < 0.0 && guard++ < 200) { delta *= 2.0; hi = center + delta; }
    if (!(psi(lo) <= 0.0) || !(psi(hi) >= 0.0)) return {center, false};

    double w = center;
    const double tol = 1e-14 * (1.0 + std::abs(omega_n));
    for (int it = 0; it < 100; ++it) {
        const double r = psi(w);
        if (std::abs(r) <= tol) return {w, true};
        if (r > 0.0) hi = w; else lo = w;
        const double d = dpsi(w);
        double next = d > 0.0 ? w - r / d : 0.5 * (lo + hi);
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        if (next == w) return {w, true};
        w = next;
    }
    return {w, false};
}

std::optional<StepFailure> advance(BeamState& st, double dt, Mode mode, const Operators& ops,
                                   const FeedbackLaw& law, const StepControls& c,
                                   StepperCache& cache, int depth);

std::optional<StepFailure> coupled_advance(BeamState& st, double dt, const Operators& ops,
                                           const FeedbackLaw& law, const StepControls& c,
                                           StepperCache& cache, int depth) {
    const double Omega_n = omega_rhs(ops, law, st.y, st.v, st.omega);
    double omega_g = st.omega + dt * Omega_n;
    std::vector<double> history;
    history.push_back(std::abs(dt * Omega_n) / (1.0 + std::abs(st.omega)));
    for (int it = 0; it < c.stagger_max_iter; ++it) {
        BeamSub sub;
        try {
            const Effective& eff = cache.get(ops, dt, omega_g);
            sub = newmark_substep(st, dt, ops, law, eff, c);
        } catch (const NumericError&) {
            // an extreme omega iterate can make the effective matrix
            // indefinite; treat it like non-convergence and fall to halving
            break;
        }
        if (!sub.ok) {
            history.insert(history.end(), sub.history.begin(), sub.history.end());
            break;
        }
        const OmegaRoot w = solve_omega_trapezoid(ops, law, st.omega, Omega_n, dt, sub.y, sub.v);
        if (!w.ok) break;
        const double rel = std::abs(w.omega - omega_g) / (1.0 + std::abs(w.omega));
        history.push_back(rel);
        omega_g = w.omega;
        if (rel <= c.stagger_rel_tol) {
            st.t += dt;
            st.y = sub.y;
            st.v = sub.v;
            st.a = sub.a;
            st.omega = w.omega;
            return std::nullopt;
        }
    }
    if (depth < c.max_halvings) {
        // halve the step and take two sub-steps
        auto fail = advance(st, dt / 2.0, Mode::Coupled, ops, law, c, cache, depth + 1);
        if (fail) return fail;
        return advance(st, dt / 2.0, Mode::Coupled, ops, law, c, cache, depth + 1);
    }
    StepFailure f;
    f.t = st.t;
    f.what = "coupled step: staggered iteration did not converge";
    f.residual_history = history;
    return f;
}

std::optional<StepFailure> advance(BeamState& st, double dt, Mode mode, const Operators& ops,
                                   const FeedbackLaw& law, const StepControls& c,
                                   StepperCache& cache, int depth) {
    if (mode == Mode::Coupled) return coupled_advance(st, dt, ops, law, c, cache, depth);

    const Effective& eff = cache.get(ops, dt, st.omega);
    const BeamSub sub = newmark_substep(st, dt, ops, law, eff, c);
    if (!sub.ok) {
        if (depth < c.max_halvings) {
            auto fail = advance(st, dt / 2.0, mode, ops, law, c, cache, depth + 1);
            if (fail) return fail;
            return advance(st, dt / 2.0, mode, ops, law, c, cache, depth + 1);
        }
        StepFailure f;
        f.t = st.t;
        f.what = "subsystem step: scalar boundary solve did not converge";
        f.residual_history = sub.history;
        return f;
    }
    st.t += dt;
    st.y = sub.y;
    st.v = sub.v;
    st.a = sub.a;
    return std::nullopt;
}

} // namespace

Eigen::VectorXd consistent_acceleration(const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                        double omega, const Operators& ops,
                                        const FeedbackLaw& law) {
    const BandedSymmetric Keff = ops.stiffness(omega);
    Eigen::VectorXd rhs = -Keff.multiply(y);
    rhs[ops.tip_slope_dof] -= ops.params.EI * law.damping_value(v[ops.tip_slope_dof]);
    return BandedCholesky::factor(ops.M).solve(rhs);
}

double state_residual(const BeamState& s, const Operators& ops, const FeedbackLaw& law) {
    const BandedSymmetric Keff = ops.stiffness(s.omega);
    Eigen::VectorXd r = ops.M.multiply(s.a) + Keff.multiply(s.y);
    r[ops.tip_slope_dof] += ops.params.EI * law.damping_value(s.v[ops.tip_slope_dof]);
    const double scale = 1.0 + ops.M.multiply(s.a).lpNorm<Eigen::Infinity>() +
                         Keff.multiply(s.y).lpNorm<Eigen::Infinity>();
    return r.lpNorm<Eigen::Infinity>() / scale;
}

std::optional<StepFailure> step(BeamState& state, double dt, Mode mode, const Operators& ops,
                                const FeedbackLaw& law, const StepControls& controls) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
    StepperCache cache;
    return advance(state, dt, mode, ops, law, controls, cache, 0);
}

Trace simulate(const Operators& ops, const FeedbackLaw& law, const SimOptions& opts,
               const Eigen::VectorXd& y0, const Eigen::VectorXd& v0, double omega0) {
    if (!(opts.dt > 0.0)) throw ConfigError("simulate: dt must be positive");
    const long n_steps = std::lround(opts.horizon / opts.dt);
    if (n_steps < 1) throw ConfigError("simulate: horizon shorter than one step");
    if (opts.sample_every < 1) throw ConfigError("simulate: sample_every must be >= 1");

    BeamState st;
    st.t = 0.0;
    st.y = y0;
    st.v = v0;
    st.omega = opts.mode == Mode::Subsystem ? ops.params.varpi : omega0;
    st.a = consistent_acceleration(st.y, st.v, st.omega, ops, law);

    Trace trace;
    trace.states.reserve(static_cast<size_t>(n_steps / opts.sample_every) + 2);
    trace.states.push_back(st);

    StepperCache cache;
    for (long n = 1; n <= n_steps; ++n) {
        auto fail = advance(st, opts.dt, opts.mode, ops, law, opts.controls, cache, 0);
        if (fail) {
            trace.failed = true;
            trace.failure = *fail;
            break;
        }
        if (n % opts.sample_every == 0 || n == n_steps) trace.states.push_back(st);
    }
    return trace;
}

} // namespace diskbeam
