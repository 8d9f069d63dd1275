#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "diskbeam/errors.hpp"
#include "diskbeam/functionals.hpp"
#include "diskbeam/integrator.hpp"
#include "diskbeam/operators.hpp"

using namespace diskbeam;

namespace {

Operators ops64(double varpi = 0.0) {
    PhysicalParams p;
    p.varpi = varpi;
    p.omega0 = varpi;
    return assemble(p, Grid{64});
}

BeamState make_state(const Operators& ops, Eigen::VectorXd y, Eigen::VectorXd v, double omega) {
    BeamState s;
    s.y = std::move(y);
    s.v = std::move(v);
    s.omega = omega;
    s.a = consistent_acceleration(s.y, s.v, omega,
                                  ops, make_feedback_law({DampingKind::Linear, 0.0}, {}));
    return s;
}

Eigen::VectorXd first_mode(const Grid& grid, double amp) {
    const double beta = clamped_free_roots(1)[0];
    const double tip = mode_shape(beta, 1.0);
    return interpolate(
        grid, [&](double x) { return amp * mode_shape(beta, x) / tip; },
        [&](double x) { return amp * mode_shape_deriv(beta, x) / tip; });
}

} // namespace

TEST_CASE("energy of canonical states") {
    const Operators ops = ops64(0.0);
    const int n = ops.grid.n_free();

    const BeamState zero = make_state(ops, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0);
    CHECK(energy_E(zero, ops, ops.params) == 0.0);
    CHECK(energy_E0(zero, ops, ops.params) == 0.0);
    CHECK(functional_F(zero, ops) == 0.0);
    CHECK(lyapunov_V(zero, ops, ops.params) == 0.0);

    // interpolant of x^2 with zero velocity: E = (1/2) int (y'')^2 = 2
    const auto y2 = interpolate(ops.grid, [](double x) { return x * x; },
                                [](double x) { return 2.0 * x; });
    const BeamState bent = make_state(ops, y2, Eigen::VectorXd::Zero(n), 0.0);
    CHECK(energy_E(bent, ops, ops.params) == doctest::Approx(2.0).epsilon(1e-13));

    // kinetic-only state scaled so that v^T M v = 6 gives E = 3
    Eigen::VectorXd v = first_mode(ops.grid, 1.0);
    v *= std::sqrt(6.0 / ops.M.quad(v));
    const BeamState moving = make_state(ops, Eigen::VectorXd::Zero(n), v, 0.0);
    CHECK(energy_E(moving, ops, ops.params) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("modified energy decomposes as E plus the differentiated-state form") {
    const Operators ops = ops64(1.5);
    const auto y = first_mode(ops.grid, 0.7);
    const auto v = first_mode(ops.grid, 0.2);
    const BeamState s = make_state(ops, y, v, 1.5);
    BeamState shifted;  // (v, a) as a displacement/velocity pair
    shifted.y = s.v;
    shifted.v = s.a;
    shifted.a = Eigen::VectorXd::Zero(ops.grid.n_free());
    shifted.omega = s.omega;
    const double expected = energy_E(s, ops, ops.params) + energy_E(shifted, ops, ops.params);
    CHECK(energy_E0(s, ops, ops.params) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("multiplier functional is integrated exactly") {
    const Operators ops = ops64(0.0);
    const auto y2 = interpolate(ops.grid, [](double x) { return x * x; },
                                [](double x) { return 2.0 * x; });
    BeamState s;
    s.y = y2;
    s.v = y2;
    s.a = Eigen::VectorXd::Zero(ops.grid.n_free());
    s.omega = 0.0;
    // 2 int x * x^2 * 2x dx = 4/5
    CHECK(functional_F(s, ops) == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("multiplier functional obeys the coarse slope bound") {
    const Operators ops = ops64(0.0);
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.5}, {});
    SimOptions so;
    so.mode = Mode::Subsystem;
    so.dt = 1e-3;
    so.horizon = 2.0;
    so.sample_every = 10;
    const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 0.8),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), 0.0);
    for (const auto& st : tr.states) {
        double slope_max = 0.0;
        for (int i = 1; i < ops.grid.n_free(); i += 2)
            slope_max = std::max(slope_max, std::abs(st.y[i]));
        const double bound = 2.0 / std::sqrt(3.0) * std::sqrt(ops.M0.quad(st.v)) * slope_max;
        CHECK(std::abs(functional_F(st, ops)) <= bound * (1.0 + 1e-9) + 1e-15);
    }
}

TEST_CASE("Lyapunov value reduces to the disk term at beam equilibrium") {
    PhysicalParams p;
    p.varpi = 1.0;
    p.Id = 2.5;
    const Operators ops = assemble(p, Grid{16});
    const int n = ops.grid.n_free();
    const BeamState s = make_state(ops, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 3.0);
    CHECK(lyapunov_V(s, ops, p) == doctest::Approx(0.5 * 2.5 * 4.0).epsilon(1e-14));
}

TEST_CASE("E and V agree when omega equals varpi") {
    const Operators ops = ops64(1.5);
    const auto y = first_mode(ops.grid, 0.6);
    const auto v = interpolate(ops.grid, [](double x) { return x * x * (x - 1.0) * (x - 1.0); },
                               [](double x) { return 2.0 * x * (x - 1.0) * (2.0 * x - 1.0); });
    const BeamState s = make_state(ops, y, v, 1.5);
    CHECK(lyapunov_V(s, ops, ops.params) == energy_E(s, ops, ops.params));
}

TEST_CASE("functionals are invariant under the sign flip") {
    // varpi = 0 keeps the omega^2 coupling even under the mirror, so the
    // full state flip (y, v, omega-varpi) -> -(y, v, omega-varpi) is a symmetry
    PhysicalParams p;
    p.varpi = 0.0;
    p.Id = 2.0;
    const Operators ops = assemble(p, Grid{32});
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.7},
                                              TorqueSpec{TorqueKind::Linear, 0.9});
    const auto y = first_mode(ops.grid, 0.5);
    const auto v = interpolate(ops.grid, [](double x) { return 0.3 * x * x * (x - 1) * (x - 1); },
                               [](double x) { return 0.6 * x * (x - 1) * (2 * x - 1); });
    BeamState a;
    a.y = y;
    a.v = v;
    a.omega = 0.7;
    a.a = consistent_acceleration(a.y, a.v, a.omega, ops, law);
    BeamState b;
    b.y = -y;
    b.v = -v;
    b.omega = -0.7;
    b.a = consistent_acceleration(b.y, b.v, b.omega, ops, law);

    const FunctionalSample sa = evaluate_sample(a, ops, p, law);
    const FunctionalSample sb = evaluate_sample(b, ops, p, law);
    CHECK(sa.E == doctest::Approx(sb.E).epsilon(1e-14));
    CHECK(sa.E0 == doctest::Approx(sb.E0).epsilon(1e-14));
    CHECK(sa.F == doctest::Approx(sb.F).epsilon(1e-14));
    CHECK(sa.V == doctest::Approx(sb.V).epsilon(1e-14));
    CHECK(sa.boundary_flux == doctest::Approx(sb.boundary_flux).epsilon(1e-14));
    CHECK(sa.torque_flux == doctest::Approx(sb.torque_flux).epsilon(1e-14));
}

TEST_CASE("dissipation residuals vanish without damping") {
    // the 1e-10 bound is met where factorization roundoff does not dominate
    // (n = 16); the desk-scale mesh carries an amplified but still tiny floor
    const std::pair<int, double> cases[] = {{16, 1e-10}, {64, 2e-9}};
    for (const auto& [n, tol] : cases) {
        PhysicalParams p;
        p.varpi = 1.0;
        const Operators ops = assemble(p, Grid{n});
        const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.0}, {});
        SimOptions so;
        so.mode = Mode::Subsystem;
        so.dt = 1e-3;
        so.horizon = 5.0;
        so.sample_every = 10;
        const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 1.0),
                                  Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
        const auto samples = evaluate_series(tr, ops, ops.params, law);
        CHECK(dissipation_residuals(samples).max_normalized_E <= tol);
    }
}

TEST_CASE("dissipation residuals are at scheme order for linear damping") {
    const Operators ops = ops64(1.0);
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.5}, {});
    SimOptions so;
    so.mode = Mode::Subsystem;
    so.dt = 1e-3;
    so.horizon = 10.0;
    so.sample_every = 10;
    const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 0.1),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
    const auto samples = evaluate_series(tr, ops, ops.params, law);
    CHECK(dissipation_residuals(samples).max_normalized_E <= 1e-4);
}

TEST_CASE("Lyapunov residual tracks both fluxes along coupled runs") {
    // first-mode data keeps the boundary flux spectrally resolved by the
    // sample cadence; broadband data would alias the flux trapezoid
    PhysicalParams p;
    p.varpi = 1.0;
    p.omega0 = 1.5;
    p.Id = 2.0;
    const Operators ops = assemble(p, Grid{32});
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.3},
                                              TorqueSpec{TorqueKind::Linear, 0.5});
    SimOptions so;
    so.mode = Mode::Coupled;
    so.dt = 1e-3;
    so.horizon = 10.0;
    so.sample_every = 10;
    const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 0.2),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), p.omega0);
    const auto samples = evaluate_series(tr, ops, p, law);
    CHECK(dissipation_residuals(samples).max_normalized_V <= 1e-4);
}

TEST_CASE("residuals need at least two samples") {
    CHECK_THROWS_AS(dissipation_residuals({FunctionalSample{}}), ConfigError);
}

TEST_CASE("proof-shadowing diagnostic") {
    SUBCASE("linear profile gives c E0 + delta E") {
        const DecayCalculus calc(GrowthProfile::linear(2.0), 0.25);
        const auto r = diagnostic_R(3.0, 1.5, calc, 0.1, 10.0);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(2.0 * 3.0 + 0.1 * 1.5).epsilon(1e-14));
    }
    SUBCASE("cubic-growth profile gives 2 eps0 (E0/E00) E0 + delta E") {
        const DecayCalculus calc(GrowthProfile::power(1.0, 3.0), 0.25);
        const auto r = diagnostic_R(3.0, 1.5, calc, 0.1, 10.0);
        REQUIRE(r.has_value());
        CHECK(*r == doctest::Approx(2.0 * 0.25 * 0.3 * 3.0 + 0.15).epsilon(1e-14));
    }
    SUBCASE("undefined at E0_init = 0") {
        const DecayCalculus calc(GrowthProfile::linear(1.0), 0.25);
        CHECK_FALSE(diagnostic_R(1.0, 1.0, calc, 0.1, 0.0).has_value());
    }
    SUBCASE("non-increasing and equivalent to E0 along a damped run") {
        const Operators ops = ops64(1.0);
        DampingSpec pw;
        pw.kind = DampingKind::Power;
        pw.c = 1.0;
        pw.p = 3.0;
        const FeedbackLaw law = make_feedback_law(pw, {});
        SimOptions so;
        so.mode = Mode::Subsystem;
        so.dt = 1e-3;
        so.horizon = 10.0;
        so.sample_every = 10;
        const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 0.4),
                                  Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
        const auto samples = evaluate_series(tr, ops, ops.params, law);
        const DecayCalculus calc(*law.profile);
        const double e00 = samples.front().E0;
        double prev = 1e300;
        double ratio_lo = 1e300, ratio_hi = 0.0;
        for (const auto& s : samples) {
            const auto r = diagnostic_R(s.E0, s.E, calc, 0.5, e00);
            REQUIRE(r.has_value());
            CHECK(*r <= prev + 1e-8 * (e00 + 1.0));
            prev = *r;
            ratio_lo = std::min(ratio_lo, *r / s.E0);
            ratio_hi = std::max(ratio_hi, *r / s.E0);
        }
        // equivalence of R and E0: the sampled ratio stays within positive
        // run-specific bounds
        CHECK(ratio_lo > 0.0);
        CHECK(std::isfinite(ratio_hi));
    }
}

TEST_CASE("derived series E1 stays positive and equivalent to E0") {
    const Operators ops = ops64(1.0);
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 0.5}, {});
    SimOptions so;
    so.mode = Mode::Subsystem;
    so.dt = 1e-3;
    so.horizon = 10.0;
    so.sample_every = 10;
    const Trace tr = simulate(ops, law, so, first_mode(ops.grid, 0.5),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
    const auto samples = evaluate_series(tr, ops, ops.params, law);
    const double eps = default_E1_eps(samples);
    CHECK(std::abs(eps * samples.front().F) <= 0.5 * samples.front().E0 * (1.0 + 1e-12));
    const auto e1 = derived_E1(samples);
    for (size_t i = 0; i < samples.size(); ++i) {
        CHECK(e1[i] >= 0.0);
        CHECK(e1[i] <= 2.0 * samples[i].E0 + eps * std::abs(samples[i].F) + 1e-12);
    }
}

TEST_CASE("modified energy is conserved without dissipation and decays with it") {
    const Operators ops = ops64(1.0);
    SimOptions so;
    so.mode = Mode::Subsystem;
    so.dt = 1e-3;
    so.horizon = 5.0;
    so.sample_every = 10;

    const FeedbackLaw free_law = make_feedback_law({DampingKind::Linear, 0.0}, {});
    const Trace tc = simulate(ops, free_law, so, first_mode(ops.grid, 1.0),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
    const auto cons = evaluate_series(tc, ops, ops.params, free_law);
    const double e00 = cons.front().E0;
    for (const auto& s : cons) CHECK(std::abs(s.E0 - e00) <= 1e-8 * (e00 + 1.0));

    const FeedbackLaw damped = make_feedback_law({DampingKind::Linear, 0.5}, {});
    const Trace td = simulate(ops, damped, so, first_mode(ops.grid, 1.0),
                              Eigen::VectorXd::Zero(ops.grid.n_free()), 1.0);
    const auto diss = evaluate_series(td, ops, ops.params, damped);
    double prev = diss.front().E0;
    for (size_t i = 1; i < diss.size(); ++i) {
        CHECK(diss[i].E0 <= prev + 1e-9 * (diss.front().E0 + 1.0));
        prev = diss[i].E0;
    }
}
