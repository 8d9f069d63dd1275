#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "diskbeam/errors.hpp"
#include "diskbeam/feedback.hpp"
#include "diskbeam/params.hpp"

using namespace diskbeam;

TEST_CASE("parameter validation against the angular-velocity bound") {
    PhysicalParams p;
    p.EI = 1.0;
    p.rho = 1.0;
    p.Id = 1.0;

    p.varpi = 2.9;
    auto rep = validate_params(p);
    CHECK(rep.admissible);
    CHECK(p.angular_bound() == doctest::Approx(3.0));

    p.varpi = 3.0;  // strict inequality
    CHECK_FALSE(validate_params(p).admissible);

    p.EI = 2.0;
    p.rho = 0.5;
    p.varpi = 5.9;
    CHECK(validate_params(p).admissible);
    CHECK(p.angular_bound() == doctest::Approx(6.0));

    p.EI = -1.0;
    CHECK_FALSE(validate_params(p).admissible);
}

TEST_CASE("admissibility is monotone in |varpi|") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> pos(0.1, 5.0), vel(-8.0, 8.0);
    for (int it = 0; it < 500; ++it) {
        PhysicalParams p;
        p.EI = pos(rng);
        p.rho = pos(rng);
        p.Id = pos(rng);
        p.varpi = vel(rng);
        const double v2 = vel(rng);
        if (std::abs(v2) > std::abs(p.varpi)) continue;
        PhysicalParams q = p;
        q.varpi = v2;
        if (validate_params(p).admissible) CHECK(validate_params(q).admissible);
    }
}

TEST_CASE("feedback catalog evaluation") {
    const FeedbackLaw lin = make_feedback_law({DampingKind::Linear, 2.0}, {});
    CHECK(eval_feedback(lin, FeedbackChannel::Damping, 0.5) == doctest::Approx(1.0));

    DampingSpec pw;
    pw.kind = DampingKind::Power;
    pw.c = 1.0;
    pw.p = 3.0;
    const FeedbackLaw cubic = make_feedback_law(pw, {});
    CHECK(eval_feedback(cubic, FeedbackChannel::Damping, 0.5) == doctest::Approx(0.125));
    CHECK(eval_feedback(cubic, FeedbackChannel::Damping, 2.0) == doctest::Approx(2.0));

    DampingSpec ex;
    ex.kind = DampingKind::ExpType;
    const FeedbackLaw expl = make_feedback_law(ex, {});
    for (const FeedbackLaw* law : {&lin, &cubic, &expl})
        CHECK(eval_feedback(*law, FeedbackChannel::Damping, 0.0) == 0.0);

    TorqueSpec tq;
    tq.K = 0.5;
    const FeedbackLaw with_torque = make_feedback_law({DampingKind::Linear, 1.0}, tq);
    CHECK(eval_feedback(with_torque, FeedbackChannel::Torque, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("catalog laws are odd") {
    DampingSpec pw;
    pw.kind = DampingKind::Power;
    pw.c = 0.7;
    pw.p = 2.0;
    DampingSpec ex;
    ex.kind = DampingKind::ExpType;
    const FeedbackLaw laws[] = {make_feedback_law({DampingKind::Linear, 1.3}, {}),
                                make_feedback_law(pw, {}), make_feedback_law(ex, {})};
    for (const auto& law : laws)
        for (double s : {0.05, 0.3, 0.77, 1.0, 1.5, 4.0, 9.0}) {
            // negation must be exact for the twin-run symmetry guarantees
            CHECK(law.damping_value(-s) == -law.damping_value(s));
        }
}

TEST_CASE("law construction rejects bad specs") {
    CHECK_THROWS_AS(make_feedback_law({DampingKind::Power, 0.0, 3.0}, {}), ConfigError);
    CHECK_THROWS_AS(make_feedback_law({DampingKind::Power, 1.0, 0.5}, {}), ConfigError);
    TorqueSpec bad;
    bad.K = 0.0;
    CHECK_THROWS_AS(make_feedback_law({DampingKind::Linear, 1.0}, bad), ConfigError);
}

TEST_CASE("hypothesis checks: catalog laws pass") {
    const auto grid = default_hypothesis_grid();

    const auto lin = check_hypotheses(make_feedback_law({DampingKind::Linear, 1.0}, {}), grid);
    CHECK(lin.all_passed);

    DampingSpec pw;
    pw.kind = DampingKind::Power;
    pw.c = 1.0;
    pw.p = 3.0;
    const auto cubic = check_hypotheses(make_feedback_law(pw, {}), grid);
    CHECK(cubic.all_passed);

    DampingSpec ex;
    ex.kind = DampingKind::ExpType;
    const auto expl = check_hypotheses(make_feedback_law(ex, {}), grid);
    CHECK(expl.all_passed);

    // sector condition holds with equality for gamma(x) = K x
    TorqueSpec tq;
    tq.K = 0.5;
    const auto sec = check_hypotheses(make_feedback_law({DampingKind::Linear, 1.0}, tq), grid);
    CHECK(sec.find("H3_sector")->passed);
}

TEST_CASE("hypothesis checks: decreasing damping fails H.I") {
    DampingSpec dec;
    dec.kind = DampingKind::Tabulated;
    dec.points = {{-10.0, 10.0}, {0.0, 0.0}, {10.0, -10.0}};
    const auto rep = check_hypotheses(make_feedback_law(dec, {}), default_hypothesis_grid());
    CHECK_FALSE(rep.all_passed);
    CHECK_FALSE(rep.find("H1_monotone_zero")->passed);
}

TEST_CASE("hypothesis checks: convexity radius matters for the flat-start law") {
    DampingSpec ex;
    ex.kind = DampingKind::ExpType;
    // default radius r = 0.4 keeps the transform strictly convex
    const auto ok = check_hypotheses(make_feedback_law(ex, {}), default_hypothesis_grid());
    CHECK(ok.find("H_convexity")->passed);
    // the transform's curvature changes sign at x = 1/2, so r = 0.9 fails
    const auto bad = check_hypotheses(
        make_feedback_law(ex, {}, GrowthProfile::exp_type(0.9)), default_hypothesis_grid());
    CHECK_FALSE(bad.find("H_convexity")->passed);
}

TEST_CASE("hypothesis checks: grid preconditions") {
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 1.0}, {});
    CHECK_THROWS_AS(check_hypotheses(law, {}), ConfigError);
    std::vector<double> no_inner;
    for (int i = -10; i <= 10; ++i) no_inner.push_back(static_cast<double>(i));
    CHECK_THROWS_AS(check_hypotheses(law, no_inner), ConfigError);
    CHECK_THROWS_AS(check_hypotheses(law, {-1.0, 0.5, 1.0, 2.0}), ConfigError);
}

TEST_CASE("power profile transform is exact and convex") {
    DampingSpec pw;
    pw.kind = DampingKind::Power;
    pw.c = 1.0;
    pw.p = 3.0;
    const FeedbackLaw law = make_feedback_law(pw, {});
    REQUIRE(law.profile.has_value());
    const auto& prof = *law.profile;
    for (double x : {0.04, 0.16, 0.36, 0.64, 1.0}) {
        const double H = std::sqrt(x) * prof.f0(std::sqrt(x));
        CHECK(H == doctest::Approx(x * x).epsilon(1e-13));
    }
    // sampled second differences nonnegative on (0, r^2]
    for (int j = 1; j < 30; ++j) {
        const double x = j / 32.0, d = 1.0 / 64.0;
        const double dd = std::sqrt(x + d) * prof.f0(std::sqrt(x + d)) -
                          2.0 * std::sqrt(x) * prof.f0(std::sqrt(x)) +
                          std::sqrt(x - d) * prof.f0(std::sqrt(x - d));
        CHECK(dd >= -1e-14);
    }
}

TEST_CASE("growth profile inverse round trips") {
    const GrowthProfile profiles[] = {GrowthProfile::linear(0.7), GrowthProfile::power(1.0, 3.0),
                                      GrowthProfile::exp_type()};
    for (const auto& prof : profiles)
        for (double s : {0.1, 0.4, 0.9, 2.0}) {
            const double u = prof.f0(s);
            CHECK(prof.f0_inverse(u) == doctest::Approx(s).epsilon(1e-9));
        }
}

TEST_CASE("linear sandwich uses the reciprocal profile scale") {
    // f = 2 s admits f0 = s/2: f0(|s|) <= |f| <= f0^-1(|s|) on |s| <= 1
    const FeedbackLaw law = make_feedback_law({DampingKind::Linear, 2.0}, {});
    REQUIRE(law.profile.has_value());
    CHECK(law.profile->c == doctest::Approx(0.5));
    const auto rep = check_hypotheses(law, default_hypothesis_grid());
    CHECK(rep.find("H2_sandwich")->passed);
    CHECK(rep.find("H2_linear_bounds")->passed);
}
