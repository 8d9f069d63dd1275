#include "diskbeam/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

double interp_table(const std::vector<std::pair<double, double>>& pts, double s) {
    if (pts.size() < 2) throw ConfigError("tabulated function needs at least 2 points");
    if (s <= pts.front().first) {
        const auto& [x0, y0] = pts[0];
        const auto& [x1, y1] = pts[1];
        return y0 + (s - x0) * (y1 - y0) / (x1 - x0);
    }
    if (s >= pts.back().first) {
        const auto& [x0, y0] = pts[pts.size() - 2];
        const auto& [x1, y1] = pts.back();
        return y1 + (s - x1) * (y1 - y0) / (x1 - x0);
    }
    auto it = std::upper_bound(pts.begin(), pts.end(), s,
                               [](double v, const auto& pr) { return v < pr.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (s - x0) * (y1 - y0) / (x1 - x0);
}

double table_slope(const std::vector<std::pair<double, double>>& pts, double s) {
    if (pts.size() < 2) throw ConfigError("tabulated function needs at least 2 points");
    size_t i = 0;
    if (s >= pts.back().first) {
        i = pts.size() - 2;
    } else if (s > pts.front().first) {
        auto it = std::upper_bound(pts.begin(), pts.end(), s,
                                   [](double v, const auto& pr) { return v < pr.first; });
        i = static_cast<size_t>(it - pts.begin()) - 1;
    }
    return (pts[i + 1].second - pts[i].second) / (pts[i + 1].first - pts[i].first);
}

} // namespace

// ---------------------------------------------------------------------------
// GrowthProfile

GrowthProfile GrowthProfile::linear(double c, double r) {
    GrowthProfile g;
    g.kind = ProfileKind::Linear;
    g.c = c;
    g.r = r;
    return g;
}

GrowthProfile GrowthProfile::power(double c, double p, double r) {
    GrowthProfile g;
    g.kind = ProfileKind::Power;
    g.c = c;
    g.p = p;
    g.r = r;
    return g;
}

GrowthProfile GrowthProfile::exp_type(double r) {
    GrowthProfile g;
    g.kind = ProfileKind::ExpType;
    g.r = r;
    return g;
}

double GrowthProfile::f0(double s) const {
    if (s < 0.0) throw DataError("growth profile f0 is defined on s >= 0");
    switch (kind) {
        case ProfileKind::Linear:
            return c * s;
        case ProfileKind::Power:
            return s <= 1.0 ? c * std::pow(s, p) : c * s;
        case ProfileKind::ExpType:
            if (s == 0.0) return 0.0;
            return s <= 1.0 ? (1.0 / s) * std::exp(-1.0 / (s * s)) : std::exp(-1.0) * s;
        case ProfileKind::Tabulated:
            return interp_table(points, s);
    }
    return 0.0;
}

double GrowthProfile::f0_inverse(double u) const {
    if (u < 0.0) throw DataError("growth profile inverse is defined on u >= 0");
    switch (kind) {
        case ProfileKind::Linear:
            return u / c;
        case ProfileKind::Power:
            return u <= c ? std::pow(u / c, 1.0 / p) : u / c;
        case ProfileKind::ExpType:
        case ProfileKind::Tabulated: {
            if (u == 0.0) return 0.0;
            // monotone bisection; expand the bracket first
            double lo = 0.0, hi = 1.0;
            for (int i = 0; i < 200 && f0(hi) < u; ++i) hi *= 2.0;
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (f0(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// DampingSpec / TorqueSpec

double DampingSpec::value(double s) const {
    switch (kind) {
        case DampingKind::Linear:
            return c * s;
        case DampingKind::Power: {
            const double as = std::abs(s);
            if (as >= 1.0) return c * s;
            return std::copysign(c * std::pow(as, p), s);
        }
        case DampingKind::ExpType: {
            if (s == 0.0) return 0.0;
            const double as = std::abs(s);
            if (as >= 1.0) return std::exp(-1.0) * s;
            return std::copysign((1.0 / as) * std::exp(-1.0 / (s * s)), s);
        }
        case DampingKind::Tabulated:
            return interp_table(points, s);
    }
    return 0.0;
}

double DampingSpec::slope(double s) const {
    switch (kind) {
        case DampingKind::Linear:
            return c;
        case DampingKind::Power: {
            const double as = std::abs(s);
            if (as >= 1.0) return c;
            return c * p * std::pow(as, p - 1.0);
        }
        case DampingKind::ExpType: {
            if (s == 0.0) return 0.0;
            const double as = std::abs(s);
            if (as >= 1.0) return std::exp(-1.0);
            const double s2 = s * s;
            return std::exp(-1.0 / s2) * (2.0 / (s2 * s2) - 1.0 / s2);
        }
        case DampingKind::Tabulated:
            return table_slope(points, s);
    }
    return 0.0;
}

double TorqueSpec::value(double x) const { return K * x; }
double TorqueSpec::slope(double) const { return K; }

// ---------------------------------------------------------------------------
// FeedbackLaw assembly

FeedbackLaw make_feedback_law(const DampingSpec& damping, const TorqueSpec& torque,
                              std::optional<GrowthProfile> profile_override) {
    FeedbackLaw law;
    law.damping = damping;
    law.torque = torque;

    switch (damping.kind) {
        case DampingKind::Linear:
            law.c1 = law.c2 = damping.c;
            if (damping.c > 0.0)
                law.profile = GrowthProfile::linear(std::min(damping.c, 1.0 / damping.c));
            break;
        case DampingKind::Power:
            if (damping.c <= 0.0) throw ConfigError("power damping requires c > 0");
            if (damping.p < 1.0) throw ConfigError("power damping requires p >= 1");
            law.c1 = law.c2 = damping.c;
            // p = 1 degenerates to the linear profile
            law.profile = damping.p == 1.0
                              ? GrowthProfile::linear(std::min(damping.c, 1.0 / damping.c))
                              : GrowthProfile::power(
                                    std::min(damping.c, std::pow(damping.c, -damping.p)), damping.p);
            break;
        case DampingKind::ExpType:
            law.c1 = law.c2 = std::exp(-1.0);
            law.profile = GrowthProfile::exp_type();
            break;
        case DampingKind::Tabulated: {
            if (damping.points.size() < 2)
                throw ConfigError("tabulated damping needs at least 2 points");
            // linear-growth constants from the samples beyond |s| = 1
            double lo = 0.0, hi = 0.0;
            bool seen = false;
            for (const auto& [s, f] : damping.points) {
                if (std::abs(s) < 1.0 || s == 0.0) continue;
                const double ratio = std::abs(f) / std::abs(s);
                lo = seen ? std::min(lo, ratio) : ratio;
                hi = seen ? std::max(hi, ratio) : ratio;
                seen = true;
            }
            if (!seen) {
                lo = hi = std::abs(table_slope(damping.points, damping.points.back().first));
            }
            law.c1 = lo;
            law.c2 = hi;
            break;
        }
    }
    if (profile_override) law.profile = std::move(profile_override);
    if (law.profile) {
        if (law.profile->c <= 0.0 && law.profile->kind != ProfileKind::Tabulated &&
            law.profile->kind != ProfileKind::ExpType)
            throw ConfigError("growth profile requires c > 0");
        if (law.profile->r <= 0.0 || law.profile->r > 1.0)
            throw ConfigError("growth profile requires r in (0, 1]");
    }
    if (torque.K <= 0.0) throw ConfigError("torque law requires sector constant K > 0");
    return law;
}

double eval_feedback(const FeedbackLaw& law, FeedbackChannel which, double s) {
    switch (which) {
        case FeedbackChannel::Damping:
            return law.damping_value(s);
        case FeedbackChannel::Torque:
            return law.torque_value(s);
    }
    throw ConfigError("unknown feedback channel");
}

// ---------------------------------------------------------------------------
// Hypothesis checks

const CheckItem* HypothesisReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<double> default_hypothesis_grid() {
    std::vector<double> grid;
    const int n = 801;
    grid.reserve(n);
    for (int i = 0; i < n; ++i) grid.push_back(-10.0 + 20.0 * i / (n - 1));
    return grid;
}

namespace {

void add_check(HypothesisReport& rep, std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok, std::move(detail)});
    rep.all_passed = rep.all_passed && ok;
}

std::string at_point(double s) {
    std::ostringstream os;
    os << "first counterexample at s = " << s;
    return os.str();
}

} // namespace

HypothesisReport check_hypotheses(const FeedbackLaw& law, const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("check_hypotheses: empty sample grid");
    std::vector<double> s = grid;
    std::sort(s.begin(), s.end());
    if (s.front() > -10.0 || s.back() < 10.0)
        throw ConfigError("check_hypotheses: sample grid must span [-10, 10]");
    const bool has_inner = std::any_of(s.begin(), s.end(), [](double v) { return v > 0.0 && v < 1.0; });
    const bool has_outer = std::any_of(s.begin(), s.end(), [](double v) { return v > 1.0; });
    if (!has_inner || !has_outer)
        throw ConfigError("check_hypotheses: grid needs points inside (0,1) and beyond 1");

    HypothesisReport rep;

    // H.I: f continuous non-decreasing, f(0) = 0.
    {
        bool ok = std::abs(law.damping_value(0.0)) == 0.0;
        std::string detail = ok ? "f(0) = 0" : "f(0) != 0";
        double bad = 0.0;
        if (ok) {
            for (size_t i = 0; i + 1 < s.size(); ++i) {
                const double f0v = law.damping_value(s[i]);
                const double f1v = law.damping_value(s[i + 1]);
                const double tol = 1e-12 * (1.0 + std::max(std::abs(f0v), std::abs(f1v)));
                if (f1v < f0v - tol) {
                    ok = false;
                    bad = s[i + 1];
                    break;
                }
            }
            detail = ok ? "non-decreasing on grid, f(0) = 0" : at_point(bad);
        }
        add_check(rep, "H1_monotone_zero", ok, detail);
    }

    // H.II inner sandwich: f0(|s|) <= |f(s)| <= f0^-1(|s|) for |s| <= 1.
    if (law.profile) {
        bool ok = true;
        double bad = 0.0;
        for (double v : s) {
            const double as = std::abs(v);
            if (as > 1.0) continue;
            const double fv = std::abs(law.damping_value(v));
            const double lo = law.profile->f0(as);
            const double hi = law.profile->f0_inverse(as);
            const double tol = 1e-9 * (1.0 + fv);
            if (fv < lo - tol || fv > hi + tol) {
                ok = false;
                bad = v;
                break;
            }
        }
        add_check(rep, "H2_sandwich", ok, ok ? "growth sandwich holds on |s| <= 1" : at_point(bad));
    } else {
        add_check(rep, "H2_sandwich", false, "no growth profile attached (e.g. zero damping)");
    }

    // H.II outer bounds: c1 |s| <= |f(s)| <= c2 |s| for |s| >= 1.
    {
        bool ok = law.c1 > 0.0 && law.c2 >= law.c1;
        double bad = 0.0;
        if (ok) {
            for (double v : s) {
                const double as = std::abs(v);
                if (as < 1.0) continue;
                const double fv = std::abs(law.damping_value(v));
                const double tol = 1e-9 * (1.0 + fv);
                if (fv < law.c1 * as - tol || fv > law.c2 * as + tol) {
                    ok = false;
                    bad = v;
                    break;
                }
            }
        }
        std::ostringstream os;
        os << "c1 = " << law.c1 << ", c2 = " << law.c2;
        add_check(rep, "H2_linear_bounds", ok, ok ? os.str() : at_point(bad));
    }

    // H.III sector condition on gamma.
    {
        bool ok = true;
        double bad = 0.0;
        const double K = law.torque.K;
        for (double v : s) {
            const double g = law.torque_value(v);
            const double tol = 1e-12 * (1.0 + std::abs(g));
            if (g * v < -tol || std::abs(g) < K * std::abs(v) - tol) {
                ok = false;
                bad = v;
                break;
            }
        }
        std::ostringstream os;
        os << "sector constant K = " << K;
        add_check(rep, "H3_sector", ok, ok ? os.str() : at_point(bad));
    }

    // Convexity of H(x) = sqrt(x) f0(sqrt(x)) on (0, r^2], sampled second
    // differences. Affine transforms (linear f0) are the degenerate pass.
    if (law.profile) {
        const auto& prof = *law.profile;
        if (prof.kind == ProfileKind::Linear) {
            add_check(rep, "H_convexity", true, "affine transform (degenerate convexity)");
        } else {
            const double r2 = prof.r * prof.r;
            const int n = 64;
            bool ok = true;
            double bad = 0.0;
            auto H = [&prof](double x) { return std::sqrt(x) * prof.f0(std::sqrt(x)); };
            for (int j = 1; j + 1 <= n; ++j) {
                const double x = r2 * j / n;
                const double d = r2 / n;
                const double dd = H(x + d) - 2.0 * H(x) + H(std::max(x - d, r2 * 1e-6));
                if (!(dd > 0.0)) {
                    ok = false;
                    bad = x;
                    break;
                }
            }
            std::ostringstream os;
            os << "strictly convex on (0, " << r2 << "]";
            add_check(rep, "H_convexity", ok, ok ? os.str() : at_point(bad));
        }
    } else {
        add_check(rep, "H_convexity", false, "no growth profile attached");
    }

    return rep;
}

} // namespace diskbeam
