#include "diskbeam/decay.hpp"

#include <cmath>
#include <functional>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

// exp with a saturation cap: decay clocks of very flat profiles grow beyond
// double range; the cap keeps comparisons monotone without overflow.
double safe_exp(double x) { return std::exp(std::min(x, 700.0)); }

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

DecayCalculus::DecayCalculus(GrowthProfile profile, double eps0) : profile_(std::move(profile)) {
    if (profile_.r <= 0.0 || profile_.r > 1.0)
        throw ConfigError("decay calculus: profile radius r must be in (0, 1]");
    const double r2 = profile_.r * profile_.r;
    eps0_ = eps0 <= 0.0 ? 0.5 * r2 : eps0;
    if (!(eps0_ > 0.0) || !(eps0_ < r2))
        throw ConfigError("decay calculus: eps0 must lie in (0, r^2)");
}

double DecayCalculus::transform(double x) const {
    if (x < 0.0) throw DataError("transform: x must be >= 0");
    if (x == 0.0) return 0.0;
    switch (profile_.kind) {
        case ProfileKind::Linear:
            return profile_.c * x;
        case ProfileKind::Power:
            return x <= 1.0 ? profile_.c * std::pow(x, 0.5 * (profile_.p + 1.0))
                            : profile_.c * x;
        case ProfileKind::ExpType:
            return x <= 1.0 ? std::exp(-1.0 / x) : std::exp(-1.0) * x;
        case ProfileKind::Tabulated: {
            const double s = std::sqrt(x);
            return s * profile_.f0(s);
        }
    }
    return 0.0;
}

double DecayCalculus::transform_deriv(double x) const {
    if (!(x > 0.0)) throw DataError("transform_deriv: x must be > 0");
    switch (profile_.kind) {
        case ProfileKind::Linear:
            return profile_.c;
        case ProfileKind::Power:
            return x <= 1.0
                       ? profile_.c * 0.5 * (profile_.p + 1.0) * std::pow(x, 0.5 * (profile_.p - 1.0))
                       : profile_.c;
        case ProfileKind::ExpType:
            return x <= 1.0 ? std::exp(-1.0 / x) / (x * x) : std::exp(-1.0);
        case ProfileKind::Tabulated: {
            const double d = 1e-6 * std::max(x, 1e-6);
            const double lo = std::max(x - d, 0.25 * d);
            return (transform(x + d) - transform(lo)) / (x + d - lo);
        }
    }
    return 0.0;
}

double DecayCalculus::rate(double t) const {
    if (!(t > 0.0)) throw DataError("rate: t must be > 0");
    return t * transform_deriv(eps0_ * t);
}

double DecayCalculus::clock(double t) const {
    if (!(t > 0.0) || t > 1.0 + 1e-12) throw DataError("clock: t must lie in (0, 1]");
    t = std::min(t, 1.0);
    switch (profile_.kind) {
        case ProfileKind::Linear:
            return -std::log(t) / profile_.c;
        case ProfileKind::Power: {
            if (profile_.p == 1.0) return -std::log(t) / profile_.c;
            const double m = 0.5 * (profile_.p + 1.0);
            const double kappa = profile_.c * m * std::pow(eps0_, m - 1.0);
            return (std::pow(t, 1.0 - m) - 1.0) / (kappa * (m - 1.0));
        }
        default:
            return clock_quadrature(t);
    }
}

double DecayCalculus::clock_quadrature(double t) const {
    if (!(t > 0.0) || t > 1.0 + 1e-12) throw DataError("clock: t must lie in (0, 1]");
    t = std::min(t, 1.0);
    if (t == 1.0) return 0.0;

    std::function<double(double)> inv_rate;
    if (profile_.kind == ProfileKind::ExpType) {
        // 1/H2(s) = eps0^2 s exp(1/(eps0 s)), written through the capped exp
        const double e0 = eps0_;
        inv_rate = [e0](double s) { return e0 * e0 * s * safe_exp(1.0 / (e0 * s)); };
    } else {
        inv_rate = [this](double s) {
            const double r = rate(s);
            return r > 1e-300 ? 1.0 / r : 1e300;
        };
    }
    const double fa = inv_rate(t), fb = inv_rate(1.0), fm = inv_rate(0.5 * (t + 1.0));
    const double rough = (1.0 - t) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(1e-10, 1e-12 * std::abs(rough));
    return adaptive_simpson(inv_rate, t, 1.0, tol);
}

double DecayCalculus::clock_inverse(double tau) const {
    if (tau < 0.0) throw DataError("clock_inverse: tau must be >= 0");
    if (tau == 0.0) return 1.0;
    switch (profile_.kind) {
        case ProfileKind::Linear:
            return std::exp(-profile_.c * tau);
        case ProfileKind::Power: {
            if (profile_.p == 1.0) return std::exp(-profile_.c * tau);
            const double m = 0.5 * (profile_.p + 1.0);
            const double kappa = profile_.c * m * std::pow(eps0_, m - 1.0);
            return std::pow(1.0 + tau * kappa * (m - 1.0), -1.0 / (m - 1.0));
        }
        default: {
            // expand the bracket leftward, then safeguarded Newton on the clock
            double hi = 1.0, lo = 0.5;
            while (clock(lo) < tau) {
                hi = lo;
                lo *= 0.5;
                if (lo < 1e-300) return lo;
            }
            double s = 0.5 * (lo + hi);
            for (int it = 0; it < 200; ++it) {
                const double c = clock(s);
                if (std::abs(c - tau) <= 1e-11 * (1.0 + tau)) return s;
                if (c > tau) lo = s; else hi = s;
                double next = s + (c - tau) * rate(s);
                if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
                if (next == s) return s;
                s = next;
                if (hi - lo <= 1e-15 * hi) return s;
            }
            return s;
        }
    }
}

std::optional<double> DecayCalculus::deriv_inverse(double s) const {
    if (affine_transform()) return std::nullopt;
    const double r2 = profile_.r * profile_.r;
    const double top = transform_deriv(r2);
    if (!(s > 0.0) || s > top * (1.0 + 1e-12))
        throw DataError("deriv_inverse: argument outside (0, H'(r^2))");
    if (profile_.kind == ProfileKind::Power) {
        const double m = 0.5 * (profile_.p + 1.0);
        return std::pow(s / (profile_.c * m), 1.0 / (m - 1.0));
    }
    double lo = 0.0, hi = r2;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (transform_deriv(mid) < s ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * std::max(hi, 1e-30)) break;
    }
    return 0.5 * (lo + hi);
}

std::optional<double> DecayCalculus::conjugate(double s) const {
    const auto x = deriv_inverse(s);
    if (!x) return std::nullopt;
    return s * *x - transform(*x);
}

std::optional<double> DecayCalculus::young_margin(double A, double B) const {
    if (affine_transform()) return std::nullopt;
    const double r2 = profile_.r * profile_.r;
    if (!(B > 0.0) || B > r2 * (1.0 + 1e-12))
        throw DataError("young_margin: B outside (0, r^2]");
    const auto hstar = conjugate(A);
    if (!hstar) return std::nullopt;
    return *hstar + transform(B) - A * B;
}

} // namespace diskbeam
