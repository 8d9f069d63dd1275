#include "diskbeam/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "diskbeam/errors.hpp"

namespace diskbeam {

namespace {

constexpr double kSaturatedClock = 1e250;

std::vector<double> decade_grid(double lo, double hi) {
    std::vector<double> g;
    for (double v = lo; v <= hi * (1.0 + 1e-12); v *= 10.0) g.push_back(v);
    return g;
}

struct CertResult {
    double cap = 0.0;  ///< largest rate certified by every window
    int windows = 0;
};

/// Windowed rate certification: over each window the increment of the decay
/// clock applied to the normalized trace must be at least cap * width. The
/// windows average over the oscillatory dissipation bursts of beam traces.
CertResult certify_rate(const std::vector<double>& tau, const std::vector<double>& etil,
                        const DecayCalculus& calc, double width) {
    CertResult out;
    const double T = tau.back();
    std::vector<double> w_bounds;
    for (double w = 0.0; w < T; w += width) w_bounds.push_back(w);
    // merge a short trailing window into its neighbor
    if (w_bounds.size() >= 2 && T - w_bounds.back() < 0.5 * width)
        w_bounds.back() = T;
    else
        w_bounds.push_back(T);
    if (w_bounds.size() < 2) return out;

    // running-min trace value at each window boundary
    std::vector<double> clocks;
    clocks.reserve(w_bounds.size());
    double running = etil.front();
    size_t i = 0;
    for (double wb : w_bounds) {
        while (i < tau.size() && tau[i] <= wb + 1e-12) {
            running = std::min(running, etil[i]);
            ++i;
        }
        clocks.push_back(calc.clock(std::max(running, 1e-300)));
    }
    double cap = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j + 1 < clocks.size(); ++j) {
        if (clocks[j] >= kSaturatedClock && clocks[j + 1] >= kSaturatedClock) continue;
        const double slope = (clocks[j + 1] - clocks[j]) / (w_bounds[j + 1] - w_bounds[j]);
        cap = std::min(cap, slope);
        ++out.windows;
    }
    out.cap = std::isfinite(cap) ? std::max(cap, 0.0) : std::numeric_limits<double>::infinity();
    return out;
}

struct FitAttempt {
    bool feasible = false;
    double k1 = 0.0, k2 = 0.0, k3 = 0.0;
    double margin = 0.0;
    double cert = 0.0;
    std::string message;
};

FitAttempt fit_one(const std::vector<double>& tau, const std::vector<double>& e0,
                   const GrowthProfile& profile, double eps0, const EnvelopeOptions& opts) {
    FitAttempt out;
    const DecayCalculus calc(profile, eps0);
    const double anchor = opts.headroom * e0.front();

    std::vector<double> etil(e0.size());
    for (size_t i = 0; i < e0.size(); ++i) {
        etil[i] = e0[i] / anchor;
        if (etil[i] > 1.0) {
            out.message = "trace exceeds the anchored envelope at t offset " +
                          std::to_string(tau[i]);
            return out;
        }
        etil[i] = std::max(etil[i], 1e-300);
    }

    const double T = tau.back();
    const double width = opts.window > 0.0 ? opts.window : std::max(2.5, T / 25.0);
    const CertResult cert = certify_rate(tau, etil, calc, width);
    out.cert = std::isfinite(cert.cap) ? cert.cap : opts.grid_hi;
    if (cert.cap < opts.grid_lo) {
        std::ostringstream os;
        os << "windowed clock increments certify at most k1 = " << cert.cap
           << " < grid floor " << opts.grid_lo << " (profile family likely mismatched)";
        out.message = os.str();
        return out;
    }

    // k2 candidates: decade grid plus the value anchoring the envelope exactly
    // at the headroom (clock of 1/headroom).
    std::vector<double> k2s = decade_grid(opts.grid_lo, opts.grid_hi);
    k2s.push_back(calc.clock(1.0 / opts.headroom));
    std::sort(k2s.begin(), k2s.end());

    // Largest dominating k1 per k2: envelope(t_i) >= E0(t_i) is equivalent to
    // k1 tau_i + k2 <= clock(etil_i * inv(k2)); a small slack keeps the final
    // margin nonnegative through the clock/inverse round trip.
    auto k1_cap_for = [&](double k2) {
        const double u = calc.clock_inverse(k2);
        double cap = std::numeric_limits<double>::infinity();
        for (size_t i = 1; i < tau.size(); ++i) {
            if (!(tau[i] > 0.0)) continue;
            const double d = calc.clock(std::max(etil[i] * u, 1e-300));
            if (d >= kSaturatedClock) continue;
            cap = std::min(cap, (d - 1e-9 * (1.0 + std::abs(d)) - k2) / tau[i]);
        }
        return cap;
    };
    std::vector<double> k1_caps(k2s.size());
    for (size_t j = 0; j < k2s.size(); ++j) k1_caps[j] = k1_cap_for(k2s[j]);

    auto search = [&](const std::vector<double>& k1_grid_desc) {
        for (double k1 : k1_grid_desc) {
            if (k1 > cert.cap) continue;
            for (size_t j = 0; j < k2s.size(); ++j) {
                if (k1 <= k1_caps[j]) return std::make_pair(k1, k2s[j]);
            }
        }
        return std::make_pair(0.0, 0.0);
    };

    std::vector<double> coarse = decade_grid(opts.grid_lo, opts.grid_hi);
    std::sort(coarse.rbegin(), coarse.rend());
    auto [k1c, k2c] = search(coarse);
    if (k1c == 0.0) {
        out.message = "no dominating (k1, k2) cell on the search grid";
        return out;
    }
    // one refinement pass: a log-spaced grid spanning a decade either side,
    // clipped to the search bounds
    std::vector<double> refined;
    for (int j = 8; j >= -8; --j) {
        const double v = k1c * std::pow(10.0, j / 8.0);
        if (v >= opts.grid_lo && v <= opts.grid_hi) refined.push_back(v);
    }
    auto [k1r, k2r] = search(refined);
    const double k1 = std::max(k1c, k1r);
    const double k2 = k1r >= k1c ? k2r : k2c;

    const double u = calc.clock_inverse(k2);
    const double k3 = opts.headroom / u;
    double margin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < tau.size(); ++i) {
        const double env = k3 * calc.clock_inverse(k1 * tau[i] + k2) * e0.front();
        margin = std::min(margin, env - e0[i]);
    }
    out.feasible = margin >= 0.0;
    out.k1 = k1;
    out.k2 = k2;
    out.k3 = k3;
    out.margin = margin;
    if (!out.feasible) out.message = "negative dominance margin after calibration";
    return out;
}

} // namespace

double EnvelopeFit::value(const DecayCalculus& calc, double t) const {
    return k3 * calc.clock_inverse(k1 * t + k2);
}

EnvelopeFit calibrate_envelope(std::span<const double> times, std::span<const double> e0,
                               const GrowthProfile& profile, const EnvelopeOptions& opts) {
    if (times.size() != e0.size() || times.size() < 2)
        throw DataError("calibrate_envelope: need matching series with >= 2 samples");
    if (!(e0.front() > 0.0)) throw DataError("calibrate_envelope: E0(0) must be positive");

    std::vector<double> tau(times.size());
    for (size_t i = 0; i < times.size(); ++i) tau[i] = times[i] - times.front();
    const std::vector<double> vals(e0.begin(), e0.end());

    const double r2 = profile.r * profile.r;
    std::vector<double> eps_candidates;
    if (opts.search_eps0) {
        eps_candidates = {0.1 * r2, 0.25 * r2, 0.5 * r2, 0.75 * r2};
    } else {
        eps_candidates = {opts.eps0 > 0.0 ? opts.eps0 : 0.5 * r2};
    }

    EnvelopeFit best;
    best.profile = profile;
    best.eps0 = eps_candidates.front();
    for (double eps : eps_candidates) {
        const FitAttempt at = fit_one(tau, vals, profile, eps, opts);
        const bool better = at.feasible && (!best.feasible || at.k1 > best.k1);
        if (better) {
            best.feasible = true;
            best.eps0 = eps;
            best.k1 = at.k1;
            best.k2 = at.k2;
            best.k3 = at.k3;
            best.dominance_margin = at.margin;
            best.certified_rate = at.cert;
            best.message.clear();
        } else if (!best.feasible && best.message.empty()) {
            best.eps0 = eps;
            best.certified_rate = at.cert;
            best.message = at.message;
        }
    }
    return best;
}

RateFit fit_rates(std::span<const double> times, std::span<const double> values, RateKind kind,
                  double drop_fraction, double keep_fraction) {
    if (times.size() != values.size() || times.size() < 3)
        throw DataError("fit_rates: need matching series with >= 3 samples");
    const size_t start = static_cast<size_t>(drop_fraction * times.size());
    const size_t stop = std::min(times.size(),
                                 std::max(start + 3, static_cast<size_t>(keep_fraction * times.size())));
    if (stop - start < 3) throw DataError("fit_rates: window too small");

    std::vector<double> X, Y;
    X.reserve(stop - start);
    Y.reserve(stop - start);
    for (size_t i = start; i < stop; ++i) {
        const double v = values[i];
        if (!(v > 0.0)) throw DataError("fit_rates: non-positive sample inside the fit window");
        switch (kind) {
            case RateKind::Exponential:
                X.push_back(times[i]);
                Y.push_back(std::log(v));
                break;
            case RateKind::Power:
                X.push_back(std::log1p(times[i]));
                Y.push_back(std::log(v));
                break;
            case RateKind::Logarithmic:
                X.push_back(std::log1p(times[i]));
                Y.push_back(1.0 / v);
                break;
        }
    }
    const size_t n = X.size();
    double sx = 0.0, sy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sx += X[i];
        sy += Y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (X[i] - mx) * (X[i] - mx);
        sxy += (X[i] - mx) * (Y[i] - my);
        syy += (Y[i] - my) * (Y[i] - my);
    }
    if (sxx == 0.0) throw DataError("fit_rates: degenerate abscissa in window");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssres = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = Y[i] - (intercept + slope * X[i]);
        ssres += r * r;
    }
    const double quality = syy > 0.0 ? std::clamp(1.0 - ssres / syy, 0.0, 1.0) : 0.0;

    RateFit fit;
    fit.kind = kind;
    fit.window_start = times[start];
    fit.window_end = times[stop - 1];
    fit.quality = quality;
    switch (kind) {
        case RateKind::Exponential:
            fit.rate_or_exponent = -slope;
            fit.prefactor = std::exp(intercept);
            break;
        case RateKind::Power:
            fit.rate_or_exponent = slope;
            fit.prefactor = std::exp(intercept);
            break;
        case RateKind::Logarithmic:
            fit.rate_or_exponent = slope;
            fit.prefactor = intercept;
            break;
    }
    return fit;
}

std::string classify_decay(std::span<const double> times, std::span<const double> values) {
    if (values.size() < 3 || !(values.front() > 0.0)) return "none";
    if (values.back() >= 0.99 * values.front()) return "none";
    const std::pair<RateKind, const char*> kinds[] = {{RateKind::Exponential, "exponential"},
                                                      {RateKind::Power, "power"},
                                                      {RateKind::Logarithmic, "logarithmic"}};
    std::string best = "none";
    double best_q = -1.0;
    for (const auto& [kind, name] : kinds) {
        try {
            const RateFit f = fit_rates(times, values, kind);
            if (f.quality > best_q + 1e-12) {
                best_q = f.quality;
                best = name;
            }
        } catch (const DataError&) {
        }
    }
    return best;
}

} // namespace diskbeam
