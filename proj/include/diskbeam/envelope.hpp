#pragma once

#include <span>
#include <string>
#include <vector>

#include "diskbeam/decay.hpp"

namespace diskbeam {

/// A calibrated decay envelope k3 * H1^-1(k1 (t - t0) + k2) * E0(t0).
struct EnvelopeFit {
    GrowthProfile profile;
    double eps0 = 0.0;
    double k1 = 0.0;
    double k2 = 0.0;
    double k3 = 0.0;
    bool feasible = false;
    /// min over samples of envelope(t) - E0(t); a valid fit has margin >= 0.
    double dominance_margin = 0.0;
    /// Largest decay rate certified by the windowed clock increments.
    double certified_rate = 0.0;
    std::string message;

    /// Envelope value at time t (t in the trace's clock).
    double value(const DecayCalculus& calc, double t) const;
};

struct EnvelopeOptions {
    double eps0 = -1.0;        ///< <= 0: profile default 0.5 r^2
    bool search_eps0 = false;  ///< scan {0.1, 0.25, 0.5, 0.75} r^2
    double grid_lo = 1e-3;     ///< k1, k2 searched over decade grid [lo, hi]
    double grid_hi = 1e2;
    double headroom = 1.1;     ///< envelope anchored at headroom * E0(0)
    double window = -1.0;      ///< certification window width; <= 0: auto
};

/// Calibrates the envelope constants against a sampled E0 series. k3 anchors
/// the envelope at headroom * E0(0); (k1, k2) come from a decade grid search
/// maximizing k1, refined once around the best cell, subject to
///   (a) pointwise dominance: envelope(t_i) >= E0(t_i) at every sample, and
///   (b) rate certification: over every coarse window the increment of
///       H1(E0/(headroom E0(0))) is at least k1 * window width.
/// (b) is what makes feasibility family-discriminating on finite horizons:
/// without it any slowly-decaying envelope dominates any bounded trace.
/// Infeasible fits carry a diagnostic message instead of throwing.
EnvelopeFit calibrate_envelope(std::span<const double> times, std::span<const double> e0,
                               const GrowthProfile& profile, const EnvelopeOptions& opts = {});

enum class RateKind { Exponential, Power, Logarithmic };

/// Least-squares rate fit over a trailing window:
///   Exponential  log E vs t          E ~ prefactor * exp(-rate t)
///   Power        log E vs log(1+t)   E ~ prefactor * (1+t)^exponent
///   Logarithmic  1/E   vs log(1+t)   E ~ 1/(prefactor + rate log(1+t))
struct RateFit {
    RateKind kind = RateKind::Exponential;
    double rate_or_exponent = 0.0;
    double prefactor = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;
    double quality = 0.0;  ///< coefficient of determination in [0, 1]
};

/// Throws DataError when the window contains non-positive samples. The window
/// drops the leading transient and optionally trims the tail (keep_fraction of
/// the samples).
RateFit fit_rates(std::span<const double> times, std::span<const double> values, RateKind kind,
                  double drop_fraction = 0.2, double keep_fraction = 1.0);

/// Best-quality family among the three fits; "none" when the series does not
/// decay ( final >= 99% of initial) or no fit applies.
std::string classify_decay(std::span<const double> times, std::span<const double> values);

} // namespace diskbeam
