#pragma once

#include <complex>
#include <vector>

#include "diskbeam/operators.hpp"

namespace diskbeam {

struct SpectralResult {
    std::vector<std::complex<double>> eigenvalues;
    double max_real_part = 0.0;
};

/// Full spectrum of the first-order closed-loop pencil on (y, v) with linear
/// boundary damping f(s) = gain * s:
///   d/dt [y; v] = [0, I; -M^-1 (EI Kb - rho varpi^2 M0), -EI gain M^-1 e_tip e_tip^T]
/// Dense nonsymmetric solve after diagonal balancing; eigenvalues are sorted
/// by (real, imag) for determinism.
SpectralResult spectral_abscissa(const Operators& ops, double linear_gain);

} // namespace diskbeam
