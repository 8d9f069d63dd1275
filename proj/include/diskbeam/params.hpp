#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace diskbeam {

/// Physical constants of the disk-beam assembly. The beam length is rescaled
/// to 1, so all quantities are in rescaled units.
struct PhysicalParams {
    double EI = 1.0;      ///< flexural rigidity
    double rho = 1.0;     ///< mass per unit length
    double Id = 1.0;      ///< disk moment of inertia
    double varpi = 0.0;   ///< target angular velocity
    double omega0 = 0.0;  ///< initial angular velocity
    double length = 1.0;  ///< beam length, fixed to 1 by the rescaling

    /// The strict upper bound on |varpi| under which the energy quadratic
    /// form is a norm: 3*sqrt(EI/rho).
    double angular_bound() const { return 3.0 * std::sqrt(EI / rho); }
};

struct CheckItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckItem> checks;
    bool admissible = true;

    void add(std::string name, bool ok, std::string detail = {});
    const CheckItem* find(const std::string& name) const;
};

/// Checks positivity of EI, rho, Id and the strict angular-velocity bound
/// |varpi| < 3*sqrt(EI/rho). Rejection is a reported outcome, not a fault.
ValidationReport validate_params(const PhysicalParams& p);

} // namespace diskbeam
