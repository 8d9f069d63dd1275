#include "diskbeam/params.hpp"

#include <sstream>

namespace diskbeam {

void ValidationReport::add(std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
    admissible = admissible && ok;
}

const CheckItem* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

ValidationReport validate_params(const PhysicalParams& p) {
    ValidationReport rep;
    rep.add("EI_positive", p.EI > 0.0, "EI = " + std::to_string(p.EI));
    rep.add("rho_positive", p.rho > 0.0, "rho = " + std::to_string(p.rho));
    rep.add("Id_positive", p.Id > 0.0, "Id = " + std::to_string(p.Id));
    rep.add("unit_length", p.length == 1.0, "length is fixed to 1 by the rescaling");

    if (p.EI > 0.0 && p.rho > 0.0) {
        const double bound = p.angular_bound();
        std::ostringstream os;
        os << "|varpi| = " << std::abs(p.varpi) << " vs bound 3*sqrt(EI/rho) = " << bound;
        rep.add("angular_velocity_bound", std::abs(p.varpi) < bound, os.str());
    } else {
        rep.add("angular_velocity_bound", false, "bound undefined for non-positive EI or rho");
    }
    return rep;
}

} // namespace diskbeam
