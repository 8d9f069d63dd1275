#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "diskbeam/feedback.hpp"
#include "diskbeam/integrator.hpp"
#include "diskbeam/params.hpp"

namespace diskbeam {

inline constexpr int kSchemaVersion = 1;

enum class InitialShape { Zero, FirstMode, Bump, Tabulated };

/// Initial-data descriptor. Catalog shapes satisfy the clamped constraints by
/// construction: the first clamped-free mode (normalized to unit tip
/// deflection) and the polynomial bump a x^2 (x-1)^2. Tabulated data passes
/// free-dof nodal values and slopes directly.
struct InitialData {
    InitialShape shape = InitialShape::Zero;
    double amplitude = 1.0;
    InitialShape velocity_shape = InitialShape::Zero;
    double velocity_amplitude = 0.0;
    std::vector<double> values, slopes;
    std::vector<double> velocity_values, velocity_slopes;
};

struct TimeGrid {
    double dt = 1e-3;
    double horizon = 50.0;
    int sample_every = 10;
};

struct AnalysisRequest {
    std::string envelope_profile = "auto";  ///< none | auto | linear | power | exp_type
    double eps0 = -1.0;                     ///< <= 0: profile default
    bool eps0_search = false;
    bool require_envelope = false;          ///< infeasible envelope fails the run
    std::vector<std::string> rate_fits = {"exponential", "power", "logarithmic"};
    bool spectral = false;
};

struct Scenario {
    PhysicalParams params;
    FeedbackLaw law;
    Grid grid;
    TimeGrid time;
    Mode mode = Mode::Subsystem;
    InitialData initial;
    AnalysisRequest analysis;
    long seed = 0;  ///< reserved; runs are deterministic regardless
    nlohmann::json echo;  ///< canonical config echo
};

/// Parses and structurally validates a scenario object. Unknown keys, wrong
/// types and bad enum values throw ConfigError naming the offending key.
Scenario parse_scenario(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& file);

struct SweepAxis {
    std::string path;  ///< dotted key path into the scenario, e.g. "params.varpi"
    std::vector<nlohmann::json> values;
};

struct SweepConfig {
    nlohmann::json base;
    std::vector<SweepAxis> axes;  ///< one or two swept axes
    bool keep_traces = false;
};

SweepConfig parse_sweep(const nlohmann::json& j);
SweepConfig load_sweep(const std::filesystem::path& file);

/// Aggregate validation: parameter admissibility, feedback hypotheses and
/// time/grid sanity. Hard checks are parameter admissibility, monotone
/// damping with f(0) = 0, the torque sector condition and the structural
/// time/grid bounds; growth-profile checks are advisory (they gate the
/// envelope analysis, not the run).
struct ValidationBundle {
    ValidationReport params_report;
    HypothesisReport hypotheses;
    std::vector<CheckItem> config_checks;
    bool hard_pass = true;

    std::string pretty() const;
};

ValidationBundle validate_scenario(const Scenario& s);

/// Builds the free-dof initial vectors (nodal interpolation).
Eigen::VectorXd build_initial_displacement(const Scenario& s);
Eigen::VectorXd build_initial_velocity(const Scenario& s);

} // namespace diskbeam
