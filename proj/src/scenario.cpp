#include "diskbeam/scenario.hpp"

#include <fstream>
#include <sstream>

#include "diskbeam/errors.hpp"

namespace diskbeam {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config: '" + ctx + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("config: unknown key '" + it.key() + "' in '" + ctx + "'");
    }
}

double get_num(const json& j, const std::string& ctx, const char* key, double dflt,
               bool required = false) {
    if (!j.contains(key)) {
        if (required) throw ConfigError("config: missing key '" + ctx + "." + key + "'");
        return dflt;
    }
    if (!j[key].is_number())
        throw ConfigError("config: key '" + ctx + "." + key + "' must be a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& ctx, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_integer())
        throw ConfigError("config: key '" + ctx + "." + key + "' must be an integer");
    return j[key].get<int>();
}

bool get_bool(const json& j, const std::string& ctx, const char* key, bool dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_boolean())
        throw ConfigError("config: key '" + ctx + "." + key + "' must be a boolean");
    return j[key].get<bool>();
}

std::string get_str(const json& j, const std::string& ctx, const char* key,
                    const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_string())
        throw ConfigError("config: key '" + ctx + "." + key + "' must be a string");
    return j[key].get<std::string>();
}

std::vector<std::pair<double, double>> get_points(const json& j, const std::string& ctx) {
    std::vector<std::pair<double, double>> pts;
    if (!j.contains("points")) return pts;
    if (!j["points"].is_array())
        throw ConfigError("config: key '" + ctx + ".points' must be an array of [s, f] pairs");
    for (const auto& pr : j["points"]) {
        if (!pr.is_array() || pr.size() != 2 || !pr[0].is_number() || !pr[1].is_number())
            throw ConfigError("config: key '" + ctx + ".points' must be an array of [s, f] pairs");
        pts.emplace_back(pr[0].get<double>(), pr[1].get<double>());
    }
    return pts;
}

std::vector<double> get_array(const json& j, const std::string& ctx, const char* key) {
    std::vector<double> out;
    if (!j.contains(key)) return out;
    if (!j[key].is_array())
        throw ConfigError("config: key '" + ctx + "." + key + "' must be a number array");
    for (const auto& v : j[key]) {
        if (!v.is_number())
            throw ConfigError("config: key '" + ctx + "." + key + "' must be a number array");
        out.push_back(v.get<double>());
    }
    return out;
}

GrowthProfile parse_profile(const json& j, const std::string& ctx) {
    check_keys(j, ctx, {"kind", "c", "p", "r", "points"});
    const std::string kind = get_str(j, ctx, "kind", "");
    GrowthProfile g;
    if (kind == "linear") g.kind = ProfileKind::Linear;
    else if (kind == "power") g.kind = ProfileKind::Power;
    else if (kind == "exp_type") g.kind = ProfileKind::ExpType;
    else if (kind == "tabulated") g.kind = ProfileKind::Tabulated;
    else throw ConfigError("config: key '" + ctx + ".kind' must be one of linear|power|exp_type|tabulated");
    g.c = get_num(j, ctx, "c", 1.0);
    g.p = get_num(j, ctx, "p", 1.0);
    g.r = get_num(j, ctx, "r", g.kind == ProfileKind::ExpType ? 0.4 : 1.0);
    g.points = get_points(j, ctx);
    return g;
}

InitialShape parse_shape(const std::string& s, const std::string& ctx) {
    if (s == "zero") return InitialShape::Zero;
    if (s == "first_mode") return InitialShape::FirstMode;
    if (s == "bump") return InitialShape::Bump;
    if (s == "tabulated") return InitialShape::Tabulated;
    throw ConfigError("config: key '" + ctx + "' must be one of zero|first_mode|bump|tabulated");
}

Eigen::VectorXd shape_vector(const Grid& grid, InitialShape shape, double amplitude,
                             const std::vector<double>& values, const std::vector<double>& slopes,
                             const std::string& ctx) {
    switch (shape) {
        case InitialShape::Zero:
            return Eigen::VectorXd::Zero(grid.n_free());
        case InitialShape::FirstMode: {
            const double beta = clamped_free_roots(1)[0];
            const double tip = mode_shape(beta, 1.0);
            return interpolate(
                grid, [&](double x) { return amplitude * mode_shape(beta, x) / tip; },
                [&](double x) { return amplitude * mode_shape_deriv(beta, x) / tip; });
        }
        case InitialShape::Bump:
            return interpolate(
                grid,
                [&](double x) { return amplitude * x * x * (x - 1.0) * (x - 1.0); },
                [&](double x) { return amplitude * 2.0 * x * (x - 1.0) * (2.0 * x - 1.0); });
        case InitialShape::Tabulated: {
            if (static_cast<int>(values.size()) != grid.n_elements ||
                static_cast<int>(slopes.size()) != grid.n_elements)
                throw ConfigError("config: '" + ctx +
                                  "' tabulated initial data needs n_elements values and slopes "
                                  "(free nodes 1..n)");
            Eigen::VectorXd y(grid.n_free());
            for (int i = 1; i <= grid.n_elements; ++i) {
                y[2 * i - 2] = amplitude * values[i - 1];
                y[2 * i - 1] = amplitude * slopes[i - 1];
            }
            return y;
        }
    }
    return Eigen::VectorXd::Zero(grid.n_free());
}

} // namespace

Scenario parse_scenario(const json& j) {
    check_keys(j, "(root)", {"schema_version", "params", "law", "grid", "time", "mode", "initial",
                             "analysis", "seed"});
    const int version = get_int(j, "(root)", "schema_version", -1);
    if (version != kSchemaVersion)
        throw ConfigError("config: key 'schema_version' must be " + std::to_string(kSchemaVersion));

    Scenario s;
    s.echo = j;

    if (!j.contains("params")) throw ConfigError("config: missing key 'params'");
    const json& jp = j["params"];
    check_keys(jp, "params", {"EI", "rho", "Id", "varpi", "omega0", "length"});
    s.params.EI = get_num(jp, "params", "EI", 1.0);
    s.params.rho = get_num(jp, "params", "rho", 1.0);
    s.params.Id = get_num(jp, "params", "Id", 1.0);
    s.params.varpi = get_num(jp, "params", "varpi", 0.0);
    s.params.omega0 = get_num(jp, "params", "omega0", s.params.varpi);
    s.params.length = get_num(jp, "params", "length", 1.0);

    if (!j.contains("law")) throw ConfigError("config: missing key 'law'");
    const json& jl = j["law"];
    check_keys(jl, "law", {"damping", "torque", "profile"});
    if (!jl.contains("damping")) throw ConfigError("config: missing key 'law.damping'");
    const json& jd = jl["damping"];
    check_keys(jd, "law.damping", {"kind", "c", "p", "points"});
    DampingSpec damping;
    const std::string dkind = get_str(jd, "law.damping", "kind", "");
    if (dkind == "linear") damping.kind = DampingKind::Linear;
    else if (dkind == "power") damping.kind = DampingKind::Power;
    else if (dkind == "exp_type") damping.kind = DampingKind::ExpType;
    else if (dkind == "tabulated") damping.kind = DampingKind::Tabulated;
    else throw ConfigError("config: key 'law.damping.kind' must be one of linear|power|exp_type|tabulated");
    damping.c = get_num(jd, "law.damping", "c", 1.0);
    damping.p = get_num(jd, "law.damping", "p", 3.0);
    damping.points = get_points(jd, "law.damping");

    TorqueSpec torque;
    if (jl.contains("torque")) {
        const json& jt = jl["torque"];
        check_keys(jt, "law.torque", {"kind", "K"});
        const std::string tkind = get_str(jt, "law.torque", "kind", "linear");
        if (tkind != "linear")
            throw ConfigError("config: key 'law.torque.kind' must be 'linear' (sector-compliant catalog)");
        torque.K = get_num(jt, "law.torque", "K", 1.0);
    }

    std::optional<GrowthProfile> profile;
    if (jl.contains("profile")) profile = parse_profile(jl["profile"], "law.profile");
    s.law = make_feedback_law(damping, torque, profile);

    if (j.contains("grid")) {
        check_keys(j["grid"], "grid", {"n_elements"});
        s.grid.n_elements = get_int(j["grid"], "grid", "n_elements", 64);
    }

    if (j.contains("time")) {
        const json& jt = j["time"];
        check_keys(jt, "time", {"dt", "horizon", "sample_every"});
        s.time.dt = get_num(jt, "time", "dt", 1e-3);
        s.time.horizon = get_num(jt, "time", "horizon", 50.0);
        s.time.sample_every = get_int(jt, "time", "sample_every", 10);
    }

    const std::string mode = get_str(j, "(root)", "mode", "subsystem");
    if (mode == "subsystem") s.mode = Mode::Subsystem;
    else if (mode == "coupled") s.mode = Mode::Coupled;
    else throw ConfigError("config: key 'mode' must be 'subsystem' or 'coupled'");

    if (j.contains("initial")) {
        const json& ji = j["initial"];
        check_keys(ji, "initial",
                   {"shape", "amplitude", "velocity_shape", "velocity_amplitude", "values",
                    "slopes", "velocity_values", "velocity_slopes"});
        s.initial.shape = parse_shape(get_str(ji, "initial", "shape", "zero"), "initial.shape");
        s.initial.amplitude = get_num(ji, "initial", "amplitude", 1.0);
        s.initial.velocity_shape =
            parse_shape(get_str(ji, "initial", "velocity_shape", "zero"), "initial.velocity_shape");
        s.initial.velocity_amplitude = get_num(ji, "initial", "velocity_amplitude", 0.0);
        s.initial.values = get_array(ji, "initial", "values");
        s.initial.slopes = get_array(ji, "initial", "slopes");
        s.initial.velocity_values = get_array(ji, "initial", "velocity_values");
        s.initial.velocity_slopes = get_array(ji, "initial", "velocity_slopes");
    }

    if (j.contains("analysis")) {
        const json& ja = j["analysis"];
        check_keys(ja, "analysis",
                   {"envelope_profile", "eps0", "eps0_search", "require_envelope", "rate_fits",
                    "spectral"});
        s.analysis.envelope_profile = get_str(ja, "analysis", "envelope_profile", "auto");
        const std::string& ep = s.analysis.envelope_profile;
        if (ep != "auto" && ep != "none" && ep != "linear" && ep != "power" && ep != "exp_type")
            throw ConfigError(
                "config: key 'analysis.envelope_profile' must be one of none|auto|linear|power|exp_type");
        s.analysis.eps0 = get_num(ja, "analysis", "eps0", -1.0);
        s.analysis.eps0_search = get_bool(ja, "analysis", "eps0_search", false);
        s.analysis.require_envelope = get_bool(ja, "analysis", "require_envelope", false);
        if (ja.contains("rate_fits")) {
            if (!ja["rate_fits"].is_array())
                throw ConfigError("config: key 'analysis.rate_fits' must be a string array");
            s.analysis.rate_fits.clear();
            for (const auto& v : ja["rate_fits"]) {
                const std::string name = v.is_string() ? v.get<std::string>() : "";
                if (name != "exponential" && name != "power" && name != "logarithmic")
                    throw ConfigError(
                        "config: key 'analysis.rate_fits' entries must be exponential|power|logarithmic");
                s.analysis.rate_fits.push_back(name);
            }
        }
        s.analysis.spectral = get_bool(ja, "analysis", "spectral", false);
    }

    s.seed = static_cast<long>(get_num(j, "(root)", "seed", 0.0));
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_scenario(j);
}

SweepConfig parse_sweep(const json& j) {
    check_keys(j, "(root)", {"schema_version", "sweep"});
    const int version = get_int(j, "(root)", "schema_version", -1);
    if (version != kSchemaVersion)
        throw ConfigError("config: key 'schema_version' must be " + std::to_string(kSchemaVersion));
    if (!j.contains("sweep")) throw ConfigError("config: missing key 'sweep'");
    const json& js = j["sweep"];
    check_keys(js, "sweep", {"base", "axes", "keep_traces"});
    if (!js.contains("base")) throw ConfigError("config: missing key 'sweep.base'");

    SweepConfig cfg;
    cfg.base = js["base"];
    parse_scenario(cfg.base);  // structural validation of the base config
    cfg.keep_traces = get_bool(js, "sweep", "keep_traces", false);

    if (!js.contains("axes") || !js["axes"].is_array() || js["axes"].empty())
        throw ConfigError("config: key 'sweep.axes' must be a non-empty array");
    if (js["axes"].size() > 2)
        throw ConfigError("config: key 'sweep.axes' supports at most two axes");
    for (const auto& ja : js["axes"]) {
        check_keys(ja, "sweep.axes[]", {"path", "values"});
        SweepAxis axis;
        axis.path = get_str(ja, "sweep.axes[]", "path", "");
        if (axis.path.empty()) throw ConfigError("config: missing key 'sweep.axes[].path'");
        if (!ja.contains("values") || !ja["values"].is_array() || ja["values"].empty())
            throw ConfigError("config: key 'sweep.axes[].values' must be a non-empty array");
        for (const auto& v : ja["values"]) axis.values.push_back(v);
        cfg.axes.push_back(std::move(axis));
    }
    return cfg;
}

SweepConfig load_sweep(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_sweep(j);
}

std::string ValidationBundle::pretty() const {
    std::ostringstream os;
    auto emit = [&os](const CheckItem& c) {
        os << (c.passed ? "[ ok ]" : "[FAIL]") << " " << c.name;
        if (!c.detail.empty()) os << ": " << c.detail;
        os << "\n";
    };
    for (const auto& c : params_report.checks) emit(c);
    for (const auto& c : hypotheses.checks) emit(c);
    for (const auto& c : config_checks) emit(c);
    os << (hard_pass ? "admissible" : "rejected") << "\n";
    return os.str();
}

ValidationBundle validate_scenario(const Scenario& s) {
    ValidationBundle out;
    out.params_report = validate_params(s.params);
    out.hypotheses = check_hypotheses(s.law, default_hypothesis_grid());

    auto add = [&out](std::string name, bool ok, std::string detail) {
        out.config_checks.push_back({std::move(name), ok, std::move(detail)});
    };
    if (s.law.profile) {
        const auto& g = *s.law.profile;
        std::ostringstream os;
        switch (g.kind) {
            case ProfileKind::Linear: os << "linear c = " << g.c; break;
            case ProfileKind::Power: os << "power c = " << g.c << ", p = " << g.p; break;
            case ProfileKind::ExpType: os << "exp_type"; break;
            case ProfileKind::Tabulated: os << "tabulated (" << g.points.size() << " points)"; break;
        }
        os << ", r = " << g.r << ", default eps0 = " << 0.5 * g.r * g.r;
        add("growth_profile", true, os.str());
    }
    add("grid_size", s.grid.n_elements >= 4, "n_elements >= 4");
    add("time_step", s.time.dt > 0.0, "dt > 0");
    add("horizon", s.time.horizon >= 10.0 * s.time.dt, "horizon >= 10 dt");
    add("sample_cadence", s.time.sample_every >= 1, "sample_every >= 1");
    bool initial_ok = true;
    std::string initial_msg = "initial data well-formed";
    try {
        build_initial_displacement(s);
        build_initial_velocity(s);
    } catch (const ConfigError& e) {
        initial_ok = false;
        initial_msg = e.what();
    }
    add("initial_data", initial_ok, initial_msg);
    if (s.analysis.spectral)
        add("spectral_requires_linear_damping", s.law.damping.kind == DampingKind::Linear,
            "spectral oracle applies to linear damping only");

    // hard checks: parameter admissibility, H.I, H.III, structure. The growth
    // profile checks gate the envelope analysis, not the run.
    out.hard_pass = out.params_report.admissible;
    for (const char* name : {"H1_monotone_zero", "H3_sector"}) {
        const CheckItem* c = out.hypotheses.find(name);
        out.hard_pass = out.hard_pass && c && c->passed;
    }
    for (const auto& c : out.config_checks) out.hard_pass = out.hard_pass && c.passed;
    return out;
}

Eigen::VectorXd build_initial_displacement(const Scenario& s) {
    return shape_vector(s.grid, s.initial.shape, s.initial.amplitude, s.initial.values,
                        s.initial.slopes, "initial");
}

Eigen::VectorXd build_initial_velocity(const Scenario& s) {
    return shape_vector(s.grid, s.initial.velocity_shape, s.initial.velocity_amplitude,
                        s.initial.velocity_values, s.initial.velocity_slopes, "initial velocity");
}

} // namespace diskbeam
