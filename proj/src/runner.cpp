#include "diskbeam/runner.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <thread>

#include "diskbeam/envelope.hpp"
#include "diskbeam/errors.hpp"
#include "diskbeam/functionals.hpp"
#include "diskbeam/spectral.hpp"

namespace diskbeam {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string content_hash(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

json fit_to_json(const RateFit& f) {
    json j;
    j["rate_or_exponent"] = f.rate_or_exponent;
    j["prefactor"] = f.prefactor;
    j["quality"] = f.quality;
    j["window"] = {f.window_start, f.window_end};
    return j;
}

json envelope_to_json(const EnvelopeFit& fit) {
    json j;
    const char* kind = "linear";
    switch (fit.profile.kind) {
        case ProfileKind::Linear: kind = "linear"; break;
        case ProfileKind::Power: kind = "power"; break;
        case ProfileKind::ExpType: kind = "exp_type"; break;
        case ProfileKind::Tabulated: kind = "tabulated"; break;
    }
    j["profile"] = kind;
    j["eps0"] = fit.eps0;
    j["feasible"] = fit.feasible;
    j["certified_rate"] = fit.certified_rate;
    if (fit.feasible) {
        j["k1"] = fit.k1;
        j["k2"] = fit.k2;
        j["k3"] = fit.k3;
        j["dominance_margin"] = fit.dominance_margin;
    }
    if (!fit.message.empty()) j["message"] = fit.message;
    return j;
}

/// Tip values of the highest spatial derivatives of the initial data; the
/// domain-compatibility residuals are reported, not enforced.
std::pair<double, double> compatibility_residuals(const Scenario& s, const Eigen::VectorXd& y0,
                                                  const Eigen::VectorXd& v0) {
    const Grid& g = s.grid;
    const double h = g.h();
    const int n = g.n_elements;
    const double u1 = n >= 2 ? y0[2 * n - 4] : 0.0;
    const double t1 = n >= 2 ? y0[2 * n - 3] : 0.0;
    const double u2 = y0[2 * n - 2], t2 = y0[2 * n - 1];
    const double yppp = (12.0 * u1 + 6.0 * h * t1 - 12.0 * u2 + 6.0 * h * t2) / (h * h * h);
    const double ypp = (6.0 * u1 - 6.0 * u2) / (h * h) + (2.0 * t1 + 4.0 * t2) / h;
    const double moment = ypp + s.law.damping_value(v0[2 * n - 1]);
    return {yppp, moment};
}

struct Execution {
    json summary;
    int code = 0;
    std::vector<FunctionalSample> samples;
    bool envelope_requested = false;
    EnvelopeFit envelope;
    double envelope_e00 = 0.0;
};

json validation_to_json(const ValidationBundle& v) {
    json checks = json::array();
    auto emit = [&checks](const CheckItem& c) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    };
    for (const auto& c : v.params_report.checks) emit(c);
    for (const auto& c : v.hypotheses.checks) emit(c);
    for (const auto& c : v.config_checks) emit(c);
    return {{"checks", checks}, {"admissible", v.hard_pass}};
}

GrowthProfile resolve_envelope_profile(const Scenario& s) {
    const std::string& kind = s.analysis.envelope_profile;
    if (kind == "auto") {
        if (!s.law.profile) throw DataError("no growth profile attached to the damping law");
        return *s.law.profile;
    }
    if (kind == "linear") return GrowthProfile::linear(1.0);
    if (kind == "power")
        return GrowthProfile::power(1.0, s.law.damping.kind == DampingKind::Power ? s.law.damping.p : 3.0);
    if (kind == "exp_type") return GrowthProfile::exp_type();
    throw DataError("no envelope profile requested");
}

Execution execute(const Scenario& s) {
    Execution ex;
    const auto t_begin = std::chrono::steady_clock::now();
    json& summary = ex.summary;
    summary["schema_version"] = kSchemaVersion;
    summary["config"] = s.echo;
    summary["config_hash"] = content_hash(s.echo.dump());

    const ValidationBundle val = validate_scenario(s);
    summary["validation"] = validation_to_json(val);
    if (!val.hard_pass) {
        summary["run"] = {{"status", "rejected"}};
        ex.code = 2;
        return ex;
    }

    const Operators ops = assemble(s.params, s.grid);
    const Eigen::VectorXd y0 = build_initial_displacement(s);
    const Eigen::VectorXd v0 = build_initial_velocity(s);
    const auto [shear_res, moment_res] = compatibility_residuals(s, y0, v0);
    summary["validation"]["compatibility"] = {{"shear_residual", shear_res},
                                              {"moment_residual", moment_res}};

    SimOptions opts;
    opts.mode = s.mode;
    opts.dt = s.time.dt;
    opts.horizon = s.time.horizon;
    opts.sample_every = s.time.sample_every;
    const Trace trace = simulate(ops, s.law, opts, y0, v0, s.params.omega0);
    ex.samples = evaluate_series(trace, ops, s.params, s.law);

    json run;
    run["mode"] = s.mode == Mode::Subsystem ? "subsystem" : "coupled";
    run["n_samples"] = ex.samples.size();
    run["status"] = trace.failed ? "step_failure" : "ok";
    if (ex.samples.size() >= 2) {
        double worst_dV = 0.0;
        for (size_t i = 1; i < ex.samples.size(); ++i)
            worst_dV = std::max(worst_dV, ex.samples[i].V - ex.samples[i - 1].V);
        run["V_monotone"] = worst_dV <= 1e-8 * (ex.samples.front().V + 1.0);
        run["worst_V_increment"] = worst_dV;
    }
    if (trace.failed) {
        run["failure"] = {{"t", trace.failure.t},
                          {"what", trace.failure.what},
                          {"residual_history", trace.failure.residual_history}};
        ex.code = 3;
    }
    summary["run"] = run;

    if (!ex.samples.empty()) {
        const auto& last = ex.samples.back();
        summary["final"] = {{"t", last.t},       {"E", last.E},
                            {"E0", last.E0},     {"F", last.F},
                            {"V", last.V},       {"omega", last.omega},
                            {"tip_slope_velocity", last.tip_slope_velocity}};
        summary["initial"] = {{"E", ex.samples.front().E},
                              {"E0", ex.samples.front().E0},
                              {"V", ex.samples.front().V}};
    }
    if (ex.samples.size() >= 2) {
        const DissipationResiduals res = dissipation_residuals(ex.samples);
        summary["residuals"] = {{"max_normalized_E", res.max_normalized_E},
                                {"max_normalized_V", res.max_normalized_V}};
    }

    // rate fits and decay classification on the E0 series
    std::vector<double> ts, e0s, vnorm, ogap;
    ts.reserve(ex.samples.size());
    for (const auto& smp : ex.samples) {
        ts.push_back(smp.t);
        e0s.push_back(smp.E0);
        vnorm.push_back(std::sqrt(std::max(2.0 * smp.E, 0.0)));
        ogap.push_back(std::abs(smp.omega - s.params.varpi));
    }
    json fits;
    for (const std::string& name : s.analysis.rate_fits) {
        const RateKind kind = name == "exponential" ? RateKind::Exponential
                              : name == "power"     ? RateKind::Power
                                                    : RateKind::Logarithmic;
        try {
            fits[name] = fit_to_json(fit_rates(ts, e0s, kind));
        } catch (const DataError& e) {
            fits[name] = {{"error", e.what()}};
        }
    }
    if (s.mode == Mode::Coupled) {
        try {
            fits["state_norm_exponential"] = fit_to_json(fit_rates(ts, vnorm, RateKind::Exponential));
        } catch (const DataError& e) {
            fits["state_norm_exponential"] = {{"error", e.what()}};
        }
        try {
            fits["omega_gap_exponential"] = fit_to_json(fit_rates(ts, ogap, RateKind::Exponential));
        } catch (const DataError& e) {
            fits["omega_gap_exponential"] = {{"error", e.what()}};
        }
    }
    summary["fits"] = fits;
    summary["decay_kind"] = classify_decay(ts, e0s);

    if (s.analysis.envelope_profile != "none" && !trace.failed && ex.samples.size() >= 2) {
        try {
            const GrowthProfile prof = resolve_envelope_profile(s);
            EnvelopeOptions eopts;
            eopts.eps0 = s.analysis.eps0;
            eopts.search_eps0 = s.analysis.eps0_search;
            ex.envelope = calibrate_envelope(ts, e0s, prof, eopts);
            ex.envelope_requested = true;
            ex.envelope_e00 = e0s.front();
            summary["envelope"] = envelope_to_json(ex.envelope);
            if (s.analysis.require_envelope && !ex.envelope.feasible && ex.code == 0) ex.code = 4;
        } catch (const DataError& e) {
            summary["envelope"] = {{"error", e.what()}};
            if (s.analysis.require_envelope && ex.code == 0) ex.code = 4;
        }
    }

    if (s.analysis.spectral) {
        const SpectralResult sp = spectral_abscissa(ops, s.law.damping.c);
        summary["spectral"] = {{"max_real_part", sp.max_real_part},
                               {"n_eigenvalues", sp.eigenvalues.size()}};
    }

    const auto t_end = std::chrono::steady_clock::now();
    summary["wall_clock_s"] = std::chrono::duration<double>(t_end - t_begin).count();
    return ex;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<FunctionalSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    out << "t,E,E0,F,V,omega,tip_slope_velocity,boundary_flux,torque_flux\n";
    for (const auto& s : samples) {
        out << format_double(s.t) << ',' << format_double(s.E) << ',' << format_double(s.E0) << ','
            << format_double(s.F) << ',' << format_double(s.V) << ',' << format_double(s.omega)
            << ',' << format_double(s.tip_slope_velocity) << ',' << format_double(s.boundary_flux)
            << ',' << format_double(s.torque_flux) << '\n';
    }
}

void write_envelope_csv(const std::filesystem::path& path, const Execution& ex) {
    const DecayCalculus calc(ex.envelope.profile, ex.envelope.eps0);
    const double t0 = ex.samples.front().t;
    std::ofstream out(path, std::ios::binary);
    out << "t,E0,envelope\n";
    for (const auto& s : ex.samples) {
        const double env = ex.envelope.value(calc, s.t - t0) * ex.envelope_e00;
        out << format_double(s.t) << ',' << format_double(s.E0) << ',' << format_double(env)
            << '\n';
    }
}

void write_summary(const std::filesystem::path& path, const json& summary) {
    std::ofstream out(path, std::ios::binary);
    out << summary.dump(2) << '\n';
}

} // namespace

RunOutcome run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    Execution ex = execute(scenario);
    if (ex.code != 2) {
        write_trace_csv(out_dir / "trace.csv", ex.samples);
        if (ex.envelope_requested && ex.envelope.feasible && !ex.samples.empty())
            write_envelope_csv(out_dir / "envelope.csv", ex);
    }
    write_summary(out_dir / "summary.json", ex.summary);
    return {std::move(ex.summary), ex.code};
}

namespace {

void patch_path(json& cfg, const std::string& path, const json& value) {
    json* node = &cfg;
    size_t pos = 0;
    while (true) {
        const size_t dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        if (key.empty()) throw ConfigError("sweep axis path has an empty segment: " + path);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object())
            throw ConfigError("sweep axis path does not reach an object: " + path);
        node = &(*node)[key];
        pos = dot + 1;
    }
}

std::string cell_metric(const json& summary, std::initializer_list<const char*> keys) {
    const json* node = &summary;
    for (const char* k : keys) {
        if (!node->contains(k)) return "";
        node = &(*node)[k];
    }
    if (node->is_number()) return format_double(node->get<double>());
    if (node->is_boolean()) return node->get<bool>() ? "true" : "false";
    if (node->is_string()) return node->get<std::string>();
    return "";
}

} // namespace

RunOutcome run_sweep(const SweepConfig& sweep, const std::filesystem::path& out_dir, int workers) {
    std::filesystem::create_directories(out_dir);

    std::vector<size_t> shape;
    size_t n_cells = 1;
    for (const auto& axis : sweep.axes) {
        shape.push_back(axis.values.size());
        n_cells *= axis.values.size();
    }

    struct Cell {
        std::vector<json> axis_values;
        json summary;
        std::string status = "ok";
    };
    std::vector<Cell> cells(n_cells);
    for (size_t idx = 0; idx < n_cells; ++idx) {
        size_t rem = idx;
        std::vector<size_t> sub(shape.size());
        for (size_t a = shape.size(); a-- > 0;) {
            sub[a] = rem % shape[a];
            rem /= shape[a];
        }
        for (size_t a = 0; a < shape.size(); ++a)
            cells[idx].axis_values.push_back(sweep.axes[a].values[sub[a]]);
    }

    std::atomic<size_t> next{0};
    auto work = [&]() {
        while (true) {
            const size_t idx = next.fetch_add(1);
            if (idx >= n_cells) return;
            Cell& cell = cells[idx];
            try {
                json cfg = sweep.base;
                for (size_t a = 0; a < sweep.axes.size(); ++a)
                    patch_path(cfg, sweep.axes[a].path, cell.axis_values[a]);
                const Scenario sc = parse_scenario(cfg);
                Execution ex = execute(sc);
                cell.summary = std::move(ex.summary);
                cell.status = ex.code == 0   ? "ok"
                              : ex.code == 2 ? "rejected"
                              : ex.code == 3 ? "step_failure"
                                             : "analysis_failure";
                if (sweep.keep_traces) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "cell_%04zu", idx);
                    const auto dir = out_dir / "cells" / name;
                    std::filesystem::create_directories(dir);
                    write_trace_csv(dir / "trace.csv", ex.samples);
                    write_summary(dir / "summary.json", cell.summary);
                }
            } catch (const std::exception& e) {
                cell.status = std::string("error: ") + e.what();
            }
        }
    };
    const int n_workers = std::max(1, workers);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_workers; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    std::ofstream out(out_dir / "sweep.csv", std::ios::binary);
    for (const auto& axis : sweep.axes) out << axis.path << ',';
    out << "status,admissible,E_final,E0_final,V_final,omega_final,max_residual_E,max_residual_V,"
           "exp_rate,exp_quality,power_exponent,power_quality,log_quality,decay_kind,"
           "envelope_feasible,envelope_k1,spectral_abscissa\n";
    for (const auto& cell : cells) {
        for (const auto& v : cell.axis_values) {
            if (v.is_number()) out << format_double(v.get<double>());
            else out << v.dump();
            out << ',';
        }
        const json& s = cell.summary;
        out << cell.status << ',' << cell_metric(s, {"validation", "admissible"}) << ','
            << cell_metric(s, {"final", "E"}) << ',' << cell_metric(s, {"final", "E0"}) << ','
            << cell_metric(s, {"final", "V"}) << ',' << cell_metric(s, {"final", "omega"}) << ','
            << cell_metric(s, {"residuals", "max_normalized_E"}) << ','
            << cell_metric(s, {"residuals", "max_normalized_V"}) << ','
            << cell_metric(s, {"fits", "exponential", "rate_or_exponent"}) << ','
            << cell_metric(s, {"fits", "exponential", "quality"}) << ','
            << cell_metric(s, {"fits", "power", "rate_or_exponent"}) << ','
            << cell_metric(s, {"fits", "power", "quality"}) << ','
            << cell_metric(s, {"fits", "logarithmic", "quality"}) << ','
            << cell_metric(s, {"decay_kind"}) << ','
            << cell_metric(s, {"envelope", "feasible"}) << ','
            << cell_metric(s, {"envelope", "k1"}) << ','
            << cell_metric(s, {"spectral", "max_real_part"}) << '\n';
    }

    json summary;
    summary["n_cells"] = n_cells;
    summary["table"] = (out_dir / "sweep.csv").string();
    return {std::move(summary), 0};
}

} // namespace diskbeam
