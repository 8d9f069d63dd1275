#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "diskbeam/errors.hpp"
#include "diskbeam/runner.hpp"
#include "diskbeam/scenario.hpp"

// Exit codes: 0 success, 2 validation failure, 3 runtime/step failure,
// 4 analysis failure (e.g. a required envelope is infeasible).

namespace {

int cmd_validate(const std::string& config) {
    const diskbeam::Scenario s = diskbeam::load_scenario(config);
    const diskbeam::ValidationBundle v = diskbeam::validate_scenario(s);
    std::cout << v.pretty();
    return v.hard_pass ? 0 : 2;
}

int cmd_run(const std::string& config, const std::string& out_dir) {
    const diskbeam::Scenario s = diskbeam::load_scenario(config);
    const diskbeam::RunOutcome outcome = diskbeam::run_scenario(s, out_dir);
    const auto& run = outcome.summary.contains("run") ? outcome.summary["run"] : nlohmann::json{};
    std::cout << "status: " << (run.contains("status") ? run["status"].get<std::string>() : "?")
              << "\noutputs: " << out_dir << "\n";
    return outcome.exit_code;
}

int cmd_sweep(const std::string& config, const std::string& out_dir, int workers) {
    const diskbeam::SweepConfig s = diskbeam::load_sweep(config);
    const diskbeam::RunOutcome outcome = diskbeam::run_sweep(s, out_dir, workers);
    std::cout << "cells: " << outcome.summary["n_cells"].get<size_t>()
              << "\ntable: " << outcome.summary["table"].get<std::string>() << "\n";
    return outcome.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"disk-beam boundary feedback simulator and decay-envelope verifier"};
    app.require_subcommand(1);

    std::string config, out_dir = "out";
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;

    auto* validate = app.add_subcommand("validate", "validate a scenario config");
    validate->add_option("config", config, "scenario config file")->required();

    auto* run = app.add_subcommand("run", "run a scenario and write trace/summary files");
    run->add_option("config", config, "scenario config file")->required();
    run->add_option("--out", out_dir, "output directory");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    sweep->add_option("config", config, "sweep config file")->required();
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--workers", workers, "concurrent cells");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) return cmd_validate(config);
        if (run->parsed()) return cmd_run(config, out_dir);
        if (sweep->parsed()) return cmd_sweep(config, out_dir, workers);
    } catch (const diskbeam::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
