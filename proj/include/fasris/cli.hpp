#pragma once

// Command-line front end. `run_cli` is the whole program; tools/fasris.cpp
// only forwards argv and the standard streams.
//
//   fasris figure {2|3}   sweep for one figure, auto-calibrating G0 if needed
//   fasris sweep          sweep given by the config's "sweep" block
//   fasris calibrate      fit G0 and write a calibration file
//   fasris validate       invariant/oracle suite, exit 1 on any failure
//
// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fasris/config.hpp"
#include "fasris/experiment.hpp"
#include "fasris/validation.hpp"

namespace fasris {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitConfig = 2, kExitIo = 3 };

struct CliOverrides {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::size_t> workers;
    std::optional<std::string> calibration;
};

inline RunConfig resolve_config(const CliOverrides& o) {
    RunConfig cfg = default_run_config();
    if (o.config) cfg = load_config_file(*o.config, cfg);
    if (o.seed) cfg.sweep.master_seed = *o.seed;
    if (o.trials) {
        cfg.sweep.trials = *o.trials;
        cfg.calibration_trials = *o.trials;
    }
    if (o.out) cfg.output = *o.out;
    if (o.format) cfg.format = *o.format == "json" ? OutputFormat::Json : OutputFormat::Csv;
    if (o.workers) cfg.workers = *o.workers;
    if (o.calibration) cfg.calibration_file = *o.calibration;
    if (cfg.workers == 0) throw ConfigError("config: workers must be >= 1");
    return cfg;
}

/// Scenario with the per-trial draw size the sweep will use, so calibration
/// and the sweep see the same baseline realizations.
inline Scenario draw_scenario(const RunConfig& cfg) {
    Scenario s = cfg.scenario;
    s.draw_ports = std::max(s.generated_ports(), cfg.sweep.max_ports());
    s.validate();
    return s;
}

inline CalibrationResult calibrate_config(const RunConfig& cfg) {
    try {
        return calibrate_reference_gain(cfg.calibration_target, draw_scenario(cfg), cfg.effective_calibration_trials(),
                                        cfg.sweep.master_seed, cfg.workers);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

struct ResolvedGain {
    std::string source;  // "config", "calibration_file" or "auto_calibration"
    std::optional<CalibrationResult> calibration;
};

inline ResolvedGain resolve_reference_gain(RunConfig& cfg, std::ostream& log) {
    ResolvedGain g;
    if (cfg.calibration_file) {
        if (!std::filesystem::exists(*cfg.calibration_file))
            throw IoError("cannot read calibration file " + *cfg.calibration_file);
        g.calibration = load_calibration_file(*cfg.calibration_file);
        g.source = "calibration_file";
    } else if (cfg.reference_gain_fixed) {
        g.source = "config";
        return g;
    } else {
        g.calibration = calibrate_config(cfg);
        g.source = "auto_calibration";
        log << "calibrated G0 = " << format_double(g.calibration->reference_gain_db) << " dB (baseline "
            << format_double(g.calibration->achieved_baseline) << " bps/Hz)\n";
    }
    cfg.scenario.budget.reference_gain_db = g.calibration->reference_gain_db;
    cfg.reference_gain_fixed = true;
    return g;
}

inline nlohmann::json make_manifest(const std::string& command, const RunConfig& cfg, const ResolvedGain& gain,
                                    const std::string& output) {
    nlohmann::json m;
    m["tool"] = "fasris";
    m["version"] = kToolVersion;
    m["command"] = command;
    m["output"] = output;
    m["config"] = config_to_json(cfg);
    m["reference_gain_db"] = cfg.scenario.budget.reference_gain_db;
    m["reference_gain_source"] = gain.source;
    if (gain.calibration) m["calibration"] = calibration_to_json(*gain.calibration);
    return m;
}

inline std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

inline void emit(const RunConfig& cfg, const std::string& body, const nlohmann::json& manifest, std::ostream& out) {
    if (!cfg.output) {
        out << body;
        return;
    }
    write_file(*cfg.output, body);
    write_file(manifest_path(*cfg.output), manifest.dump(2) + "\n");
}

inline int cmd_sweep(RunConfig cfg, const std::string& command, std::ostream& out, std::ostream& err) {
    const ResolvedGain gain = resolve_reference_gain(cfg, err);
    const SweepTable table = run_sweep(cfg.sweep, draw_scenario(cfg), {cfg.workers, false});
    emit(cfg, render_sweep(table, cfg.format), make_manifest(command, cfg, gain, cfg.output.value_or("")), out);
    return kExitOk;
}

inline int cmd_figure(int which, RunConfig cfg, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    if (which == 2)
        spec = figure2_spec();
    else if (which == 3)
        spec = figure3_spec();
    else
        throw ConfigError("figure: unknown figure id " + std::to_string(which) + " (expected 2 or 3)");
    spec.trials = cfg.sweep.trials;
    spec.master_seed = cfg.sweep.master_seed;
    cfg.sweep = spec;
    return cmd_sweep(std::move(cfg), "figure " + std::to_string(which), out, err);
}

inline int cmd_calibrate(RunConfig cfg, std::ostream& out) {
    const CalibrationResult r = calibrate_config(cfg);
    cfg.scenario.budget.reference_gain_db = r.reference_gain_db;
    const std::string body = calibration_to_json(r).dump(2) + "\n";
    const std::optional<std::string> target = cfg.output ? cfg.output : cfg.calibration_file;
    if (!target) {
        out << body;
        return kExitOk;
    }
    write_file(*target, body);
    write_file(manifest_path(*target), make_manifest("calibrate", cfg, {"calibration_file", r}, *target).dump(2) + "\n");
    return kExitOk;
}

inline int cmd_validate(const RunConfig& cfg, InjectedFault fault, std::ostream& out) {
    ValidationOptions opt;
    opt.seed = cfg.sweep.master_seed;
    opt.workers = cfg.workers;
    opt.fault = fault;
    const ValidationReport report = run_validation(cfg.scenario, opt);
    const std::string text = report.to_text();
    out << text;
    if (cfg.output) write_file(*cfg.output, text);
    return report.all_passed() ? kExitOk : kExitValidation;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Monte-Carlo link simulator for FAS and RIS architectures", "fasris"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", kToolVersion);

    CliOverrides o;
    std::uint64_t seed = 0;
    std::size_t trials = 0, workers = 0;
    std::string config, out_path, format, calibration;
    auto* o_config = app.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    auto* o_seed = app.add_option("--seed", seed, "master seed");
    auto* o_trials = app.add_option("--trials", trials, "Monte-Carlo trials per cell")->check(CLI::PositiveNumber);
    auto* o_out = app.add_option("--out", out_path, "output file (default: stdout)");
    auto* o_format = app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    auto* o_workers = app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    auto* o_cal = app.add_option("--calibration", calibration, "calibration file to read G0 from");

    int which = 0;
    auto* figure = app.add_subcommand("figure", "reproduce a figure's sweep (2: ports, 3: power)");
    figure->add_option("which", which, "figure id")->required();
    auto* sweep = app.add_subcommand("sweep", "run the sweep from the config");
    auto* calibrate = app.add_subcommand("calibrate", "fit the reference gain G0");
    auto* validate = app.add_subcommand("validate", "run the validation suite");
    std::string fault_name = "none";
    validate
        ->add_option("--inject-fault", fault_name,
                     "test hook: make one check fail (bessel, sqrt, gaussian, correlation, dominance, oracle, determinism)")
        ->check([](const std::string& v) { return parse_fault(v) ? std::string() : "unknown fault '" + v + "'"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (o_config->count()) o.config = config;
    if (o_seed->count()) o.seed = seed;
    if (o_trials->count()) o.trials = trials;
    if (o_out->count()) o.out = out_path;
    if (o_format->count()) o.format = format;
    if (o_workers->count()) o.workers = workers;
    if (o_cal->count()) o.calibration = calibration;

    try {
        RunConfig cfg = resolve_config(o);
        if (figure->parsed()) return cmd_figure(which, std::move(cfg), out, err);
        if (sweep->parsed()) return cmd_sweep(std::move(cfg), "sweep", out, err);
        if (calibrate->parsed()) return cmd_calibrate(std::move(cfg), out);
        return cmd_validate(cfg, *parse_fault(fault_name), out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CalibrationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

}  // namespace fasris
