#pragma once

// Run configuration (JSON) and sweep-table serialization.
//
// Config schema, every key optional; omitted keys keep the defaults shown by
// `default_config_json()`:
//
//   geometry:    { bs: [x,y,z], ris: [x,y,z], ue: [x,y,z] }            meters
//   budget:      { carrier_hz, pathloss_exponent, reference_gain_db,
//                  noise_dbm, tx_dbm }
//   bs_fas, ue_fas, relay_fas:
//                { spacing_wavelengths, axis: [x,y,z] }
//   ris:         { rows, cols, element_spacing_wavelengths }
//   rician:      { k_factor }
//   max_ports:   ports drawn per trial (shared by every N of a sweep)
//   sweep:       { architectures: [names], n_values: [..], p_dbm_values: [..],
//                  trials }
//   calibration: { target_bps_hz, trials, file }
//   seed, workers, output, format ("csv" | "json")
//
// Unknown keys are rejected with their JSON-pointer location.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fasris/architectures.hpp"
#include "fasris/channel.hpp"
#include "fasris/experiment.hpp"

namespace fasris {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr double kBaselineTarget = 2.1;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Csv, Json };

struct RunConfig {
    Scenario scenario;
    SweepSpec sweep;
    /// True once reference_gain_db came from the config or a calibration file.
    bool reference_gain_fixed = false;
    double calibration_target = kBaselineTarget;
    std::optional<std::size_t> calibration_trials;
    std::optional<std::string> calibration_file;
    std::optional<std::string> output;
    OutputFormat format = OutputFormat::Csv;
    std::size_t workers = 1;

    [[nodiscard]] std::size_t effective_calibration_trials() const {
        return calibration_trials.value_or(sweep.trials);
    }
};

inline RunConfig default_run_config() {
    RunConfig c;
    c.scenario.ports = 100;
    c.scenario.draw_ports = 100;
    return c;
}

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError("config: expected an object at " + (where.empty() ? "/" : where));
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("config: unknown key at " + where + "/" + key);
    }
}

template <class T>
T get_as(const json& v, const std::string& where) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: wrong type at " + where);
    }
}

inline double get_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("config: expected a number at " + where);
    return v.get<double>();
}

inline std::size_t get_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError("config: expected a non-negative integer at " + where);
    return v.get<std::size_t>();
}

inline Vec3 get_vec3(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 3) throw ConfigError("config: expected [x, y, z] at " + where);
    return {get_number(v[0], where + "/0"), get_number(v[1], where + "/1"), get_number(v[2], where + "/2")};
}

inline json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline void apply_layout(const json& j, const std::string& where, ArrayLayout& layout) {
    check_keys(j, where, {"spacing_wavelengths", "axis"});
    if (j.contains("spacing_wavelengths"))
        layout.spacing_wavelengths = get_number(j["spacing_wavelengths"], where + "/spacing_wavelengths");
    if (j.contains("axis")) layout.axis = get_vec3(j["axis"], where + "/axis");
}

}  // namespace detail

/// Applies a JSON config document on top of `base`.
inline RunConfig apply_config(const nlohmann::json& j, RunConfig base) {
    using namespace detail;
    check_keys(j, "", {"geometry", "budget", "bs_fas", "ue_fas", "relay_fas", "ris", "rician", "max_ports", "sweep",
                       "calibration", "seed", "workers", "output", "format"});
    Scenario& s = base.scenario;
    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        check_keys(g, "/geometry", {"bs", "ris", "ue"});
        if (g.contains("bs")) s.geometry.bs_position = get_vec3(g["bs"], "/geometry/bs");
        if (g.contains("ris")) s.geometry.ris_position = get_vec3(g["ris"], "/geometry/ris");
        if (g.contains("ue")) s.geometry.ue_position = get_vec3(g["ue"], "/geometry/ue");
    }
    if (j.contains("budget")) {
        const auto& b = j["budget"];
        check_keys(b, "/budget", {"carrier_hz", "pathloss_exponent", "reference_gain_db", "noise_dbm", "tx_dbm"});
        const bool carrier_changed = b.contains("carrier_hz");
        if (carrier_changed) s.budget.carrier_hz = get_number(b["carrier_hz"], "/budget/carrier_hz");
        if (b.contains("pathloss_exponent"))
            s.budget.pathloss_exponent = get_number(b["pathloss_exponent"], "/budget/pathloss_exponent");
        if (b.contains("reference_gain_db")) {
            s.budget.reference_gain_db = get_number(b["reference_gain_db"], "/budget/reference_gain_db");
            base.reference_gain_fixed = true;
        } else if (carrier_changed && !base.reference_gain_fixed) {
            s.budget.reference_gain_db = LinkBudget::free_space_reference_db(s.budget.carrier_hz);
        }
        if (b.contains("noise_dbm")) s.budget.noise_dbm = get_number(b["noise_dbm"], "/budget/noise_dbm");
        if (b.contains("tx_dbm")) s.budget.tx_dbm = get_number(b["tx_dbm"], "/budget/tx_dbm");
    }
    if (j.contains("bs_fas")) apply_layout(j["bs_fas"], "/bs_fas", s.bs_fas);
    if (j.contains("ue_fas")) apply_layout(j["ue_fas"], "/ue_fas", s.ue_fas);
    if (j.contains("relay_fas")) apply_layout(j["relay_fas"], "/relay_fas", s.relay_fas);
    if (j.contains("ris")) {
        const auto& r = j["ris"];
        check_keys(r, "/ris", {"rows", "cols", "element_spacing_wavelengths"});
        if (r.contains("rows")) s.ris.rows = get_count(r["rows"], "/ris/rows");
        if (r.contains("cols")) s.ris.cols = get_count(r["cols"], "/ris/cols");
        if (r.contains("element_spacing_wavelengths"))
            s.ris.element_spacing_wavelengths =
                get_number(r["element_spacing_wavelengths"], "/ris/element_spacing_wavelengths");
    }
    if (j.contains("rician")) {
        check_keys(j["rician"], "/rician", {"k_factor"});
        if (j["rician"].contains("k_factor")) s.rician.k_factor = get_number(j["rician"]["k_factor"], "/rician/k_factor");
    }
    if (j.contains("max_ports")) {
        s.draw_ports = get_count(j["max_ports"], "/max_ports");
        s.ports = s.draw_ports;
    }
    if (j.contains("sweep")) {
        const auto& w = j["sweep"];
        check_keys(w, "/sweep", {"architectures", "n_values", "p_dbm_values", "trials"});
        if (w.contains("architectures")) {
            if (!w["architectures"].is_array()) throw ConfigError("config: expected an array at /sweep/architectures");
            base.sweep.architectures.clear();
            for (std::size_t i = 0; i < w["architectures"].size(); ++i) {
                const std::string where = "/sweep/architectures/" + std::to_string(i);
                const auto name = get_as<std::string>(w["architectures"][i], where);
                const auto kind = parse_architecture(name);
                if (!kind) throw ConfigError("config: unknown architecture '" + name + "' at " + where);
                base.sweep.architectures.push_back(*kind);
            }
        }
        if (w.contains("n_values")) {
            if (!w["n_values"].is_array()) throw ConfigError("config: expected an array at /sweep/n_values");
            base.sweep.n_values.clear();
            for (std::size_t i = 0; i < w["n_values"].size(); ++i)
                base.sweep.n_values.push_back(get_count(w["n_values"][i], "/sweep/n_values/" + std::to_string(i)));
        }
        if (w.contains("p_dbm_values")) {
            if (!w["p_dbm_values"].is_array()) throw ConfigError("config: expected an array at /sweep/p_dbm_values");
            base.sweep.p_dbm_values.clear();
            for (std::size_t i = 0; i < w["p_dbm_values"].size(); ++i)
                base.sweep.p_dbm_values.push_back(
                    get_number(w["p_dbm_values"][i], "/sweep/p_dbm_values/" + std::to_string(i)));
        }
        if (w.contains("trials")) base.sweep.trials = get_count(w["trials"], "/sweep/trials");
    }
    if (j.contains("calibration")) {
        const auto& c = j["calibration"];
        check_keys(c, "/calibration", {"target_bps_hz", "trials", "file"});
        if (c.contains("target_bps_hz")) base.calibration_target = get_number(c["target_bps_hz"], "/calibration/target_bps_hz");
        if (c.contains("trials")) base.calibration_trials = get_count(c["trials"], "/calibration/trials");
        if (c.contains("file")) base.calibration_file = get_as<std::string>(c["file"], "/calibration/file");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("config: expected an unsigned integer at /seed");
        base.sweep.master_seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("workers")) base.workers = get_count(j["workers"], "/workers");
    if (j.contains("output")) base.output = get_as<std::string>(j["output"], "/output");
    if (j.contains("format")) {
        const auto f = get_as<std::string>(j["format"], "/format");
        if (f == "csv")
            base.format = OutputFormat::Csv;
        else if (f == "json")
            base.format = OutputFormat::Json;
        else
            throw ConfigError("config: format must be \"csv\" or \"json\" at /format");
    }
    return base;
}

inline RunConfig parse_config_text(const std::string& text, RunConfig base = default_run_config()) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    return apply_config(j, std::move(base));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = default_run_config()) {
    return parse_config_text(read_file(path), std::move(base));
}

/// Fully resolved configuration, suitable for a manifest or as a config file.
inline nlohmann::json config_to_json(const RunConfig& c) {
    using detail::to_json;
    const Scenario& s = c.scenario;
    nlohmann::json j;
    j["geometry"] = {{"bs", to_json(s.geometry.bs_position)},
                     {"ris", to_json(s.geometry.ris_position)},
                     {"ue", to_json(s.geometry.ue_position)}};
    j["budget"] = {{"carrier_hz", s.budget.carrier_hz},
                   {"pathloss_exponent", s.budget.pathloss_exponent},
                   {"reference_gain_db", s.budget.reference_gain_db},
                   {"noise_dbm", s.budget.noise_dbm},
                   {"tx_dbm", s.budget.tx_dbm}};
    auto layout = [](const ArrayLayout& l) {
        return nlohmann::json{{"spacing_wavelengths", l.spacing_wavelengths}, {"axis", to_json(l.axis)}};
    };
    j["bs_fas"] = layout(s.bs_fas);
    j["ue_fas"] = layout(s.ue_fas);
    j["relay_fas"] = layout(s.relay_fas);
    j["ris"] = {{"rows", s.ris.rows}, {"cols", s.ris.cols}, {"element_spacing_wavelengths", s.ris.element_spacing_wavelengths}};
    j["rician"] = {{"k_factor", s.rician.k_factor}};
    j["max_ports"] = s.generated_ports();
    nlohmann::json arch = nlohmann::json::array();
    for (auto k : c.sweep.architectures) arch.push_back(std::string(to_string(k)));
    j["sweep"] = {{"architectures", arch},
                  {"n_values", c.sweep.n_values},
                  {"p_dbm_values", c.sweep.p_dbm_values},
                  {"trials", c.sweep.trials}};
    nlohmann::json cal = {{"target_bps_hz", c.calibration_target}, {"trials", c.effective_calibration_trials()}};
    if (c.calibration_file) cal["file"] = *c.calibration_file;
    j["calibration"] = cal;
    j["seed"] = c.sweep.master_seed;
    j["format"] = c.format == OutputFormat::Csv ? "csv" : "json";
    return j;
}

inline nlohmann::json default_config_json() { return config_to_json(default_run_config()); }

// ---------------------------------------------------------------------------
// Calibration files

inline nlohmann::json calibration_to_json(const CalibrationResult& r) {
    return {{"reference_gain_db", r.reference_gain_db}, {"achieved_baseline", r.achieved_baseline},
            {"target_baseline", r.target_baseline},     {"iterations", r.iterations},
            {"trials", r.trials},                       {"seed", r.master_seed}};
}

inline CalibrationResult calibration_from_json(const nlohmann::json& j) {
    detail::check_keys(j, "", {"reference_gain_db", "achieved_baseline", "target_baseline", "iterations", "trials", "seed"});
    if (!j.contains("reference_gain_db")) throw ConfigError("calibration file: missing reference_gain_db");
    CalibrationResult r;
    r.reference_gain_db = detail::get_number(j["reference_gain_db"], "/reference_gain_db");
    if (j.contains("achieved_baseline")) r.achieved_baseline = detail::get_number(j["achieved_baseline"], "/achieved_baseline");
    if (j.contains("target_baseline")) r.target_baseline = detail::get_number(j["target_baseline"], "/target_baseline");
    if (j.contains("iterations")) r.iterations = detail::get_count(j["iterations"], "/iterations");
    if (j.contains("trials")) r.trials = detail::get_count(j["trials"], "/trials");
    if (j.contains("seed")) r.master_seed = j["seed"].get<std::uint64_t>();
    return r;
}

inline CalibrationResult load_calibration_file(const std::string& path) {
    try {
        return calibration_from_json(nlohmann::json::parse(read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("calibration file " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Sweep tables

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kCsvHeader = "architecture,N,P_dbm,mean_bps_hz,ci95,trials,seed";

/// Fixed column order, %.17g floats, LF line endings.
inline std::string sweep_to_csv(const SweepTable& t) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& c : t.cells) {
        out += to_string(c.architecture);
        out += ',' + std::to_string(c.ports);
        out += ',' + format_double(c.p_dbm);
        out += ',' + format_double(c.stats.mean_throughput);
        out += ',' + format_double(c.stats.ci95_halfwidth);
        out += ',' + std::to_string(c.stats.trials);
        out += ',' + std::to_string(t.master_seed);
        out += '\n';
    }
    return out;
}

inline nlohmann::json sweep_to_json(const SweepTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : t.cells)
        rows.push_back({{"architecture", std::string(to_string(c.architecture))},
                        {"N", c.ports},
                        {"P_dbm", c.p_dbm},
                        {"mean_bps_hz", c.stats.mean_throughput},
                        {"ci95", c.stats.ci95_halfwidth},
                        {"trials", c.stats.trials},
                        {"seed", t.master_seed}});
    return {{"seed", t.master_seed}, {"trials", t.trials}, {"rows", rows}};
}

inline std::string render_sweep(const SweepTable& t, OutputFormat f) {
    return f == OutputFormat::Csv ? sweep_to_csv(t) : sweep_to_json(t).dump(2) + "\n";
}

}  // namespace fasris
