#include <gtest/gtest.h>

#include <filesystem>

#include "fasris/config.hpp"

using namespace fasris;

TEST(Config, DefaultsMatchReferenceScenario) {
    const RunConfig c = default_run_config();
    EXPECT_EQ(c.scenario.ports, 100u);
    EXPECT_EQ(c.scenario.generated_ports(), 100u);
    EXPECT_EQ(c.scenario.geometry.bs_position, (Vec3{0, 0, 5}));
    EXPECT_EQ(c.scenario.geometry.ris_position, (Vec3{15, 15, 5}));
    EXPECT_EQ(c.scenario.geometry.ue_position, (Vec3{50, 0, 0}));
    EXPECT_EQ(c.scenario.budget.carrier_hz, 28e9);
    EXPECT_EQ(c.scenario.budget.pathloss_exponent, 2.2);
    EXPECT_EQ(c.scenario.budget.noise_dbm, -85.0);
    EXPECT_EQ(c.scenario.rician.k_factor, 1.0);
    EXPECT_EQ(c.scenario.bs_fas.spacing_wavelengths, 0.25);
    EXPECT_EQ(c.scenario.ris.elements(), 25u);
    EXPECT_FALSE(c.reference_gain_fixed);
    EXPECT_EQ(c.calibration_target, 2.1);
    EXPECT_EQ(c.effective_calibration_trials(), 5000u);
}

TEST(Config, OverridesApply) {
    const auto c = parse_config_text(R"({
        "geometry": {"ue": [40, 5, 1.5]},
        "budget": {"pathloss_exponent": 2.5, "reference_gain_db": -30, "noise_dbm": -90},
        "bs_fas": {"spacing_wavelengths": 0.5},
        "ris": {"rows": 4, "cols": 8},
        "rician": {"k_factor": 3},
        "max_ports": 64,
        "sweep": {"architectures": ["dual_fas", "conventional"], "n_values": [16, 64], "p_dbm_values": [5, 15], "trials": 77},
        "calibration": {"target_bps_hz": 2.5, "trials": 300},
        "seed": 7, "workers": 3, "output": "x.csv", "format": "json"
    })");
    EXPECT_EQ(c.scenario.geometry.ue_position, (Vec3{40, 5, 1.5}));
    EXPECT_EQ(c.scenario.budget.pathloss_exponent, 2.5);
    EXPECT_EQ(c.scenario.budget.reference_gain_db, -30.0);
    EXPECT_TRUE(c.reference_gain_fixed);
    EXPECT_EQ(c.scenario.bs_fas.spacing_wavelengths, 0.5);
    EXPECT_EQ(c.scenario.ris.elements(), 32u);
    EXPECT_EQ(c.scenario.rician.k_factor, 3.0);
    EXPECT_EQ(c.scenario.generated_ports(), 64u);
    EXPECT_EQ(c.sweep.architectures, (std::vector{ArchitectureKind::DualFas, ArchitectureKind::Conventional}));
    EXPECT_EQ(c.sweep.n_values, (std::vector<std::size_t>{16, 64}));
    EXPECT_EQ(c.sweep.trials, 77u);
    EXPECT_EQ(c.calibration_target, 2.5);
    EXPECT_EQ(c.effective_calibration_trials(), 300u);
    EXPECT_EQ(c.sweep.master_seed, 7u);
    EXPECT_EQ(c.workers, 3u);
    EXPECT_EQ(c.output, "x.csv");
    EXPECT_EQ(c.format, OutputFormat::Json);
}

TEST(Config, CarrierChangeMovesFreeSpaceDefault) {
    const auto c = parse_config_text(R"({"budget": {"carrier_hz": 3.5e9}})");
    EXPECT_NEAR(c.scenario.budget.reference_gain_db, LinkBudget::free_space_reference_db(3.5e9), 1e-12);
    EXPECT_FALSE(c.reference_gain_fixed);
}

TEST(Config, UnknownKeysReportLocation) {
    auto message = [](const char* text) {
        try {
            parse_config_text(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message(R"({"bogus": 1})").find("/bogus"), std::string::npos);
    EXPECT_NE(message(R"({"ris": {"colz": 3}})").find("/ris/colz"), std::string::npos);
    EXPECT_NE(message(R"({"sweep": {"architectures": ["dual_fas", "nope"]}})").find("/sweep/architectures/1"),
              std::string::npos);
    EXPECT_NE(message(R"({"geometry": {"bs": [1, 2]}})").find("/geometry/bs"), std::string::npos);
    EXPECT_NE(message(R"({"budget": {"noise_dbm": "loud"}})").find("/budget/noise_dbm"), std::string::npos);
    EXPECT_NE(message(R"({"format": "xml"})").find("/format"), std::string::npos);
    EXPECT_NE(message("{ not json").find("config"), std::string::npos);
}

TEST(Config, RoundTripThroughJson) {
    auto c = parse_config_text(R"({"seed": 11, "budget": {"reference_gain_db": -25.5}, "ue_fas": {"axis": [0, 1, 0]}})");
    const auto j = config_to_json(c);
    const auto back = apply_config(j, default_run_config());
    EXPECT_EQ(config_to_json(back), j);
    EXPECT_EQ(back.scenario.ue_fas.axis, (Vec3{0, 1, 0}));
    EXPECT_EQ(default_config_json()["seed"], 42);
}

TEST(Config, FileHelpers) {
    const auto dir = std::filesystem::temp_directory_path() / "fasris_config_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "c.json").string();
    write_file(path, R"({"seed": 5})");
    EXPECT_EQ(load_config_file(path).sweep.master_seed, 5u);
    EXPECT_THROW(read_file((dir / "missing.json").string()), IoError);
    EXPECT_THROW(write_file((dir / "no_such_dir" / "x").string(), "x"), IoError);
    std::filesystem::remove_all(dir);
}

TEST(CalibrationFile, RoundTrip) {
    CalibrationResult r{-25.99, 2.1000001, 2.1, 34, 5000, 42};
    const auto back = calibration_from_json(calibration_to_json(r));
    EXPECT_EQ(back.reference_gain_db, r.reference_gain_db);
    EXPECT_EQ(back.iterations, 34u);
    EXPECT_EQ(back.master_seed, 42u);
    EXPECT_THROW(calibration_from_json(nlohmann::json{{"achieved_baseline", 2.1}}), ConfigError);
}

TEST(Output, CsvLayoutIsStable) {
    SweepTable t;
    t.master_seed = 42;
    t.trials = 3;
    t.cells.push_back({ArchitectureKind::DualFas, 50, 20.0, {6.25, 0.004331, 3}});
    t.cells.push_back({ArchitectureKind::Conventional, 10, 8.0, {1.0 / 3.0, 0.0, 3}});
    const std::string csv = sweep_to_csv(t);
    EXPECT_EQ(csv,
              "architecture,N,P_dbm,mean_bps_hz,ci95,trials,seed\n"
              "dual_fas,50,20,6.25,0.0043309999999999998,3,42\n"
              "conventional,10,8,0.33333333333333331,0,3,42\n");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    const auto j = sweep_to_json(t);
    EXPECT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][0]["architecture"], "dual_fas");
    EXPECT_EQ(render_sweep(t, OutputFormat::Csv), csv);
}

TEST(Output, SeventeenSignificantDigitsRoundTrip) {
    for (double v : {0.1, 2.1000000001506911, 1e-300, 12345.678901234567}) EXPECT_EQ(std::stod(format_double(v)), v);
}
