#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "fasris/cli.hpp"

using namespace fasris;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "fasris");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("fasris_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string path(const std::string& name) const { return (dir / name).string(); }
    fs::path dir;
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(CliTest, FigureTwoWritesSixtyRowsAndManifest) {
    const auto r = run({"figure", "2", "--trials", "20", "--out", path("f2.csv"), "--workers", "2"});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = read_file(path("f2.csv"));
    EXPECT_EQ(count_lines(csv), 61u);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
    const auto m = nlohmann::json::parse(read_file(path("f2.csv.manifest.json")));
    EXPECT_EQ(m["version"], kToolVersion);
    EXPECT_EQ(m["command"], "figure 2");
    EXPECT_EQ(m["reference_gain_source"], "auto_calibration");
    EXPECT_EQ(m["config"]["seed"], 42);
    EXPECT_EQ(m["config"]["sweep"]["trials"], 20);
    EXPECT_EQ(m["reference_gain_db"], m["calibration"]["reference_gain_db"]);
}

TEST_F(CliTest, ManifestReproducesOutput) {
    ASSERT_EQ(run({"figure", "3", "--trials", "15", "--seed", "3", "--out", path("a.csv")}).code, 0);
    const auto m = nlohmann::json::parse(read_file(path("a.csv.manifest.json")));
    write_file(path("cfg.json"), m["config"].dump());
    ASSERT_EQ(run({"sweep", "--config", path("cfg.json"), "--out", path("b.csv")}).code, 0);
    EXPECT_EQ(read_file(path("a.csv")), read_file(path("b.csv")));
    EXPECT_EQ(count_lines(read_file(path("a.csv"))), 25u);
}

TEST_F(CliTest, SameSeedIsByteIdenticalAcrossWorkers) {
    ASSERT_EQ(run({"figure", "3", "--trials", "30", "--workers", "1", "--out", path("w1.csv")}).code, 0);
    ASSERT_EQ(run({"figure", "3", "--trials", "30", "--workers", "8", "--out", path("w8.csv")}).code, 0);
    EXPECT_EQ(read_file(path("w1.csv")), read_file(path("w8.csv")));
    ASSERT_EQ(run({"figure", "3", "--trials", "30", "--seed", "43", "--out", path("s43.csv")}).code, 0);
    EXPECT_NE(read_file(path("w1.csv")), read_file(path("s43.csv")));
}

TEST_F(CliTest, CalibrateThenReuseFile) {
    const auto c = run({"calibrate", "--trials", "200", "--out", path("cal.json")});
    ASSERT_EQ(c.code, 0) << c.err;
    const auto cal = load_calibration_file(path("cal.json"));
    EXPECT_NEAR(cal.achieved_baseline, 2.1, 0.05);
    EXPECT_TRUE(fs::exists(path("cal.json.manifest.json")));
    const auto f = run({"figure", "3", "--trials", "200", "--calibration", path("cal.json"), "--out", path("f.csv")});
    ASSERT_EQ(f.code, 0) << f.err;
    const auto m = nlohmann::json::parse(read_file(path("f.csv.manifest.json")));
    EXPECT_EQ(m["reference_gain_source"], "calibration_file");
    EXPECT_EQ(m["reference_gain_db"].get<double>(), cal.reference_gain_db);
    EXPECT_TRUE(f.err.empty());  // no auto-calibration message
}

TEST_F(CliTest, JsonFormatAndStdout) {
    const auto r = run({"sweep", "--trials", "5", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out.substr(0, r.out.rfind('}') + 1));
    EXPECT_EQ(j["rows"].size(), 60u);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
    EXPECT_EQ(run({"figure", "4"}).code, kExitConfig);
    EXPECT_EQ(run({"figure"}).code, kExitConfig);
    EXPECT_EQ(run({"sweep", "--format", "xml"}).code, kExitConfig);
    EXPECT_EQ(run({"sweep", "--config", path("missing.json")}).code, kExitConfig);
    EXPECT_EQ(run({}).code, kExitConfig);
    write_file(path("bad.json"), R"({"sweep": {"trails": 5}})");
    const auto r = run({"sweep", "--config", path("bad.json")});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("/sweep/trails"), std::string::npos);
    write_file(path("zero.json"), R"({"calibration": {"target_bps_hz": 0}})");
    EXPECT_EQ(run({"calibrate", "--config", path("zero.json"), "--trials", "10"}).code, kExitConfig);
    write_file(path("far.json"), R"({"calibration": {"target_bps_hz": 90}})");
    EXPECT_EQ(run({"calibrate", "--config", path("far.json"), "--trials", "10"}).code, kExitConfig);
    EXPECT_EQ(run({"validate", "--inject-fault", "gremlin"}).code, kExitConfig);
}

TEST_F(CliTest, IoErrorsExitThree) {
    EXPECT_EQ(run({"figure", "3", "--trials", "5", "--out", path("nope/x.csv")}).code, kExitIo);
    EXPECT_EQ(run({"figure", "3", "--trials", "5", "--calibration", path("absent.json")}).code, kExitIo);
}

TEST_F(CliTest, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("validate"), std::string::npos);
}

TEST(CliValidate, ReportListsEveryCheckAndInjectedFaultsFail) {
    const auto dir = fs::temp_directory_path() / "fasris_validate";
    fs::create_directories(dir);
    const auto report = (dir / "report.txt").string();
    const auto ok = run({"validate", "--workers", "4", "--out", report});
    EXPECT_EQ(ok.out, read_file(report));
    for (const char* name : {"bessel_j0_vs_series", "hermitian_sqrt_reconstruction", "gaussian_covariance",
                             "jakes_port_correlation", "los_power_fraction", "co_phase_vs_grid", "dominance_chain",
                             "dual_not_above_oracle", "worker_determinism"})
        EXPECT_NE(ok.out.find(name), std::string::npos) << name;
    EXPECT_NE(ok.out.find("measured="), std::string::npos);
    EXPECT_EQ(ok.code, kExitOk) << ok.out;
    EXPECT_EQ(ok.out.find("FAIL"), std::string::npos);

    const std::pair<const char*, const char*> faults[] = {
        {"bessel", "bessel_j0_vs_series"}, {"sqrt", "hermitian_sqrt_reconstruction"},
        {"gaussian", "gaussian_covariance"}, {"correlation", "jakes_port_correlation"},
        {"dominance", "dominance_chain"},  {"oracle", "single_sided_vs_exhaustive"},
        {"determinism", "worker_determinism"}};
    for (const auto& [fault, check] : faults) {
        const auto r = run({"validate", "--workers", "4", "--inject-fault", fault});
        EXPECT_EQ(r.code, kExitValidation) << fault;
        EXPECT_NE(r.out.find(std::string("FAIL  ") + check), std::string::npos) << fault;
    }
    fs::remove_all(dir);
}

#ifdef FASRIS_CLI_PATH
TEST(CliBinary, ExitCodesFromProcess) {
    const std::string bin = FASRIS_CLI_PATH;
    EXPECT_EQ(std::system((bin + " --version > /dev/null").c_str()), 0);
    const int bad = std::system((bin + " figure 9 > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(bad), kExitConfig);
}
#endif
