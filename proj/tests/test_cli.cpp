#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include "dephase/cli.hpp"

using namespace dephase;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    Outcome r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (header) {
        *header = line;
    }
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line) && !line.empty() && line[0] != '{') {
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            row.push_back(std::strtod(field.c_str(), nullptr));
        }
        rows.push_back(row);
    }
    return rows;
}

json without_clock(json manifest) {
    manifest.erase("wall_clock_seconds");
    return manifest;
}

class CliTest : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dephase_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    [[nodiscard]] std::string path(const std::string& name) const { return (dir_ / name).string(); }
    [[nodiscard]] std::string manifest() const { return path("run.manifest.json"); }

    fs::path dir_;
};

/// Comma decimal separator and digit grouping, installed as the global locale.
struct CommaDecimal : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

} // namespace

TEST_F(CliTest, ImprovementAtMarkovianPowerIsRootE) {
    const Outcome r = cli({"improvement", "--nu-min", "1", "--nu-max", "1", "--steps", "1", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 1U);
    EXPECT_EQ(rows[0][0], 1.0);
    EXPECT_NEAR(rows[0][1], 1.6487212707001282, 1e-15);
    EXPECT_EQ(r.out, "nu,improvement\n1,1.6487212707001282\n");
}

TEST_F(CliTest, ImprovementAtNuTwo) {
    const Outcome r = cli({"improvement", "--nu-min", "2", "--nu-max", "2", "--steps", "1", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const double value = parse_csv(r.out).at(0).at(1);
    EXPECT_GE(value, 1.19);
    EXPECT_LE(value, 1.20);
}

TEST_F(CliTest, ImprovementSweepIsNonincreasing) {
    const Outcome r = cli({"improvement", "--nu-min", "1", "--nu-max", "6", "--steps", "101", "--out", path("i.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto rows = parse_csv(slurp(path("i.csv")), &header);
    EXPECT_EQ(header, "nu,improvement");
    ASSERT_EQ(rows.size(), 101U);
    EXPECT_EQ(rows.front()[0], 1.0);
    EXPECT_EQ(rows.back()[0], 6.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LE(rows[i][1], rows[i - 1][1]) << rows[i][0];
        EXPECT_GE(rows[i][1], 1.0);
    }
    EXPECT_TRUE(fs::exists(path("i.csv.manifest.json")));
}

TEST_F(CliTest, ImprovementRejectsTinyNuAndSingleStepRange) {
    EXPECT_EQ(cli({"improvement", "--nu-min", "0.01", "--manifest", manifest()}).code, 1);
    EXPECT_EQ(cli({"improvement", "--nu-min", "1", "--nu-max", "2", "--steps", "1", "--manifest", manifest()}).code, 1);
}

TEST_F(CliTest, QfiNoiselessSingleQubit) {
    const Outcome r = cli({"qfi", "--n", "1", "--gamma", "0", "--t", "1", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["qfi_oracle"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["resolution"].get<double>(), 1.0, 1e-12);
}

TEST_F(CliTest, QfiOracleEqualsExactOptimum) {
    const Outcome r = cli({"qfi", "--n", "2", "--probe", "ghz", "--correlation", "uncorrelated", "--gamma", "0.25", "--nu",
                       "1", "--t", "1", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_NEAR(j["qfi_oracle"].get<double>(), j["cq_exact_opt"].get<double>(), 1e-8);
    EXPECT_GE(j["cq_ansatz"].get<double>(), j["cq_exact_opt"].get<double>() - 1e-12);
}

TEST_F(CliTest, QfiReportsParityClass) {
    const Outcome r = cli({"qfi", "--n", "2", "--probe", "ghz", "--correlation", "max-correlated", "--nu", "1", "--gamma",
                       "1", "--t", "6", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["scenario"]["parity"], "even/unbounded");
    EXPECT_EQ(j["scenario"]["parity_m"].get<double>(), 2.0);
}

TEST_F(CliTest, QfiJsonIsFlatExceptScenario) {
    const Outcome r = cli({"qfi", "--correlation", "partial", "--n", "2", "--amplitude", "0.3", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    ASSERT_TRUE(j.is_object());
    for (const char* key : {"qfi_oracle", "cq_ansatz", "cq_exact_opt", "coefficients", "resolution", "scenario"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "scenario") {
            for (const auto& [inner, v] : value.items()) {
                EXPECT_TRUE(v.is_primitive()) << inner;
            }
        } else {
            EXPECT_FALSE(value.is_object()) << key;
        }
    }
    EXPECT_EQ(j["coefficients"].size(), 9U);
    EXPECT_EQ(j["scenario"]["amplitude"].get<double>(), 0.3);
}

TEST_F(CliTest, QfiUnsupportedCombinationExitsOne) {
    const Outcome r = cli({"qfi", "--correlation", "partial", "--n", "3", "--manifest", manifest()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("n = 2"), std::string::npos) << r.err;
    EXPECT_EQ(cli({"qfi", "--correlation", "mixed", "--manifest", manifest()}).code, 1);
    EXPECT_EQ(cli({"qfi", "--gamma", "-1", "--manifest", manifest()}).code, 1);
}

TEST_F(CliTest, ResolutionMinimumBracketsOptimalTime) {
    const Outcome r = cli({"resolution", "--correlation", "max-correlated", "--probe", "ghz", "--n", "2", "--gamma", "1",
                       "--nu", "1", "--t-min", "0.01", "--t-max", "1", "--steps", "100", "--out", path("r.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string header;
    const auto rows = parse_csv(slurp(path("r.csv")), &header);
    EXPECT_EQ(header, "t,delta_w_closed,delta_w_qfi");
    ASSERT_EQ(rows.size(), 100U);
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][1] < rows[best][1]) {
            best = i;
        }
    }
    EXPECT_NEAR(rows[best][0], 0.25, 0.01);
    const json footer = json::parse(slurp(path("r.csv.footer.json")));
    EXPECT_DOUBLE_EQ(footer["t_star_closed"].get<double>(), 0.25);
    EXPECT_NEAR(footer["t_star_numeric"].get<double>(), 0.25, 1e-6);
}

TEST_F(CliTest, ResolutionWithoutDephasingFallsAsInverseRootT) {
    const Outcome r = cli({"resolution", "--gamma", "0", "--n", "3", "--t-min", "0.1", "--t-max", "5", "--steps", "25",
                       "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 25U);
    for (const auto& row : rows) {
        EXPECT_NEAR(row[1] * std::sqrt(row[0]), rows[0][1] * std::sqrt(rows[0][0]), 1e-12);
        EXPECT_NEAR(row[2] * std::sqrt(row[0]), rows[0][2] * std::sqrt(rows[0][0]), 1e-12);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LT(rows[i][1], rows[i - 1][1]);
    }
    EXPECT_NE(r.out.find("\"t_star_numeric\":null"), std::string::npos) << r.out;
}

TEST_F(CliTest, ResolutionClosedAndQfiColumnsAgreeUncorrelated) {
    const Outcome r = cli({"resolution", "--n", "3", "--probe", "ghz", "--nu", "1", "--gamma", "0.5", "--t-min", "0.05",
                       "--t-max", "3", "--steps", "40", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const auto& row : parse_csv(r.out)) {
        EXPECT_NEAR(row[2] / row[1], 1.0, 1e-6) << row[0];
    }
}

TEST_F(CliTest, ResolutionRejectsNonPositiveStart) {
    EXPECT_EQ(cli({"resolution", "--t-min", "0", "--manifest", manifest()}).code, 1);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
    const std::vector<std::vector<std::string>> commands{
        {"improvement", "--nu-min", "0.5", "--nu-max", "3", "--steps", "12", "--out", path("a.csv")},
        {"qfi", "--correlation", "max-correlated", "--n", "3", "--nu", "2", "--out", path("a.json")},
        {"resolution", "--n", "2", "--t-min", "0.1", "--t-max", "2", "--steps", "9", "--out", path("b.csv")},
    };
    for (const auto& args : commands) {
        const std::string file = args.back();
        ASSERT_EQ(cli(args).code, 0);
        const std::string first = slurp(file);
        const json first_manifest = json::parse(slurp(file + ".manifest.json"));
        ASSERT_EQ(cli(args).code, 0);
        EXPECT_EQ(slurp(file), first) << file;
        EXPECT_EQ(without_clock(json::parse(slurp(file + ".manifest.json"))).dump(),
                  without_clock(first_manifest).dump());
    }
    EXPECT_EQ(slurp(path("b.csv.footer.json")).empty(), false);
}

TEST_F(CliTest, JobsDoNotChangeOutput) {
    ASSERT_EQ(cli({"--jobs", "1", "improvement", "--nu-min", "0.3", "--nu-max", "4", "--steps", "30", "--out",
                   path("one.csv")})
                  .code,
              0);
    ASSERT_EQ(cli({"improvement", "--nu-min", "0.3", "--nu-max", "4", "--steps", "30", "--out", path("four.csv"),
                   "--jobs", "4"})
                  .code,
              0);
    EXPECT_EQ(slurp(path("one.csv")), slurp(path("four.csv")));
}

TEST_F(CliTest, OutputIgnoresGlobalLocale) {
    const Outcome plain = cli({"resolution", "--n", "2", "--steps", "5", "--manifest", manifest()});
    const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
    const Outcome localized = cli({"resolution", "--n", "2", "--steps", "5", "--manifest", path("l.json")});
    std::locale::global(previous);
    ASSERT_EQ(localized.code, 0) << localized.err;
    EXPECT_EQ(localized.out, plain.out);
    EXPECT_NE(localized.out.find("0.5"), std::string::npos);
    EXPECT_EQ(localized.out.find("0,5"), std::string::npos);
}

TEST_F(CliTest, CsvNumbersCarrySeventeenDigits) {
    const Outcome r = cli({"improvement", "--nu-min", "1.5", "--nu-max", "1.5", "--steps", "1", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0);
    const std::string value = r.out.substr(r.out.find(',', r.out.find('\n')) + 1);
    const std::string digits = value.substr(0, value.find('\n'));
    const double parsed = std::strtod(digits.c_str(), nullptr);
    char expected[64];
    std::snprintf(expected, sizeof(expected), "%.17g", parsed);
    EXPECT_EQ(digits, expected);
    EXPECT_EQ(digits, format_number(parsed));
}

TEST_F(CliTest, ConfigFileSitsBetweenFlagsAndDefaults) {
    {
        std::ofstream cfg(path("run.cfg"));
        cfg << "# scenario\n"
            << "n = 4\n"
            << "gamma=0.1   # trailing comment\n"
            << "\n"
            << "seed=7\n";
    }
    const Outcome r = cli({"qfi", "--config", path("run.cfg"), "--n", "3", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.err;
    const json j = json::parse(r.out);
    EXPECT_EQ(j["scenario"]["n"], 3);     // flag beats file
    EXPECT_EQ(j["scenario"]["gamma"], 0.1); // file beats default
    EXPECT_EQ(j["scenario"]["nu"], 1.0);   // default
    const json m = json::parse(slurp(manifest()));
    EXPECT_EQ(m["parameters"]["seed"], 7);
    EXPECT_EQ(m["parameters"]["config"], path("run.cfg"));
}

TEST_F(CliTest, MalformedOrMissingConfigExitsTwo) {
    {
        std::ofstream cfg(path("bad.cfg"));
        cfg << "n 4\n";
    }
    EXPECT_EQ(cli({"qfi", "--config", path("bad.cfg"), "--manifest", manifest()}).code, 2);
    EXPECT_EQ(cli({"qfi", "--config", path("absent.cfg"), "--manifest", manifest()}).code, 2);
    {
        std::ofstream cfg(path("unknown.cfg"));
        cfg << "colour=blue\n";
    }
    EXPECT_EQ(cli({"qfi", "--config", path("unknown.cfg"), "--manifest", manifest()}).code, 2);
}

TEST_F(CliTest, ParseFailuresExitTwo) {
    EXPECT_EQ(cli({"qfi", "--n", "three", "--manifest", manifest()}).code, 2);
    EXPECT_EQ(cli({"qfi", "--probe", "w-state", "--manifest", manifest()}).code, 2);
    EXPECT_EQ(cli({"frobnicate"}).code, 2);
    EXPECT_EQ(cli({}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, UnwritableOutputExitsTwo) {
    EXPECT_EQ(cli({"improvement", "--out", path("missing/dir/i.csv")}).code, 2);
    EXPECT_EQ(cli({"qfi", "--manifest", path("missing/dir/m.json")}).code, 2);
}

TEST_F(CliTest, ManifestRecordsTheRun) {
    ASSERT_EQ(cli({"improvement", "--nu-min", "1", "--nu-max", "2", "--steps", "3", "--out", path("i.csv")}).code, 0);
    const json m = json::parse(slurp(path("i.csv.manifest.json")));
    EXPECT_EQ(m["command"], "improvement");
    EXPECT_EQ(m["command_line"],
              "dephase_qfi improvement --nu-min 1 --nu-max 2 --steps 3 --out " + path("i.csv"));
    EXPECT_EQ(m["version"], kVersion);
    EXPECT_EQ(m["parameters"]["seed"], 42);
    EXPECT_EQ(m["parameters"]["steps"], 3);
    EXPECT_GE(m["wall_clock_seconds"].get<double>(), 0.0);
    ASSERT_TRUE(m["checks"].is_array());
    ASSERT_FALSE(m["checks"].empty());
    EXPECT_TRUE(m["checks"][0]["passed"].get<bool>());
}

TEST_F(CliTest, JobsDefaultComesFromEnvironment) {
    ::setenv("DEPHASE_QFI_JOBS", "3", 1);
    const int code = cli({"qfi", "--manifest", manifest()}).code;
    const json from_env = json::parse(slurp(manifest()));
    const int code_flag = cli({"qfi", "--jobs", "2", "--manifest", manifest()}).code;
    const json from_flag = json::parse(slurp(manifest()));
    ::unsetenv("DEPHASE_QFI_JOBS");
    ASSERT_EQ(code, 0);
    ASSERT_EQ(code_flag, 0);
    EXPECT_EQ(from_env["parameters"]["jobs"], 3);
    EXPECT_EQ(from_flag["parameters"]["jobs"], 2);
    ASSERT_EQ(cli({"qfi", "--manifest", manifest()}).code, 0);
    EXPECT_EQ(json::parse(slurp(manifest()))["parameters"]["jobs"], 1);
}

TEST_F(CliTest, VerifyQuickPassesAndRecordsChecks) {
    const Outcome r = cli({"verify", "--manifest", manifest()});
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("mandatory checks passed"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
    const json m = json::parse(slurp(manifest()));
    EXPECT_EQ(m["parameters"]["depth"], "quick");
    EXPECT_GT(m["checks"].size(), 20U);
    bool has_audit = false;
    for (const auto& c : m["checks"]) {
        has_audit = has_audit || !c["mandatory"].get<bool>();
    }
    EXPECT_TRUE(has_audit);
}

TEST_F(CliTest, VerifyDetectsPerturbedClosedForms) {
    const Outcome r = cli({"verify", "--perturb", "1e-3", "--manifest", manifest()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, VerifyIsDeterministicForASeed) {
    ASSERT_EQ(cli({"--seed", "9", "verify", "--manifest", path("a.json")}).code, 0);
    ASSERT_EQ(cli({"verify", "--seed", "9", "--manifest", path("b.json")}).code, 0);
    const json a = json::parse(slurp(path("a.json")));
    const json b = json::parse(slurp(path("b.json")));
    EXPECT_EQ(a["checks"], b["checks"]);
    EXPECT_EQ(a["parameters"], b["parameters"]);
}

TEST_F(CliTest, ExecutableUsesTheSameExitCodes) {
    const std::string exe = DEPHASE_CLI_PATH;
    const auto status = [&](const std::string& args) {
        const int raw = std::system((exe + " " + args + " > " + path("stdout.txt") + " 2>&1").c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    EXPECT_EQ(status("improvement --nu-min 1 --nu-max 1 --steps 1 --out " + path("x.csv")), 0);
    EXPECT_EQ(slurp(path("x.csv")), "nu,improvement\n1,1.6487212707001282\n");
    EXPECT_EQ(status("qfi --correlation partial --n 3 --manifest " + manifest()), 1);
    EXPECT_EQ(status("qfi --n nope"), 2);
    EXPECT_EQ(status("--version"), 0);
}
