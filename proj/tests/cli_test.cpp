#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

fs::path scratch() {
    static const fs::path root = [] {
        const auto d = fs::temp_directory_path() / ("catdiff_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return root;
}

Result run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const auto log = scratch() / ("log_" + std::to_string(counter++) + ".txt");
    const std::string cmd = env + " " + CATDIFF_CLI_PATH + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(log);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::string(std::istreambuf_iterator<char>(in), {})};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

long lines(const fs::path& p) {
    const auto s = slurp(p);
    return std::count(s.begin(), s.end(), '\n');
}

/// Simulates scenario `id` once per (id, seed) and returns the directory.
fs::path simulated(int id, int seed) {
    const auto dir = scratch() / ("sim_" + std::to_string(id) + "_" + std::to_string(seed));
    if (!fs::exists(dir / "dataset.csv")) {
        const auto r = run("simulate --scenario " + std::to_string(id) + " --seed " + std::to_string(seed) + " --out " + dir.string());
        EXPECT_EQ(r.code, 0) << r.out;
    }
    return dir;
}

const std::string kShortRun = " --n-iter 400 --burn-in 200";

}  // namespace

TEST(CliSimulate, ScenarioWritesDatasetModelAndManifest) {
    const auto dir = simulated(2, 7);
    EXPECT_EQ(lines(dir / "dataset.csv"), 401);
    const auto model = nlohmann::json::parse(slurp(dir / "model.json"));
    EXPECT_EQ(model["T"], 1);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["command"], "simulate");
    EXPECT_EQ(manifest["seed"], 7);
    EXPECT_TRUE(manifest["artifacts"].contains("dataset.csv"));
    EXPECT_FALSE(fs::exists(dir / "manifest.json.tmp"));
}

TEST(CliSimulate, SameSeedByteIdentical) {
    const auto a = scratch() / "same_a", b = scratch() / "same_b";
    ASSERT_EQ(run("simulate --scenario 3 --seed 11 --out " + a.string()).code, 0);
    ASSERT_EQ(run("simulate --scenario 3 --seed 11 --out " + b.string()).code, 0);
    EXPECT_EQ(slurp(a / "dataset.csv"), slurp(b / "dataset.csv"));
    EXPECT_EQ(slurp(a / "model.json"), slurp(b / "model.json"));
}

TEST(CliSimulate, FromModelFile) {
    const auto src = simulated(1, 3);
    const auto dir = scratch() / "from_model";
    const auto r = run("simulate --model " + (src / "model.json").string() + " --n 10 20 --seed 2 --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(dir / "dataset.csv"), 31);
}

TEST(CliSimulate, UsageErrors) {
    EXPECT_EQ(run("simulate --scenario 9 --out " + (scratch() / "bad9").string()).code, 2);
    EXPECT_EQ(run("simulate --out " + (scratch() / "none").string()).code, 2);
    EXPECT_EQ(run("simulate --scenario 1", "env -u CATDIFF_OUTPUT_DIR").code, 2);
    EXPECT_EQ(run("simulate --scenario 1 --bogus").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST(CliSimulate, OutputDirectoryFromEnvironment) {
    const auto dir = scratch() / "from_env";
    const auto r = run("simulate --scenario 1 --n 5", "CATDIFF_OUTPUT_DIR=" + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(dir / "dataset.csv"), 11);
}

TEST(CliFit, WritesChainsAndManifest) {
    const auto data = simulated(2, 7) / "dataset.csv";
    const auto dir = scratch() / "fit_two";
    const auto r = run("fit --data " + data.string() + kShortRun + " --chains 2 --workers 2 --seed 5 --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    for (const char* c : {"chain_1", "chain_2"}) {
        const auto meta = nlohmann::json::parse(slurp(dir / c / "metadata.json"));
        EXPECT_EQ(meta["draws"], 200);
        EXPECT_EQ(meta["space"]["h_bar"], 10);
    }
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(manifest["command"], "fit");
    EXPECT_EQ(manifest["seed"], 5);
    EXPECT_TRUE(manifest["artifacts"].contains("chain_2/nu.f64"));
}

TEST(CliFit, DefaultScheduleRetainsFourThousand) {
    const auto data = simulated(1, 4) / "dataset.csv";
    const auto dir = scratch() / "fit_default";
    const auto r = run("fit --data " + data.string() + " --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto meta = nlohmann::json::parse(slurp(dir / "chain_1" / "metadata.json"));
    EXPECT_EQ(meta["draws"], 4000);
    EXPECT_EQ(meta["schedule"]["burn_in"], 1000);
}

TEST(CliFit, HBarFlagAndConfigFile) {
    const auto data = simulated(2, 7) / "dataset.csv";
    const auto cfg = scratch() / "run.json";
    std::ofstream(cfg) << R"({"h_bar": 6, "n_iter": 300, "burn_in": 100, "pr_h1": 0.4})";
    const auto dir = scratch() / "fit_hbar";
    const auto r = run("fit --data " + data.string() + " --config " + cfg.string() + " --h-bar 15 --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    const auto meta = nlohmann::json::parse(slurp(dir / "chain_1" / "metadata.json"));
    EXPECT_EQ(meta["space"]["h_bar"], 15);
    EXPECT_EQ(meta["prior"]["pr_h1"], 0.4);
    EXPECT_DOUBLE_EQ(meta["prior"]["nu_concentration"].get<double>(), 1.0 / 15.0);
    EXPECT_EQ(meta["draws"], 200);
}

TEST(CliFit, ErrorCodes) {
    const auto dir = scratch() / "fit_err";
    EXPECT_EQ(run("fit --data /nonexistent.csv --out " + dir.string()).code, 3);
    const auto bad = scratch() / "bad.csv";
    std::ofstream(bad) << "a,group\n1,1\nz,2\n";
    EXPECT_EQ(run("fit --data " + bad.string() + " --out " + dir.string()).code, 3);
    const auto data = simulated(2, 7) / "dataset.csv";
    EXPECT_EQ(run("fit --data " + data.string() + " --n-iter 10 --burn-in 20 --out " + dir.string()).code, 2);
    EXPECT_EQ(run("fit --data " + data.string() + " --config /nonexistent.json --out " + dir.string()).code, 5);
    EXPECT_EQ(run("fit --out " + dir.string()).code, 2);
}

TEST(CliSummarize, ReportAndDeterminism) {
    const auto data = simulated(1, 8) / "dataset.csv";
    const auto a = scratch() / "e2e_a", b = scratch() / "e2e_b";
    for (const auto& dir : {a, b}) {
        ASSERT_EQ(run("fit --data " + data.string() + kShortRun + " --chains 2 --seed 3 --out " + dir.string()).code, 0);
        const auto r = run("summarize " + dir.string() + " --csv");
        ASSERT_EQ(r.code, 0) << r.out;
        EXPECT_NE(r.out.find("pr(H1 | data)"), std::string::npos);
    }
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    EXPECT_TRUE(fs::exists(a / "local_tests.csv"));
    EXPECT_TRUE(fs::exists(a / "summarize_manifest.json"));

    const auto first = slurp(a / "report.json");
    ASSERT_EQ(run("summarize " + a.string()).code, 0);
    EXPECT_EQ(slurp(a / "report.json"), first);

    const auto report = nlohmann::json::parse(first);
    EXPECT_EQ(report["chains"], 2);
    EXPECT_EQ(report["global_test"]["n_draws"], 400);
}

TEST(CliSummarize, ThresholdFlag) {
    const auto data = simulated(2, 7) / "dataset.csv";
    const auto dir = scratch() / "thresh";
    ASSERT_EQ(run("fit --data " + data.string() + kShortRun + " --out " + dir.string()).code, 0);
    const auto out = scratch() / "thresh_report";
    ASSERT_EQ(run("summarize " + (dir / "chain_1").string() + " --threshold 0.2 --out " + out.string()).code, 0);
    const auto report = nlohmann::json::parse(slurp(out / "report.json"));
    EXPECT_EQ(report["tau"], 0.2);
    EXPECT_EQ(report["marginal"][0]["exceedance"].is_number(), true);
}

TEST(CliSummarize, MissingOrCorruptChains) {
    const auto empty = scratch() / "empty_dir";
    fs::create_directories(empty);
    EXPECT_EQ(run("summarize " + empty.string()).code, 5);
    EXPECT_EQ(run("summarize " + (scratch() / "nope").string()).code, 5);
    const auto data = simulated(2, 7) / "dataset.csv";
    const auto dir = scratch() / "corrupt";
    ASSERT_EQ(run("fit --data " + data.string() + kShortRun + " --out " + dir.string()).code, 0);
    fs::resize_file(dir / "chain_1" / "profiles.f64", 10);
    EXPECT_EQ(run("summarize " + dir.string()).code, 5);
}

TEST(CliCheck, SaturationWarningOnlyWhenTruncationTooLow) {
    const auto data = simulated(2, 7) / "dataset.csv";
    const auto tight = scratch() / "check_tight";
    ASSERT_EQ(run("fit --data " + data.string() + kShortRun + " --h-bar 2 --out " + tight.string()).code, 0);
    const auto warn = run("check " + tight.string());
    EXPECT_EQ(warn.code, 0);
    EXPECT_NE(warn.out.find("WARNING"), std::string::npos) << warn.out;

    const auto roomy = scratch() / "check_roomy";
    ASSERT_EQ(run("fit --data " + data.string() + kShortRun + " --out " + roomy.string()).code, 0);
    const auto ok = run("check " + roomy.string());
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(ok.out.find("WARNING"), std::string::npos) << ok.out;
    EXPECT_NE(ok.out.find("rho_17"), std::string::npos);
    EXPECT_NE(ok.out.find("max occupied components"), std::string::npos);
}

TEST(CliCheck, EmptyDirectoryIsError) {
    const auto empty = scratch() / "check_empty";
    fs::create_directories(empty);
    EXPECT_EQ(run("check " + empty.string()).code, 5);
}
