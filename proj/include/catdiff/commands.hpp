#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "catdiff/chain_io.hpp"
#include "catdiff/config.hpp"
#include "catdiff/dataset.hpp"
#include "catdiff/diagnostics.hpp"
#include "catdiff/gibbs.hpp"
#include "catdiff/report.hpp"
#include "catdiff/simulate.hpp"

namespace catdiff::cli {

namespace fs = std::filesystem;

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kUsage = 2, kIngestion = 3, kDegenerate = 4, kIo = 5 };

inline constexpr const char* kOutputDirEnv = "CATDIFF_OUTPUT_DIR";

inline std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a(bytes));
}

/// Record of one invocation: enough to rerun it and to verify its outputs.
/// Written to a temporary name and renamed into place.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    fs::path output_dir;
    std::vector<std::string> outputs;  // relative to output_dir
    double seconds = 0.0;

    void write(const fs::path& path) const {
        nlohmann::json artifacts = nlohmann::json::object();
        for (const auto& o : outputs) artifacts[o] = file_hash(output_dir / o);
        nlohmann::json in_hashes = nlohmann::json::object();
        for (const auto& i : inputs)
            if (fs::is_regular_file(i)) in_hashes[i] = file_hash(i);
        const nlohmann::json doc = {{"command", command},   {"config", config},
                                    {"seed", seed},         {"inputs", in_hashes},
                                    {"output_dir", output_dir.string()},
                                    {"artifacts", artifacts}, {"hash", "fnv1a-64"},
                                    {"wall_seconds", seconds}};
        const fs::path tmp = path.string() + ".tmp";
        write_text_file(tmp.string(), doc.dump(2) + "\n");
        std::error_code ec;
        fs::rename(tmp, path, ec);
        if (ec) throw IoError("cannot move manifest into place: " + ec.message());
    }
};

inline fs::path resolve_out(const std::optional<std::string>& out) {
    if (out) return *out;
    if (const char* env = std::getenv(kOutputDirEnv)) return env;
    throw ArgumentError(std::string("no output directory: pass --out or set ") + kOutputDirEnv);
}

inline void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------

struct SimulateOptions {
    std::optional<int> scenario;
    std::optional<std::string> model_path;
    std::vector<int> n_per_group{200};  // one value is reused for every group
    std::uint64_t seed = 1;
    std::optional<std::string> out;
};

/// Writes dataset.csv, model.json and manifest.json.
inline int cmd_simulate(const SimulateOptions& o, std::ostream& log) {
    Stopwatch clock;
    if (o.scenario.has_value() == o.model_path.has_value())
        throw ArgumentError("pass exactly one of --scenario or --model");
    const fs::path out = resolve_out(o.out);
    ensure_dir(out);

    Rng rng(RngSpec{o.seed, 0});
    JointModel model;
    Dataset data;
    if (o.scenario) {
        if (o.n_per_group.size() != 1) throw ArgumentError("scenarios take a single --n per group");
        std::tie(model, data) = build_scenario(ScenarioSpec{*o.scenario, o.n_per_group.front(), o.seed}, rng);
    } else {
        std::ifstream in(*o.model_path);
        if (!in) throw IoError("cannot open model file " + *o.model_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ArgumentError(*o.model_path + ": " + e.what());
        }
        model = model_from_json(doc);
        std::vector<int> counts = o.n_per_group;
        if (counts.size() == 1) counts.assign(static_cast<std::size_t>(model.space.groups), counts.front());
        data = generate_from_model(model, counts, rng);
    }

    write_dataset(data, (out / "dataset.csv").string());
    write_text_file((out / "model.json").string(), model_to_json(model).dump(2) + "\n");
    RunManifest m;
    m.command = "simulate";
    m.config = {{"scenario", o.scenario ? nlohmann::json(*o.scenario) : nlohmann::json(nullptr)},
                {"model", o.model_path ? nlohmann::json(*o.model_path) : nlohmann::json(nullptr)},
                {"n_per_group", o.n_per_group}};
    m.seed = o.seed;
    if (o.model_path) m.inputs.push_back(*o.model_path);
    m.output_dir = out;
    m.outputs = {"dataset.csv", "model.json"};
    m.seconds = clock.seconds();
    m.write(out / "manifest.json");
    log << "wrote " << data.size() << " units to " << (out / "dataset.csv").string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct FitOptions {
    std::string data_path;
    std::optional<std::string> config_path;
    RunConfig overrides;
    std::string group_column = "group";
    std::optional<std::vector<int>> levels;
    std::optional<int> groups;
    int chains = 1;
    int workers = 0;
    std::optional<std::string> out;
};

/// Runs the sampler and writes chain_<c>/ directories plus manifest.json.
inline int cmd_fit(const FitOptions& o, std::ostream& log) {
    Stopwatch clock;
    const Dataset data = read_dataset(o.data_path, DatasetSchema{o.group_column, o.levels, o.groups});
    RunConfig rc;
    if (o.config_path) rc = read_run_config(*o.config_path);
    rc.merge(o.overrides);
    const PriorConfig prior = rc.prior(data.space.levels, data.space.groups);
    const Schedule schedule = rc.schedule();
    const std::uint64_t seed = rc.seed.value_or(1);
    if (o.chains < 1) throw ArgumentError("--chains must be positive");

    const fs::path out = resolve_out(o.out);
    ensure_dir(out);
    const auto chains = run_chains(data, prior, schedule, seed, o.chains, o.workers);

    RunManifest m;
    m.command = "fit";
    m.config = {{"prior", to_json(prior)}, {"schedule", to_json(schedule)}, {"chains", o.chains},
                {"group_column", o.group_column}, {"config_hash", config_hash(prior, schedule)}};
    m.seed = seed;
    m.inputs.push_back(o.data_path);
    if (o.config_path) m.inputs.push_back(*o.config_path);
    m.output_dir = out;
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const std::string name = "chain_" + std::to_string(c + 1);
        write_chain(chains[c], out / name);
        m.outputs.push_back(name + "/metadata.json");
        for (const char* f : {"pi_x.f64", "nu.f64", "upsilon.f64", "profiles.f64", "T.u8", "occupancy.i32"})
            m.outputs.push_back(name + "/" + f);
        log << name << ": " << chains[c].draws.size() << " draws retained\n";
    }
    m.seconds = clock.seconds();
    m.write(out / "manifest.json");
    return kOk;
}

/// A chain directory, or a fit directory holding chain_<c>/ subdirectories
/// (returned in chain-id order).
inline std::vector<ChainOutput> load_chains(const fs::path& dir) {
    if (fs::exists(dir / "metadata.json")) return {read_chain(dir)};
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<std::pair<int, fs::path>> found;
    for (const auto& e : fs::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        if (!e.is_directory() || name.rfind("chain_", 0) != 0) continue;
        try {
            found.emplace_back(std::stoi(name.substr(6)), e.path());
        } catch (const std::exception&) {
        }
    }
    if (found.empty()) throw IoError("no chains found in " + dir.string());
    std::sort(found.begin(), found.end());
    std::vector<ChainOutput> chains;
    for (const auto& [id, path] : found) chains.push_back(read_chain(path));
    return chains;
}

// ---------------------------------------------------------------------------

struct SummarizeOptions {
    std::string chain_dir;
    ReportOptions report;
    bool csv = false;
    std::optional<std::string> out;
};

/// Writes report.json (and CSV tables with --csv) into the output directory.
inline int cmd_summarize(const SummarizeOptions& o, std::ostream& log) {
    Stopwatch clock;
    const auto chains = load_chains(o.chain_dir);
    const fs::path out = o.out ? fs::path(*o.out) : fs::path(o.chain_dir);
    ensure_dir(out);
    const SummaryReport r = build_report(chains, o.report);
    write_text_file((out / "report.json").string(), report_to_json(r).dump(2) + "\n");

    RunManifest m;
    m.command = "summarize";
    m.config = {{"tau", o.report.tau}, {"level", o.report.level}, {"all_group_pairs", o.report.all_group_pairs}, {"csv", o.csv}};
    m.inputs.push_back(o.chain_dir);
    m.output_dir = out;
    m.outputs.push_back("report.json");
    if (o.csv)
        for (const auto& f : write_report_csv(r, out)) m.outputs.push_back(f);
    m.seconds = clock.seconds();
    m.write(out / "summarize_manifest.json");

    char line[96];
    std::snprintf(line, sizeof line, "pr(H1 | data) = %.4f over %zu draws\n", r.global.pr_h1_given_data, r.global.n_draws);
    log << line;
    return kOk;
}

// ---------------------------------------------------------------------------

struct CheckOptions {
    std::string chain_dir;
    double saturation_share = 0.01;
};

/// Prints the ESS table and occupancy per chain. Warns when every component
/// is occupied in at least `saturation_share` of the draws.
inline int cmd_check(const CheckOptions& o, std::ostream& log) {
    const auto chains = load_chains(o.chain_dir);
    char line[128];
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const Diagnostics d = compute_diagnostics(chains[c]);
        log << "chain " << c + 1 << ": " << d.retained << " draws\n";
        log << "  quantity        ESS\n";
        for (const auto& m : d.ess) {
            std::snprintf(line, sizeof line, "  %-12s %8.1f%s\n", m.name.c_str(), m.estimate.ess,
                          m.estimate.zero_variance ? "  (constant)" : "");
            log << line;
        }
        std::snprintf(line, sizeof line, "  max occupied components: %d of %d (saturated in %.1f%% of draws)\n",
                      d.max_occupancy, d.h_bar, 100.0 * d.saturated_fraction);
        log << line;
        if (d.saturated_fraction >= o.saturation_share && d.saturated_fraction > 0.0)
            log << "WARNING: chain " << c + 1 << " occupies all " << d.h_bar
                << " components; increase --h-bar and refit\n";
    }
    return kOk;
}

}  // namespace catdiff::cli
