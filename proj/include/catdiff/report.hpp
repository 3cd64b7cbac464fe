#pragma once

#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "catdiff/analysis.hpp"
#include "catdiff/dataset.hpp"
#include "catdiff/diagnostics.hpp"
#include "catdiff/gibbs.hpp"

namespace catdiff {

inline constexpr int kReportVersion = 1;

struct ReportOptions {
    double tau = 0.1;
    double level = 0.9;
    bool all_group_pairs = false;  // otherwise only groups (1, 2)
    std::optional<double> global_threshold;
};

/// Everything the summarize command emits, before serialization.
struct SummaryReport {
    std::size_t chains = 0;
    GlobalTestResult global;
    LocalTestSummary local;
    std::vector<MarginalDifferenceSummary> differences;
    std::vector<Diagnostics> diagnostics;  // one per chain
    ReportOptions options;
    CategorySpace space;
};

/// Draws of all chains concatenated in chain-id order.
inline std::vector<JointModel> pooled_draws(std::span<const ChainOutput> chains) {
    std::vector<JointModel> all;
    for (const auto& c : chains) all.insert(all.end(), c.draws.begin(), c.draws.end());
    return all;
}

inline SummaryReport build_report(std::span<const ChainOutput> chains, const ReportOptions& opts = {}) {
    if (chains.empty()) throw ArgumentError("no chains to summarize");
    for (const auto& c : chains)
        if (c.space != chains.front().space) throw ArgumentError("chains were fit on different spaces");
    const auto draws = pooled_draws(chains);
    SummaryReport r;
    r.chains = chains.size();
    r.options = opts;
    r.space = chains.front().space;
    r.global = global_test(draws, opts.global_threshold);
    r.local = summarize_local_tests(draws, opts.tau);
    if (r.space.groups >= 2) {
        for (int a = 0; a < r.space.groups; ++a)
            for (int b = a + 1; b < r.space.groups; ++b) {
                if (!opts.all_group_pairs && !(a == 0 && b == 1)) continue;
                for (std::size_t j = 0; j < r.space.variables(); ++j)
                    r.differences.push_back(marginal_differences(draws, j, a, b, opts.level));
            }
    }
    for (const auto& c : chains) r.diagnostics.push_back(compute_diagnostics(c));
    return r;
}

namespace detail {

inline nlohmann::json summary_json(const CramersVSummary& s) {
    return {{"mean", s.mean}, {"q05", s.q05}, {"q50", s.q50}, {"q95", s.q95}, {"exceedance", s.exceedance}};
}

/// p x p matrix of one statistic for group x, null on the diagonal.
template <typename Get>
nlohmann::json pair_matrix(const LocalTestSummary& local, int x, Get get) {
    const std::size_t p = local.marginal.size();
    nlohmann::json m = nlohmann::json::array();
    for (std::size_t a = 0; a < p; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t b = 0; b < p; ++b) row.push_back(a == b ? nlohmann::json(nullptr) : nlohmann::json(get(local.pair(a, b, x))));
        m.push_back(std::move(row));
    }
    return m;
}

}  // namespace detail

/// Report document. Variables and groups are 1-based here.
inline nlohmann::json report_to_json(const SummaryReport& r) {
    using nlohmann::json;
    json marginal = json::array();
    for (const auto& s : r.local.marginal) {
        json e = detail::summary_json(s);
        e["variable"] = s.target.j + 1;
        marginal.push_back(std::move(e));
    }

    auto mean_of = [](const CramersVSummary& s) { return s.mean; };
    auto exceed_of = [](const CramersVSummary& s) { return s.exceedance; };
    json pairwise = json::array();
    for (int x = 0; x < r.space.groups; ++x) {
        json pairs = json::array();
        for (const auto& s : r.local.pairwise[static_cast<std::size_t>(x)]) {
            json e = detail::summary_json(s);
            e["variables"] = {s.target.j + 1, s.target.jj + 1};
            pairs.push_back(std::move(e));
        }
        pairwise.push_back({{"group", x + 1},
                            {"mean", detail::pair_matrix(r.local, x, mean_of)},
                            {"exceedance", detail::pair_matrix(r.local, x, exceed_of)},
                            {"pairs", std::move(pairs)}});
    }

    json doc = {
        {"format", "catdiff-report"},
        {"version", kReportVersion},
        {"chains", r.chains},
        {"space", {{"levels", r.space.levels}, {"groups", r.space.groups}, {"h_bar", r.space.components}}},
        {"global_test", {{"pr_h1", r.global.pr_h1_given_data}, {"n_draws", r.global.n_draws}}},
        {"tau", r.options.tau},
        {"marginal", std::move(marginal)},
        {"pairwise", std::move(pairwise)},
    };
    if (r.global.threshold) {
        doc["global_test"]["threshold"] = *r.global.threshold;
        doc["global_test"]["exceeds_threshold"] = r.global.exceeds_threshold();
    }

    // Combined matrix: group 1 below the diagonal, group 2 above.
    if (r.space.groups == 2) {
        const std::size_t p = r.space.variables();
        json mean = json::array(), exceed = json::array();
        for (std::size_t a = 0; a < p; ++a) {
            json mrow = json::array(), erow = json::array();
            for (std::size_t b = 0; b < p; ++b) {
                if (a == b) {
                    mrow.push_back(nullptr);
                    erow.push_back(nullptr);
                } else {
                    const auto& s = r.local.pair(a, b, a > b ? 0 : 1);
                    mrow.push_back(s.mean);
                    erow.push_back(s.exceedance);
                }
            }
            mean.push_back(std::move(mrow));
            exceed.push_back(std::move(erow));
        }
        doc["pairwise_combined"] = {{"lower_group", 1}, {"upper_group", 2}, {"mean", mean}, {"exceedance", exceed}};
    }

    json diffs = json::array();
    for (const auto& d : r.differences)
        diffs.push_back({{"variable", d.j + 1},
                         {"groups", {d.group_a + 1, d.group_b + 1}},
                         {"level", d.level},
                         {"mean", d.mean},
                         {"lower", d.lower},
                         {"upper", d.upper}});
    doc["marginal_differences"] = std::move(diffs);

    json diag = json::array();
    for (std::size_t c = 0; c < r.diagnostics.size(); ++c) {
        const auto& d = r.diagnostics[c];
        json ess = json::object();
        json flat = json::array();
        for (const auto& m : d.ess) {
            ess[m.name] = m.estimate.ess;
            if (m.estimate.zero_variance) flat.push_back(m.name);
        }
        diag.push_back({{"chain", c + 1},
                        {"retained", d.retained},
                        {"max_occupancy", d.max_occupancy},
                        {"h_bar", d.h_bar},
                        {"saturated_fraction", d.saturated_fraction},
                        {"ess", std::move(ess)},
                        {"zero_variance", std::move(flat)}});
    }
    doc["diagnostics"] = std::move(diag);
    return doc;
}

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// Flat CSV tables for plotting: marginal_differences.csv, local_tests.csv
/// and one pairwise_mean_group<x>.csv matrix per group.
inline std::vector<std::string> write_report_csv(const SummaryReport& r, const std::filesystem::path& dir) {
    using detail::fmt_double;
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;

    std::ostringstream diff;
    diff << "variable,category,group_a,group_b,mean,lower,upper\n";
    for (const auto& d : r.differences)
        for (std::size_t c = 0; c < d.mean.size(); ++c)
            diff << d.j + 1 << ',' << c + 1 << ',' << d.group_a + 1 << ',' << d.group_b + 1 << ',' << fmt_double(d.mean[c])
                 << ',' << fmt_double(d.lower[c]) << ',' << fmt_double(d.upper[c]) << '\n';
    write_text_file((dir / "marginal_differences.csv").string(), diff.str());
    written.push_back("marginal_differences.csv");

    std::ostringstream local;
    local << "kind,variable,variable2,group,mean,q05,q50,q95,exceedance,tau\n";
    auto row = [&](const CramersVSummary& s, bool pair) {
        local << (pair ? "pairwise" : "marginal") << ',' << s.target.j + 1 << ',';
        if (pair) local << s.target.jj + 1 << ',' << s.target.x + 1;
        else local << ',';
        local << ',' << fmt_double(s.mean) << ',' << fmt_double(s.q05) << ',' << fmt_double(s.q50) << ','
              << fmt_double(s.q95) << ',' << fmt_double(s.exceedance) << ',' << fmt_double(s.tau) << '\n';
    };
    for (const auto& s : r.local.marginal) row(s, false);
    for (const auto& g : r.local.pairwise)
        for (const auto& s : g) row(s, true);
    write_text_file((dir / "local_tests.csv").string(), local.str());
    written.push_back("local_tests.csv");

    const std::size_t p = r.space.variables();
    for (int x = 0; x < r.space.groups; ++x) {
        std::ostringstream m;
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) {
                if (b) m << ',';
                m << (a == b ? std::string("NA") : fmt_double(r.local.pair(a, b, x).mean));
            }
            m << '\n';
        }
        const std::string name = "pairwise_mean_group" + std::to_string(x + 1) + ".csv";
        write_text_file((dir / name).string(), m.str());
        written.push_back(name);
    }
    return written;
}

}  // namespace catdiff
