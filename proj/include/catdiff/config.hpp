#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "catdiff/errors.hpp"
#include "catdiff/gibbs.hpp"
#include "catdiff/priors.hpp"

namespace catdiff {

/// Contents of a run configuration file: a flat JSON object whose keys are
///
///   alpha             number (all groups) or array of k numbers
///   gamma             "auto" (1/d_j), a number (all cells), or an array of
///                     p arrays of d_j numbers
///   pr_h1             number in [0,1]
///   h_bar             integer >= 1
///   nu_concentration  number > 0, or "auto" (1/h_bar)
///   seed, n_iter, burn_in, thin   integers
///
/// Every key is optional; unset keys fall back to default_config() and the
/// Schedule defaults. Unknown keys are rejected.
struct RunConfig {
    std::optional<std::variant<double, std::vector<double>>> alpha;
    std::optional<std::variant<double, std::vector<std::vector<double>>>> gamma;  // unset = auto
    std::optional<double> pr_h1;
    std::optional<int> h_bar;
    std::optional<double> nu_concentration;  // unset = auto
    std::optional<std::uint64_t> seed;
    std::optional<int> n_iter;
    std::optional<int> burn_in;
    std::optional<int> thin;

    /// Values set in `over` replace ours.
    void merge(const RunConfig& over) {
        if (over.alpha) alpha = over.alpha;
        if (over.gamma) gamma = over.gamma;
        if (over.pr_h1) pr_h1 = over.pr_h1;
        if (over.h_bar) h_bar = over.h_bar;
        if (over.nu_concentration) nu_concentration = over.nu_concentration;
        if (over.seed) seed = over.seed;
        if (over.n_iter) n_iter = over.n_iter;
        if (over.burn_in) burn_in = over.burn_in;
        if (over.thin) thin = over.thin;
    }

    PriorConfig prior(const std::vector<int>& levels, int groups) const {
        const int hb = h_bar.value_or(10);
        PriorConfig c = default_config(CategorySpace(levels, groups, hb));
        if (alpha) {
            if (const auto* v = std::get_if<double>(&*alpha)) c.alpha.assign(static_cast<std::size_t>(groups), *v);
            else c.alpha = std::get<std::vector<double>>(*alpha);
        }
        if (gamma) {
            if (const auto* v = std::get_if<double>(&*gamma)) {
                for (auto& g : c.gamma) g.assign(g.size(), *v);
            } else {
                c.gamma = std::get<std::vector<std::vector<double>>>(*gamma);
            }
        }
        if (pr_h1) c.pr_h1 = *pr_h1;
        if (nu_concentration) c.nu_concentration = *nu_concentration;
        c.validate(CategorySpace(levels, groups, hb));
        return c;
    }

    Schedule schedule() const {
        Schedule s;
        if (n_iter) s.n_iter = *n_iter;
        if (burn_in) s.burn_in = *burn_in;
        if (thin) s.thin = *thin;
        s.validate();
        return s;
    }
};

inline RunConfig parse_run_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ArgumentError("run configuration must be a JSON object");
    RunConfig rc;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (key == "alpha") {
                if (value.is_number()) rc.alpha = value.get<double>();
                else rc.alpha = value.get<std::vector<double>>();
            } else if (key == "gamma") {
                if (value.is_string()) {
                    if (value.get<std::string>() != "auto") throw ArgumentError("gamma must be \"auto\", a number or nested arrays");
                } else if (value.is_number()) {
                    rc.gamma = value.get<double>();
                } else {
                    rc.gamma = value.get<std::vector<std::vector<double>>>();
                }
            } else if (key == "pr_h1") {
                rc.pr_h1 = value.get<double>();
            } else if (key == "h_bar") {
                rc.h_bar = value.get<int>();
            } else if (key == "nu_concentration") {
                if (value.is_string()) {
                    if (value.get<std::string>() != "auto") throw ArgumentError("nu_concentration must be a number or \"auto\"");
                } else {
                    rc.nu_concentration = value.get<double>();
                }
            } else if (key == "seed") {
                rc.seed = value.get<std::uint64_t>();
            } else if (key == "n_iter") {
                rc.n_iter = value.get<int>();
            } else if (key == "burn_in") {
                rc.burn_in = value.get<int>();
            } else if (key == "thin") {
                rc.thin = value.get<int>();
            } else {
                throw ArgumentError("unknown configuration key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("malformed configuration value: ") + e.what());
    }
    return rc;
}

inline RunConfig read_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open configuration file " + path);
    try {
        return parse_run_config(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ArgumentError(path + ": " + e.what());
    }
}

inline nlohmann::json to_json(const PriorConfig& c) {
    return {{"alpha", c.alpha},  {"gamma", c.gamma},
            {"pr_h1", c.pr_h1},  {"h_bar", c.h_bar},
            {"nu_concentration", c.nu_concentration}};
}

inline PriorConfig prior_from_json(const nlohmann::json& j) {
    PriorConfig c;
    c.alpha = j.at("alpha").get<std::vector<double>>();
    c.gamma = j.at("gamma").get<std::vector<std::vector<double>>>();
    c.pr_h1 = j.at("pr_h1").get<double>();
    c.h_bar = j.at("h_bar").get<int>();
    c.nu_concentration = j.at("nu_concentration").get<double>();
    return c;
}

inline nlohmann::json to_json(const Schedule& s) {
    return {{"n_iter", s.n_iter}, {"burn_in", s.burn_in}, {"thin", s.thin}};
}

inline Schedule schedule_from_json(const nlohmann::json& j) {
    return {j.at("n_iter").get<int>(), j.at("burn_in").get<int>(), j.at("thin").get<int>()};
}

/// 64-bit FNV-1a, used for config and artifact fingerprints.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string config_hash(const PriorConfig& c, const Schedule& s) {
    return hex64(fnv1a(nlohmann::json{{"prior", to_json(c)}, {"schedule", to_json(s)}}.dump()));
}

}  // namespace catdiff
