#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catdiff/dataset.hpp"
#include "catdiff/model.hpp"
#include "catdiff/priors.hpp"
#include "catdiff/rng.hpp"

namespace catdiff {

/// Ancestral sampling with fixed group sizes: for each unit of group x draw
/// z ~ nu_x, then y_j ~ pi_{z j} independently. pi_X is not used.
inline Dataset generate_from_model(const JointModel& model, std::span<const int> n_per_group, Rng& rng) {
    model.validate();
    if (n_per_group.size() != static_cast<std::size_t>(model.space.groups))
        throw ArgumentError("need one unit count per group");
    Dataset data;
    data.space = CategorySpace(model.space.levels, model.space.groups, 1);
    const std::size_t p = model.space.variables();
    std::vector<int> cats(p);
    for (int x = 0; x < model.space.groups; ++x) {
        if (n_per_group[static_cast<std::size_t>(x)] < 0) throw ArgumentError("negative unit count");
        const auto nu = model.weights.nu(x).values();
        for (int i = 0; i < n_per_group[static_cast<std::size_t>(x)]; ++i) {
            const int z = static_cast<int>(rng.categorical(nu));
            for (std::size_t j = 0; j < p; ++j) cats[j] = static_cast<int>(rng.categorical(model.profiles(z, j)));
            data.push_back(cats, x);
        }
    }
    return data;
}

/// The three synthetic designs with k = 2 groups, p = 17 four-level
/// variables and 5 true components. Variables 5, 10, 15, 17 carry the
/// signal; every other variable has one random kernel shared by all
/// components, so it is independent of everything else.
struct ScenarioSpec {
    int id = 1;
    int n_per_group = 200;
    std::uint64_t seed = 0;
};

namespace scenario {

inline constexpr int kGroups = 2;
inline constexpr int kVariables = 17;
inline constexpr int kLevels = 4;
inline constexpr int kComponents = 5;
/// 0-based indices of the signal variables.
inline constexpr std::array<std::size_t, 4> kSignalVariables{4, 9, 14, 16};

inline bool is_signal(std::size_t j) {
    for (std::size_t s : kSignalVariables)
        if (s == j) return true;
    return false;
}

}  // namespace scenario

inline JointModel scenario_model(int id, Rng& rng) {
    if (id < 1 || id > 3) throw ArgumentError("unknown scenario " + std::to_string(id) + " (expected 1, 2 or 3)");
    using namespace scenario;
    const CategorySpace space(std::vector<int>(kVariables, kLevels), kGroups, kComponents);

    const std::array<std::array<double, 4>, 5> signal_kernels{{
        id == 2 ? std::array<double, 4>{0.75, 0.25, 0.0, 0.0} : std::array<double, 4>{0.25, 0.25, 0.25, 0.25},
        {0.85, 0.05, 0.05, 0.05},
        {0.05, 0.85, 0.05, 0.05},
        {0.05, 0.05, 0.85, 0.05},
        {0.05, 0.05, 0.05, 0.85},
    }};

    JointModel m;
    m.space = space;
    m.pi_x = ProbabilityVector({0.5, 0.5});
    m.profiles = ComponentProfiles(kComponents, space.levels);
    const std::vector<double> background(kLevels, 0.25);
    for (std::size_t j = 0; j < space.variables(); ++j) {
        if (is_signal(j)) {
            for (int h = 0; h < kComponents; ++h) {
                const auto& k = signal_kernels[static_cast<std::size_t>(h)];
                m.profiles.set(h, j, ProbabilityVector(std::vector<double>(k.begin(), k.end())));
            }
        } else {
            const ProbabilityVector shared = sample_dirichlet(background, rng);
            for (int h = 0; h < kComponents; ++h) m.profiles.set(h, j, shared);
        }
    }

    const ProbabilityVector spread({0.0, 0.25, 0.25, 0.25, 0.25});
    if (id == 1) {
        m.weights = GroupMixingWeights::shared(spread, kGroups);
    } else {
        m.weights = GroupMixingWeights::group_specific({ProbabilityVector::one_hot(kComponents, 0), spread}, spread);
    }
    m.validate();
    return m;
}

/// Builds the true model of scenario `spec.id`, then samples n_per_group
/// units per group, both from `rng`.
inline std::pair<JointModel, Dataset> build_scenario(const ScenarioSpec& spec, Rng& rng) {
    if (spec.n_per_group < 0) throw ArgumentError("n per group must be nonnegative");
    JointModel model = scenario_model(spec.id, rng);
    const std::array<int, 2> counts{spec.n_per_group, spec.n_per_group};
    Dataset data = generate_from_model(model, counts, rng);
    return {std::move(model), std::move(data)};
}

inline std::pair<JointModel, Dataset> build_scenario(const ScenarioSpec& spec) {
    Rng rng(RngSpec{spec.seed, 0});
    return build_scenario(spec, rng);
}

}  // namespace catdiff
