#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "catdiff/errors.hpp"
#include "catdiff/model.hpp"
#include "catdiff/rng.hpp"
#include "catdiff/space.hpp"

namespace catdiff {

/// Hyperparameters of the conjugate Dirichlet priors and the testing prior.
///
///   pi_X       ~ Dir(alpha)
///   pi_hj      ~ Dir(gamma_j)
///   upsilon    ~ Dir(c, ..., c)       c = nu_concentration, length h_bar
///   upsilon_x  ~ Dir(c, ..., c)
///   T          ~ Bernoulli(pr_h1)
struct PriorConfig {
    std::vector<double> alpha;
    std::vector<std::vector<double>> gamma;
    double pr_h1 = 0.5;
    int h_bar = 10;
    double nu_concentration = 0.1;

    /// Throws ArgumentError when inconsistent with `space`. pr_h1 may sit on
    /// either boundary, which pins T.
    void validate(const CategorySpace& space) const {
        auto positive = [](std::span<const double> v, const std::string& what) {
            for (double a : v)
                if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError(what + " concentrations must be positive");
        };
        if (alpha.size() != static_cast<std::size_t>(space.groups)) throw ArgumentError("alpha must have k entries");
        positive(alpha, "alpha");
        if (gamma.size() != space.variables()) throw ArgumentError("gamma must have one vector per variable");
        for (std::size_t j = 0; j < gamma.size(); ++j) {
            if (gamma[j].size() != static_cast<std::size_t>(space.levels[j]))
                throw ArgumentError("gamma for variable " + std::to_string(j + 1) + " must have d_j entries");
            positive(gamma[j], "gamma");
        }
        if (!(pr_h1 >= 0.0 && pr_h1 <= 1.0)) throw ArgumentError("pr_h1 must lie in [0,1]");
        if (h_bar != space.components) throw ArgumentError("h_bar differs from the space truncation level");
        if (!(nu_concentration > 0.0) || !std::isfinite(nu_concentration))
            throw ArgumentError("nu_concentration must be positive");
    }

    friend bool operator==(const PriorConfig&, const PriorConfig&) = default;
};

/// alpha_x = 1/2, gamma_jc = 1/d_j, pr(H1) = 1/2, concentration 1/h_bar.
inline PriorConfig default_config(const CategorySpace& space) {
    space.validate();
    PriorConfig c;
    c.alpha.assign(static_cast<std::size_t>(space.groups), 0.5);
    for (int d : space.levels) c.gamma.emplace_back(static_cast<std::size_t>(d), 1.0 / static_cast<double>(d));
    c.pr_h1 = 0.5;
    c.h_bar = space.components;
    c.nu_concentration = 1.0 / static_cast<double>(space.components);
    return c;
}

/// Dirichlet draw by normalizing Gamma variates, all in log scale.
inline ProbabilityVector sample_dirichlet(std::span<const double> conc, Rng& rng) {
    if (conc.empty()) throw ArgumentError("Dirichlet needs at least one concentration");
    for (double a : conc)
        if (!(a > 0.0) || !std::isfinite(a)) throw ArgumentError("Dirichlet concentration must be positive");
    std::vector<double> v(conc.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < conc.size(); ++i) {
        v[i] = rng.log_gamma_variate(conc[i]);
        top = std::max(top, v[i]);
    }
    double total = 0.0;
    for (double& x : v) {
        x = std::exp(x - top);
        total += x;
    }
    for (double& x : v) x /= total;
    return ProbabilityVector(std::move(v));
}

/// Dir(c, ..., c) of length n.
inline ProbabilityVector sample_symmetric_dirichlet(double c, std::size_t n, Rng& rng) {
    const std::vector<double> conc(n, c);
    return sample_dirichlet(conc, rng);
}

/// One joint draw from the prior. Draw order: pi_X, pi_hj (h-major),
/// upsilon, upsilon_1..upsilon_k, T.
inline JointModel sample_prior_model(const PriorConfig& config, const CategorySpace& space, Rng& rng) {
    config.validate(space);
    JointModel m;
    m.space = space;
    m.pi_x = sample_dirichlet(config.alpha, rng);
    m.profiles = ComponentProfiles(space.components, space.levels);
    for (int h = 0; h < space.components; ++h)
        for (std::size_t j = 0; j < space.variables(); ++j) m.profiles.set(h, j, sample_dirichlet(config.gamma[j], rng));

    const auto H = static_cast<std::size_t>(space.components);
    ProbabilityVector upsilon = sample_symmetric_dirichlet(config.nu_concentration, H, rng);
    std::vector<ProbabilityVector> per_group;
    for (int x = 0; x < space.groups; ++x) per_group.push_back(sample_symmetric_dirichlet(config.nu_concentration, H, rng));
    const bool alternative = rng.bernoulli(config.pr_h1);
    m.weights = alternative ? GroupMixingWeights::group_specific(std::move(per_group), std::move(upsilon))
                            : GroupMixingWeights::shared(std::move(upsilon), space.groups);
    return m;
}

}  // namespace catdiff
