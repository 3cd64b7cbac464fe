#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "catdiff/dataset.hpp"
#include "catdiff/errors.hpp"
#include "catdiff/model.hpp"
#include "catdiff/priors.hpp"
#include "catdiff/rng.hpp"

namespace catdiff {

/// Latent component of every unit, 0-based.
struct LatentState {
    std::vector<int> z;
};

/// Count tables driving every full conditional.
struct SufficientStats {
    int groups = 0;
    int components = 0;
    std::vector<int> levels;
    std::vector<std::size_t> offsets;  // prefix sums of levels
    std::size_t n = 0;
    std::vector<long> n_x;    // k
    std::vector<long> n_h;    // H
    std::vector<long> n_hx;   // k x H, row-major by group
    std::vector<long> n_jhc;  // H x sum_j d_j, component-major

    SufficientStats() = default;
    SufficientStats(int k, int H, std::vector<int> lv)
        : groups(k), components(H), levels(std::move(lv)), offsets(levels.size() + 1, 0) {
        for (std::size_t j = 0; j < levels.size(); ++j) offsets[j + 1] = offsets[j] + static_cast<std::size_t>(levels[j]);
        n_x.assign(static_cast<std::size_t>(k), 0);
        n_h.assign(static_cast<std::size_t>(H), 0);
        n_hx.assign(static_cast<std::size_t>(k * H), 0);
        n_jhc.assign(static_cast<std::size_t>(H) * offsets.back(), 0);
    }

    long group_component(int x, int h) const { return n_hx[static_cast<std::size_t>(x * components + h)]; }
    std::span<const long> group_row(int x) const {
        return {n_hx.data() + static_cast<std::size_t>(x * components), static_cast<std::size_t>(components)};
    }
    std::span<const long> level_counts(int h, std::size_t j) const {
        return {n_jhc.data() + static_cast<std::size_t>(h) * offsets.back() + offsets[j],
                static_cast<std::size_t>(levels[j])};
    }
    int occupied_components() const {
        return static_cast<int>(std::count_if(n_h.begin(), n_h.end(), [](long c) { return c > 0; }));
    }

    /// Cross-sum identities of the four count families.
    bool consistent() const {
        long total_x = 0, total_h = 0;
        for (long c : n_x) total_x += c;
        for (long c : n_h) total_h += c;
        if (total_x != static_cast<long>(n) || total_h != static_cast<long>(n)) return false;
        for (int x = 0; x < groups; ++x) {
            long row = 0;
            for (long c : group_row(x)) row += c;
            if (row != n_x[static_cast<std::size_t>(x)]) return false;
        }
        for (int h = 0; h < components; ++h) {
            long col = 0;
            for (int x = 0; x < groups; ++x) col += group_component(x, h);
            if (col != n_h[static_cast<std::size_t>(h)]) return false;
            for (std::size_t j = 0; j < levels.size(); ++j) {
                long s = 0;
                for (long c : level_counts(h, j)) s += c;
                if (s != n_h[static_cast<std::size_t>(h)]) return false;
            }
        }
        return true;
    }

    friend bool operator==(const SufficientStats&, const SufficientStats&) = default;
};

inline SufficientStats compute_stats(const Dataset& data, const LatentState& latent, int components) {
    if (latent.z.size() != data.size()) throw DimensionError("latent state length differs from dataset size");
    SufficientStats s(data.space.groups, components, data.space.levels);
    s.n = data.size();
    const std::size_t stride = s.offsets.back();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const int x = data.x[i];
        const int h = latent.z[i];
        if (h < 0 || h >= components) throw DimensionError("latent class of unit " + std::to_string(i + 1) + " out of range");
        ++s.n_x[static_cast<std::size_t>(x)];
        ++s.n_h[static_cast<std::size_t>(h)];
        ++s.n_hx[static_cast<std::size_t>(x * components + h)];
        const auto y = data.row(i);
        long* base = s.n_jhc.data() + static_cast<std::size_t>(h) * stride;
        for (std::size_t j = 0; j < y.size(); ++j) ++base[s.offsets[j] + static_cast<std::size_t>(y[j])];
    }
    return s;
}

/// Iteration plan of one chain.
struct Schedule {
    int n_iter = 5000;
    int burn_in = 1000;
    int thin = 1;

    void validate() const {
        if (n_iter < 1) throw ArgumentError("n_iter must be positive");
        if (burn_in < 0 || burn_in >= n_iter) throw ArgumentError("burn_in must lie in [0, n_iter)");
        if (thin < 1) throw ArgumentError("thin must be positive");
    }
    int retained() const noexcept { return (n_iter - burn_in) / thin; }

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Thinned post-burn-in draws of one chain. Each draw is a full JointModel
/// (pi_X, pi_hj, nu_x, T); occupancy[d] counts components with n_h > 0 in
/// the iteration that produced draw d.
struct ChainOutput {
    CategorySpace space;
    PriorConfig config;
    Schedule schedule;
    RngSpec rng;
    std::vector<JointModel> draws;
    std::vector<int> occupancy;

    int max_occupancy() const noexcept {
        return occupancy.empty() ? 0 : *std::max_element(occupancy.begin(), occupancy.end());
    }

    friend bool operator==(const ChainOutput&, const ChainOutput&) = default;
};

inline double log_gamma(double v) { return boost::math::lgamma(v); }

// ---------------------------------------------------------------------------
// Full conditional updates, in sampler order.

/// Step 1: pi_X | - ~ Dir(alpha_x + n_x).
inline ProbabilityVector update_group_marginal(const SufficientStats& stats, const PriorConfig& config, Rng& rng) {
    std::vector<double> conc(config.alpha);
    for (std::size_t x = 0; x < conc.size(); ++x) conc[x] += static_cast<double>(stats.n_x.at(x));
    return sample_dirichlet(conc, rng);
}

/// Normalized pr(z = h | -) for one unit, via log weights with the maximum
/// subtracted. Throws NumericalDegeneracyError when every weight is zero.
inline std::vector<double> latent_class_probabilities(const JointModel& model, std::span<const int> y, int x,
                                                      std::size_t unit = 0) {
    const int H = model.space.components;
    std::vector<double> w(static_cast<std::size_t>(H));
    double top = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        double l = std::log(model.weights.nu(x)[static_cast<std::size_t>(h)]);
        for (std::size_t j = 0; j < y.size(); ++j) l += std::log(model.profiles(h, j)[static_cast<std::size_t>(y[j])]);
        w[static_cast<std::size_t>(h)] = l;
        top = std::max(top, l);
    }
    if (top == -std::numeric_limits<double>::infinity())
        throw NumericalDegeneracyError("unit " + std::to_string(unit + 1) + " has zero probability under every component");
    double total = 0.0;
    for (double& v : w) {
        v = std::exp(v - top);
        total += v;
    }
    for (double& v : w) v /= total;
    return w;
}

/// Step 2: z_i | - for every unit, in index order.
inline LatentState update_latent_classes(const Dataset& data, const JointModel& model, Rng& rng) {
    const int H = model.space.components;
    const std::size_t stride = model.profiles.stride();
    const std::size_t p = data.space.variables();
    if (model.space.levels != data.space.levels || model.space.groups != data.space.groups)
        throw DimensionError("model and dataset spaces differ");

    std::vector<double> log_profiles(static_cast<std::size_t>(H) * stride);
    for (int h = 0; h < H; ++h)
        for (std::size_t j = 0; j < p; ++j) {
            auto row = model.profiles(h, j);
            for (std::size_t c = 0; c < row.size(); ++c)
                log_profiles[static_cast<std::size_t>(h) * stride + model.profiles.offset(j) + c] = std::log(row[c]);
        }
    std::vector<double> log_nu(static_cast<std::size_t>(model.space.groups * H));
    for (int x = 0; x < model.space.groups; ++x)
        for (int h = 0; h < H; ++h)
            log_nu[static_cast<std::size_t>(x * H + h)] = std::log(model.weights.nu(x)[static_cast<std::size_t>(h)]);

    std::vector<std::size_t> cell(p);
    std::vector<double> w(static_cast<std::size_t>(H));
    LatentState out;
    out.z.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto y = data.row(i);
        for (std::size_t j = 0; j < p; ++j) cell[j] = model.profiles.offset(j) + static_cast<std::size_t>(y[j]);
        double top = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < H; ++h) {
            const double* lp = log_profiles.data() + static_cast<std::size_t>(h) * stride;
            double l = log_nu[static_cast<std::size_t>(data.x[i] * H + h)];
            for (std::size_t j = 0; j < p; ++j) l += lp[cell[j]];
            w[static_cast<std::size_t>(h)] = l;
            top = std::max(top, l);
        }
        if (top == -std::numeric_limits<double>::infinity())
            throw NumericalDegeneracyError("unit " + std::to_string(i + 1) + " has zero probability under every component");
        for (double& v : w) v = std::exp(v - top);
        out.z[i] = static_cast<int>(rng.categorical(w));
    }
    return out;
}

/// Step 3: pi_hj | - ~ Dir(gamma_j + n_jh.), h-major then j.
inline ComponentProfiles update_component_profiles(const SufficientStats& stats, const PriorConfig& config, Rng& rng) {
    ComponentProfiles out(stats.components, stats.levels);
    std::vector<double> conc;
    for (int h = 0; h < stats.components; ++h)
        for (std::size_t j = 0; j < stats.levels.size(); ++j) {
            const auto counts = stats.level_counts(h, j);
            conc.assign(config.gamma[j].begin(), config.gamma[j].end());
            for (std::size_t c = 0; c < conc.size(); ++c) conc[c] += static_cast<double>(counts[c]);
            out.set(h, j, sample_dirichlet(conc, rng));
        }
    return out;
}

inline ComponentProfiles update_component_profiles(const Dataset& data, const LatentState& latent,
                                                   const PriorConfig& config, Rng& rng) {
    return update_component_profiles(compute_stats(data, latent, config.h_bar), config, rng);
}

/// Log of the marginal-likelihood ratio m(counts | shared weights) /
/// m(counts | group-specific weights), with Dir(c, ..., c) weight priors of
/// length H integrated out:
///
///   log m_shared = lgG(Hc) - lgG(Hc + n)   + sum_h [lgG(c + n_h)  - lgG(c)]
///   log m_split  = sum_x { lgG(Hc) - lgG(Hc + n_x) + sum_h [lgG(c + n_hx) - lgG(c)] }
///
/// With c = 1/H this is the ratio appearing in pr(T = 1 | -).
inline double log_bf_h0_h1(const SufficientStats& stats, const PriorConfig& config) {
    const double c = config.nu_concentration;
    const double Hc = c * static_cast<double>(stats.components);
    const double lg_c = log_gamma(c);
    const double lg_Hc = log_gamma(Hc);

    double shared = lg_Hc - log_gamma(Hc + static_cast<double>(stats.n));
    for (long nh : stats.n_h) shared += log_gamma(c + static_cast<double>(nh)) - lg_c;

    double split = 0.0;
    for (int x = 0; x < stats.groups; ++x) {
        split += lg_Hc - log_gamma(Hc + static_cast<double>(stats.n_x[static_cast<std::size_t>(x)]));
        for (long nhx : stats.group_row(x)) split += log_gamma(c + static_cast<double>(nhx)) - lg_c;
    }
    return shared - split;
}

/// pr(T = 1 | -) = [1 + pr(H0)/pr(H1) exp(log_bf_h0_h1)]^{-1}.
inline double testing_probability(const SufficientStats& stats, const PriorConfig& config) {
    if (config.pr_h1 >= 1.0) return 1.0;
    if (config.pr_h1 <= 0.0) return 0.0;
    const double log_odds_h0 = std::log1p(-config.pr_h1) - std::log(config.pr_h1) + log_bf_h0_h1(stats, config);
    // 1 / (1 + e^a), split by sign to avoid overflow.
    if (log_odds_h0 > 0.0) {
        const double e = std::exp(-log_odds_h0);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(log_odds_h0));
}

/// Step 4: T | - with the weights integrated out.
inline bool update_testing_indicator(const SufficientStats& stats, const PriorConfig& config, Rng& rng) {
    return rng.bernoulli(testing_probability(stats, config));
}

/// Step 5. T = 1: nu_x ~ Dir(c + n_hx) for each x, and upsilon is redrawn from
/// its prior (it does not touch the likelihood). T = 0: upsilon ~ Dir(c + n_h)
/// copied into every nu_x.
inline GroupMixingWeights update_mixing_weights(const SufficientStats& stats, bool alternative,
                                                const PriorConfig& config, Rng& rng) {
    const auto H = static_cast<std::size_t>(stats.components);
    std::vector<double> conc(H);
    if (alternative) {
        std::vector<ProbabilityVector> nus;
        nus.reserve(static_cast<std::size_t>(stats.groups));
        for (int x = 0; x < stats.groups; ++x) {
            const auto row = stats.group_row(x);
            for (std::size_t h = 0; h < H; ++h) conc[h] = config.nu_concentration + static_cast<double>(row[h]);
            nus.push_back(sample_dirichlet(conc, rng));
        }
        ProbabilityVector upsilon = sample_symmetric_dirichlet(config.nu_concentration, H, rng);
        return GroupMixingWeights::group_specific(std::move(nus), std::move(upsilon));
    }
    for (std::size_t h = 0; h < H; ++h) conc[h] = config.nu_concentration + static_cast<double>(stats.n_h[h]);
    return GroupMixingWeights::shared(sample_dirichlet(conc, rng), stats.groups);
}

// ---------------------------------------------------------------------------

/// One chain. The initial parameters are a prior draw and the initial latent
/// classes are uniform; each iteration then runs steps 1 to 5 in order.
inline ChainOutput run_chain(const Dataset& data, const PriorConfig& config, const Schedule& schedule, RngSpec spec) {
    data.validate();
    schedule.validate();
    const CategorySpace space(data.space.levels, data.space.groups, config.h_bar);
    config.validate(space);

    Rng rng(spec);
    ChainOutput out;
    out.space = space;
    out.config = config;
    out.schedule = schedule;
    out.rng = spec;
    out.draws.reserve(static_cast<std::size_t>(schedule.retained()));
    out.occupancy.reserve(static_cast<std::size_t>(schedule.retained()));

    JointModel state = sample_prior_model(config, space, rng);
    LatentState latent;
    latent.z.resize(data.size());
    for (auto& z : latent.z) z = static_cast<int>(rng.uniform() * static_cast<double>(config.h_bar));
    SufficientStats stats = compute_stats(data, latent, config.h_bar);

    for (int t = 1; t <= schedule.n_iter; ++t) {
        state.pi_x = update_group_marginal(stats, config, rng);
        latent = update_latent_classes(data, state, rng);
        stats = compute_stats(data, latent, config.h_bar);
        assert(stats.consistent());
        state.profiles = update_component_profiles(stats, config, rng);
        const bool alternative = update_testing_indicator(stats, config, rng);
        state.weights = update_mixing_weights(stats, alternative, config, rng);

        if (t > schedule.burn_in && (t - schedule.burn_in) % schedule.thin == 0) {
            out.draws.push_back(state);
            out.occupancy.push_back(stats.occupied_components());
        }
    }
    return out;
}

/// `chains` independent chains on streams 1..chains of `seed`, run on at most
/// `workers` threads. Results are ordered by chain id regardless of timing.
inline std::vector<ChainOutput> run_chains(const Dataset& data, const PriorConfig& config, const Schedule& schedule,
                                           std::uint64_t seed, int chains, int workers = 0) {
    if (chains < 1) throw ArgumentError("need at least one chain");
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, chains);

    std::vector<ChainOutput> out(static_cast<std::size_t>(chains));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int c = next++; c < chains; c = next++) {
            try {
                out[static_cast<std::size_t>(c)] =
                    run_chain(data, config, schedule, RngSpec{seed, static_cast<std::uint64_t>(c) + 1});
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace catdiff
