#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "catdiff/errors.hpp"
#include "catdiff/gibbs.hpp"
#include "catdiff/model.hpp"

namespace catdiff {

// ---------------------------------------------------------------------------
// Global test

struct GlobalTestResult {
    double pr_h1_given_data = 0.0;
    std::size_t n_draws = 0;
    std::optional<double> threshold;  // reporting only

    bool exceeds_threshold() const { return threshold && pr_h1_given_data > *threshold; }
};

/// Fraction of retained draws with T = 1.
inline GlobalTestResult global_test(std::span<const JointModel> draws, std::optional<double> threshold = std::nullopt) {
    if (draws.empty()) throw ArgumentError("global test needs at least one draw");
    std::size_t ones = 0;
    for (const auto& d : draws) ones += d.weights.alternative() ? 1 : 0;
    return {static_cast<double>(ones) / static_cast<double>(draws.size()), draws.size(), threshold};
}

inline GlobalTestResult global_test(const ChainOutput& chain, std::optional<double> threshold = std::nullopt) {
    return global_test(chain.draws, threshold);
}

// ---------------------------------------------------------------------------
// Cramer's V functionals of one draw

/// Component visiting order that depends only on the multiset of components,
/// so sums over h are bit-identical under any relabeling of the components.
inline std::vector<int> canonical_component_order(const JointModel& draw) {
    const int H = draw.space.components;
    std::vector<int> order(static_cast<std::size_t>(H));
    std::iota(order.begin(), order.end(), 0);
    auto key_less = [&](int a, int b) {
        for (int x = 0; x < draw.space.groups; ++x) {
            const double va = draw.weights.nu(x)[static_cast<std::size_t>(a)];
            const double vb = draw.weights.nu(x)[static_cast<std::size_t>(b)];
            if (va != vb) return va < vb;
        }
        const auto raw = draw.profiles.raw();
        const std::size_t stride = draw.profiles.stride();
        for (std::size_t i = 0; i < stride; ++i) {
            const double va = raw[static_cast<std::size_t>(a) * stride + i];
            const double vb = raw[static_cast<std::size_t>(b) * stride + i];
            if (va != vb) return va < vb;
        }
        return false;
    };
    std::sort(order.begin(), order.end(), key_less);
    return order;
}

namespace detail {

/// sum over cells of (obs - exp)^2 / exp, with 0/0 cells contributing 0.
struct ChiSquare {
    double total = 0.0;
    void add(double observed, double expected) {
        const double diff = observed - expected;
        if (expected > 0.0) {
            total += diff * diff / expected;
        } else if (diff != 0.0) {
            throw NumericalDegeneracyError("Cramer's V cell has zero expected mass but nonzero deviation");
        }
    }
    double cramers_v(int min_levels) const {
        if (min_levels <= 1) return 0.0;
        return std::min(1.0, std::sqrt(total / static_cast<double>(min_levels - 1)));
    }
};

/// pi_{Y_j|X=x}(c) for every x and c, summed in `order`. Row-major by group.
inline std::vector<double> conditional_marginals(const JointModel& draw, std::size_t j, std::span<const int> order) {
    const int d = draw.space.levels[j];
    std::vector<double> out(static_cast<std::size_t>(draw.space.groups * d), 0.0);
    for (int x = 0; x < draw.space.groups; ++x) {
        const auto& nu = draw.weights.nu(x);
        double* row = out.data() + static_cast<std::size_t>(x * d);
        for (int h : order) {
            const double w = nu[static_cast<std::size_t>(h)];
            const auto kernel = draw.profiles(h, j);
            for (int c = 0; c < d; ++c) row[c] += w * kernel[static_cast<std::size_t>(c)];
        }
    }
    return out;
}

inline double marginal_v_from_conditionals(const JointModel& draw, std::span<const double> cond, int d) {
    const int k = draw.space.groups;
    // Identical rows: the joint factorizes exactly, V is 0.
    bool identical = true;
    for (int x = 1; x < k && identical; ++x)
        identical = std::equal(cond.begin(), cond.begin() + d, cond.begin() + x * d);
    if (identical) return 0.0;

    std::vector<double> margin(static_cast<std::size_t>(d), 0.0);
    for (int x = 0; x < k; ++x)
        for (int c = 0; c < d; ++c)
            margin[static_cast<std::size_t>(c)] += cond[static_cast<std::size_t>(x * d + c)] * draw.pi_x[static_cast<std::size_t>(x)];
    ChiSquare chi;
    for (int x = 0; x < k; ++x) {
        const double px = draw.pi_x[static_cast<std::size_t>(x)];
        for (int c = 0; c < d; ++c)
            chi.add(cond[static_cast<std::size_t>(x * d + c)] * px, margin[static_cast<std::size_t>(c)] * px);
    }
    return chi.cramers_v(std::min(k, d));
}

inline double pairwise_v(const JointModel& draw, std::size_t j, std::size_t jj, int x, std::span<const double> cond_j,
                         std::span<const double> cond_jj, std::span<const int> order) {
    const int da = draw.space.levels[j];
    const int db = draw.space.levels[jj];
    const auto& nu = draw.weights.nu(x);
    std::vector<double> joint(static_cast<std::size_t>(da * db), 0.0);
    for (int h : order) {
        const double w = nu[static_cast<std::size_t>(h)];
        if (w == 0.0) continue;
        const auto ka = draw.profiles(h, j);
        const auto kb = draw.profiles(h, jj);
        for (int a = 0; a < da; ++a) {
            const double wa = w * ka[static_cast<std::size_t>(a)];
            for (int b = 0; b < db; ++b) joint[static_cast<std::size_t>(a * db + b)] += wa * kb[static_cast<std::size_t>(b)];
        }
    }
    const double* ma = cond_j.data() + static_cast<std::size_t>(x * da);
    const double* mb = cond_jj.data() + static_cast<std::size_t>(x * db);
    ChiSquare chi;
    for (int a = 0; a < da; ++a)
        for (int b = 0; b < db; ++b) chi.add(joint[static_cast<std::size_t>(a * db + b)], ma[a] * mb[b]);
    return chi.cramers_v(std::min(da, db));
}

inline void check_variable(const JointModel& draw, std::size_t j) {
    if (j >= draw.space.variables())
        throw DimensionError("variable " + std::to_string(j + 1) + " outside 1.." + std::to_string(draw.space.variables()));
}

}  // namespace detail

/// Model-based Cramer's V between Y_j and the group X.
inline double cramers_v_marginal(const JointModel& draw, std::size_t j) {
    detail::check_variable(draw, j);
    const auto order = canonical_component_order(draw);
    const auto cond = detail::conditional_marginals(draw, j, order);
    return detail::marginal_v_from_conditionals(draw, cond, draw.space.levels[j]);
}

/// Model-based Cramer's V between Y_j and Y_j' within group x.
inline double cramers_v_pairwise(const JointModel& draw, std::size_t j, std::size_t jj, int x) {
    detail::check_variable(draw, j);
    detail::check_variable(draw, jj);
    if (j == jj) throw ArgumentError("pairwise Cramer's V needs two distinct variables");
    if (x < 0 || x >= draw.space.groups) throw DimensionError("group " + std::to_string(x + 1) + " out of range");
    const auto order = canonical_component_order(draw);
    const auto cj = detail::conditional_marginals(draw, j, order);
    const auto cjj = detail::conditional_marginals(draw, jj, order);
    return detail::pairwise_v(draw, j, jj, x, cj, cjj, order);
}

/// Every rho_j and every rho_{jj'|x} (j < j') of one draw.
struct DrawAssociations {
    std::vector<double> marginal;               // p
    std::vector<std::vector<double>> pairwise;  // per group, pairs in pair_index order
};

/// Position of the pair (j, jj), j < jj, in the flattened upper triangle.
inline std::size_t pair_index(std::size_t j, std::size_t jj, std::size_t p) {
    return j * p - j * (j + 1) / 2 + (jj - j - 1);
}

inline DrawAssociations draw_associations(const JointModel& draw) {
    const std::size_t p = draw.space.variables();
    const auto order = canonical_component_order(draw);
    std::vector<std::vector<double>> cond(p);
    DrawAssociations out;
    out.marginal.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        cond[j] = detail::conditional_marginals(draw, j, order);
        out.marginal[j] = detail::marginal_v_from_conditionals(draw, cond[j], draw.space.levels[j]);
    }
    out.pairwise.assign(static_cast<std::size_t>(draw.space.groups), std::vector<double>(p * (p - 1) / 2));
    for (int x = 0; x < draw.space.groups; ++x)
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t jj = j + 1; jj < p; ++jj)
                out.pairwise[static_cast<std::size_t>(x)][pair_index(j, jj, p)] =
                    detail::pairwise_v(draw, j, jj, x, cond[j], cond[jj], order);
    return out;
}

// ---------------------------------------------------------------------------
// Posterior summaries

/// Type-7 (linear interpolation) quantile of sorted values.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw ArgumentError("quantile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo == hi) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct CramersVTarget {
    enum class Kind { marginal, pairwise } kind = Kind::marginal;
    std::size_t j = 0;
    std::size_t jj = 0;  // pairwise only
    int x = 0;           // pairwise only
};

struct CramersVSummary {
    CramersVTarget target;
    double mean = 0.0;
    double q05 = 0.0;
    double q50 = 0.0;
    double q95 = 0.0;
    double exceedance = 0.0;  // pr(rho > tau | data)
    double tau = 0.1;
};

inline CramersVSummary summarize_values(CramersVTarget target, std::vector<double> values, double tau) {
    if (values.empty()) throw ArgumentError("no draws to summarize");
    CramersVSummary s;
    s.target = target;
    s.tau = tau;
    double total = 0.0;
    std::size_t above = 0;
    for (double v : values) {
        total += v;
        above += v > tau ? 1 : 0;
    }
    s.mean = total / static_cast<double>(values.size());
    s.exceedance = static_cast<double>(above) / static_cast<double>(values.size());
    std::sort(values.begin(), values.end());
    s.q05 = sorted_quantile(values, 0.05);
    s.q50 = sorted_quantile(values, 0.5);
    s.q95 = sorted_quantile(values, 0.95);
    return s;
}

struct LocalTestSummary {
    double tau = 0.1;
    std::vector<CramersVSummary> marginal;               // p
    std::vector<std::vector<CramersVSummary>> pairwise;  // per group, pair_index order

    const CramersVSummary& pair(std::size_t j, std::size_t jj, int x) const {
        if (j > jj) std::swap(j, jj);
        return pairwise.at(static_cast<std::size_t>(x)).at(pair_index(j, jj, marginal.size()));
    }
};

/// Posterior mean, 5/50/95% quantiles and pr(rho > tau) for every rho_j and
/// every rho_{jj'|x}.
inline LocalTestSummary summarize_local_tests(std::span<const JointModel> draws, double tau = 0.1) {
    if (draws.empty()) throw ArgumentError("local tests need at least one draw");
    if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("exceedance threshold must lie in (0,1)");
    const std::size_t p = draws.front().space.variables();
    const int k = draws.front().space.groups;
    const std::size_t pairs = p * (p - 1) / 2;
    const std::size_t n = draws.size();

    std::vector<std::vector<double>> marginal(p, std::vector<double>(n));
    std::vector<std::vector<std::vector<double>>> pairwise(static_cast<std::size_t>(k),
                                                           std::vector<std::vector<double>>(pairs, std::vector<double>(n)));
    for (std::size_t d = 0; d < n; ++d) {
        const auto a = draw_associations(draws[d]);
        for (std::size_t j = 0; j < p; ++j) marginal[j][d] = a.marginal[j];
        for (int x = 0; x < k; ++x)
            for (std::size_t q = 0; q < pairs; ++q) pairwise[static_cast<std::size_t>(x)][q][d] = a.pairwise[static_cast<std::size_t>(x)][q];
    }

    LocalTestSummary out;
    out.tau = tau;
    for (std::size_t j = 0; j < p; ++j)
        out.marginal.push_back(summarize_values({CramersVTarget::Kind::marginal, j, 0, 0}, std::move(marginal[j]), tau));
    out.pairwise.resize(static_cast<std::size_t>(k));
    for (int x = 0; x < k; ++x)
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t jj = j + 1; jj < p; ++jj)
                out.pairwise[static_cast<std::size_t>(x)].push_back(
                    summarize_values({CramersVTarget::Kind::pairwise, j, jj, x},
                                     std::move(pairwise[static_cast<std::size_t>(x)][pair_index(j, jj, p)]), tau));
    return out;
}

inline LocalTestSummary summarize_local_tests(const ChainOutput& chain, double tau = 0.1) {
    return summarize_local_tests(chain.draws, tau);
}

/// Posterior of pi_{Y_j|X=a}(c) - pi_{Y_j|X=b}(c) for every category c.
struct MarginalDifferenceSummary {
    std::size_t j = 0;
    int group_a = 0;
    int group_b = 1;
    double level = 0.9;
    std::vector<double> mean;
    std::vector<double> lower;
    std::vector<double> upper;
};

/// Equal-tail credible intervals at `level`.
inline MarginalDifferenceSummary marginal_differences(std::span<const JointModel> draws, std::size_t j, int group_a = 0,
                                                      int group_b = 1, double level = 0.9) {
    if (draws.empty()) throw ArgumentError("marginal differences need at least one draw");
    const auto& space = draws.front().space;
    if (space.groups < 2) throw ArgumentError("marginal differences need at least two groups");
    if (group_a < 0 || group_b < 0 || group_a >= space.groups || group_b >= space.groups || group_a == group_b)
        throw ArgumentError("invalid group pair for marginal differences");
    if (!(level > 0.0 && level < 1.0)) throw ArgumentError("credible level must lie in (0,1)");
    detail::check_variable(draws.front(), j);

    const int d = space.levels[j];
    std::vector<std::vector<double>> diffs(static_cast<std::size_t>(d), std::vector<double>(draws.size()));
    for (std::size_t t = 0; t < draws.size(); ++t) {
        const auto order = canonical_component_order(draws[t]);
        const auto cond = detail::conditional_marginals(draws[t], j, order);
        for (int c = 0; c < d; ++c)
            diffs[static_cast<std::size_t>(c)][t] =
                cond[static_cast<std::size_t>(group_a * d + c)] - cond[static_cast<std::size_t>(group_b * d + c)];
    }
    MarginalDifferenceSummary s;
    s.j = j;
    s.group_a = group_a;
    s.group_b = group_b;
    s.level = level;
    const double tail = (1.0 - level) / 2.0;
    for (auto& v : diffs) {
        double total = 0.0;
        for (double e : v) total += e;
        s.mean.push_back(total / static_cast<double>(v.size()));
        std::sort(v.begin(), v.end());
        s.lower.push_back(sorted_quantile(v, tail));
        s.upper.push_back(sorted_quantile(v, 1.0 - tail));
    }
    return s;
}

inline MarginalDifferenceSummary marginal_differences(const ChainOutput& chain, std::size_t j, int group_a = 0,
                                                      int group_b = 1, double level = 0.9) {
    return marginal_differences(chain.draws, j, group_a, group_b, level);
}

}  // namespace catdiff
