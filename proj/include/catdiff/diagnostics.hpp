#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "catdiff/analysis.hpp"
#include "catdiff/gibbs.hpp"

namespace catdiff {

struct EssEstimate {
    double ess = 0.0;
    bool zero_variance = false;
};

/// Effective sample size with Geyer's initial positive sequence: the
/// autocorrelation sum is truncated at the first lag pair
/// gamma(2m) + gamma(2m+1) that is not positive. Capped at the series length;
/// a constant series reports its length and sets zero_variance.
inline EssEstimate effective_sample_size(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n == 0) return {0.0, true};
    if (std::all_of(series.begin(), series.end(), [&](double v) { return v == series.front(); }))
        return {static_cast<double>(n), true};
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - mean;

    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += centered[i] * centered[i + lag];
        return s / static_cast<double>(n);
    };
    const double gamma0 = autocov(0);
    if (!(gamma0 > 0.0)) return {static_cast<double>(n), true};

    double pair_sum = 0.0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        const double pair = autocov(2 * m) + autocov(2 * m + 1);
        if (!(pair > 0.0)) break;
        pair_sum += pair;
    }
    if (pair_sum == 0.0) pair_sum = gamma0;  // first pair not positive: no usable autocorrelation
    const double tau = -1.0 + 2.0 * pair_sum / gamma0;
    const double ess = tau > 0.0 ? static_cast<double>(n) / tau : static_cast<double>(n);
    return {std::min(ess, static_cast<double>(n)), false};
}

struct MonitoredEss {
    std::string name;
    EssEstimate estimate;
};

struct Diagnostics {
    std::vector<MonitoredEss> ess;
    int max_occupancy = 0;
    int h_bar = 0;
    double saturated_fraction = 0.0;  // share of draws with every component occupied
    std::size_t retained = 0;
};

/// ESS of the T trace and of every rho_j trace, plus component occupancy.
inline Diagnostics compute_diagnostics(const ChainOutput& chain) {
    if (chain.draws.empty()) throw ArgumentError("diagnostics need at least one draw");
    const std::size_t n = chain.draws.size();
    const std::size_t p = chain.space.variables();
    std::vector<double> t_trace(n);
    std::vector<std::vector<double>> rho(p, std::vector<double>(n));
    for (std::size_t d = 0; d < n; ++d) {
        t_trace[d] = chain.draws[d].weights.alternative() ? 1.0 : 0.0;
        for (std::size_t j = 0; j < p; ++j) rho[j][d] = cramers_v_marginal(chain.draws[d], j);
    }
    Diagnostics out;
    out.retained = n;
    out.h_bar = chain.space.components;
    out.max_occupancy = chain.max_occupancy();
    out.ess.push_back({"T", effective_sample_size(t_trace)});
    for (std::size_t j = 0; j < p; ++j) out.ess.push_back({"rho_" + std::to_string(j + 1), effective_sample_size(rho[j])});
    const auto full = std::count(chain.occupancy.begin(), chain.occupancy.end(), chain.space.components);
    out.saturated_fraction = chain.occupancy.empty() ? 0.0 : static_cast<double>(full) / static_cast<double>(chain.occupancy.size());
    return out;
}

}  // namespace catdiff
