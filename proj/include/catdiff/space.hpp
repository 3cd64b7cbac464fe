#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catdiff/errors.hpp"

namespace catdiff {

/// Largest dense Y x X enumeration the brute-force oracles will build.
inline constexpr std::uint64_t kOracleCellCap = 10'000'000;

/// Dimensions of a problem: level counts d_j of the p categorical
/// variables, the number of groups k and the mixture truncation level.
///
/// Indices are 0-based everywhere inside the library; 1-based codes only
/// appear in CSV/JSON files and CLI output.
struct CategorySpace {
    std::vector<int> levels;
    int groups = 1;
    int components = 1;

    CategorySpace() = default;
    CategorySpace(std::vector<int> lv, int k, int h) : levels(std::move(lv)), groups(k), components(h) {
        validate();
    }

    std::size_t variables() const noexcept { return levels.size(); }

    void validate() const {
        if (levels.empty()) throw ArgumentError("category space needs at least one variable");
        for (std::size_t j = 0; j < levels.size(); ++j) {
            if (levels[j] < 2)
                throw ArgumentError("variable " + std::to_string(j + 1) + " has fewer than 2 levels");
        }
        if (groups < 1) throw ArgumentError("category space needs at least one group");
        if (components < 1) throw ArgumentError("truncation level must be >= 1");
    }

    /// k * prod_j d_j, or 0 when that overflows 64 bits.
    std::uint64_t joint_cell_count() const noexcept {
        std::uint64_t cells = static_cast<std::uint64_t>(groups);
        for (int d : levels) {
            if (cells > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(d)) return 0;
            cells *= static_cast<std::uint64_t>(d);
        }
        return cells;
    }

    /// Total number of (variable, level) pairs, i.e. sum_j d_j.
    std::size_t total_levels() const noexcept {
        return static_cast<std::size_t>(std::accumulate(levels.begin(), levels.end(), 0));
    }

    friend bool operator==(const CategorySpace&, const CategorySpace&) = default;
};

/// A point on the probability simplex. Validated on construction.
class ProbabilityVector {
public:
    static constexpr double kSumTolerance = 1e-12;

    ProbabilityVector() = default;

    explicit ProbabilityVector(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) throw ArgumentError("probability vector must be nonempty");
        double total = 0.0;
        for (double v : values_) {
            if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("probability entry outside [0,1]");
            total += v;
        }
        if (std::abs(total - 1.0) > kSumTolerance)
            throw ArgumentError("probability vector does not sum to 1");
    }

    static ProbabilityVector uniform(std::size_t n) {
        return ProbabilityVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
    }

    static ProbabilityVector one_hot(std::size_t n, std::size_t at) {
        std::vector<double> v(n, 0.0);
        v.at(at) = 1.0;
        return ProbabilityVector(std::move(v));
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }

    friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

private:
    std::vector<double> values_;
};

}  // namespace catdiff
