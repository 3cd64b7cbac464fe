#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "catdiff/errors.hpp"
#include "catdiff/space.hpp"

namespace catdiff {

/// Per-component categorical kernels pi_hj, stored contiguously: for each
/// component h the p kernels are laid out back to back (sum_j d_j doubles).
class ComponentProfiles {
public:
    ComponentProfiles() = default;

    /// Every kernel starts out uniform.
    ComponentProfiles(int components, std::vector<int> levels)
        : components_(components), levels_(std::move(levels)), offsets_(levels_.size() + 1, 0) {
        for (std::size_t j = 0; j < levels_.size(); ++j) offsets_[j + 1] = offsets_[j] + static_cast<std::size_t>(levels_[j]);
        values_.resize(static_cast<std::size_t>(components_) * offsets_.back());
        for (int h = 0; h < components_; ++h)
            for (std::size_t j = 0; j < levels_.size(); ++j) {
                auto row = mutable_row(h, j);
                std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(levels_[j]));
            }
    }

    int components() const noexcept { return components_; }
    std::size_t variables() const noexcept { return levels_.size(); }
    const std::vector<int>& levels() const noexcept { return levels_; }
    std::size_t stride() const noexcept { return offsets_.back(); }
    std::size_t offset(std::size_t j) const noexcept { return offsets_[j]; }

    std::span<const double> operator()(int h, std::size_t j) const noexcept {
        return {values_.data() + static_cast<std::size_t>(h) * stride() + offsets_[j],
                static_cast<std::size_t>(levels_[j])};
    }

    void set(int h, std::size_t j, const ProbabilityVector& pv) {
        if (h < 0 || h >= components_ || j >= levels_.size())
            throw DimensionError("profile index (" + std::to_string(h + 1) + "," + std::to_string(j + 1) + ") out of range");
        if (pv.size() != static_cast<std::size_t>(levels_[j]))
            throw DimensionError("profile for variable " + std::to_string(j + 1) + " has wrong length");
        std::copy(pv.values().begin(), pv.values().end(), mutable_row(h, j).begin());
    }

    /// All values, component-major. Used for serialization.
    std::span<const double> raw() const noexcept { return values_; }

    /// Rebuild from raw() output; each kernel is revalidated.
    static ComponentProfiles from_raw(int components, std::vector<int> levels, std::span<const double> raw) {
        ComponentProfiles out(components, std::move(levels));
        if (raw.size() != out.values_.size()) throw DimensionError("profile array has wrong size");
        for (int h = 0; h < components; ++h)
            for (std::size_t j = 0; j < out.variables(); ++j) {
                auto src = raw.subspan(static_cast<std::size_t>(h) * out.stride() + out.offsets_[j],
                                       static_cast<std::size_t>(out.levels_[j]));
                out.set(h, j, ProbabilityVector(std::vector<double>(src.begin(), src.end())));
            }
        return out;
    }

    friend bool operator==(const ComponentProfiles&, const ComponentProfiles&) = default;

private:
    std::span<double> mutable_row(int h, std::size_t j) noexcept {
        return {values_.data() + static_cast<std::size_t>(h) * stride() + offsets_[j],
                static_cast<std::size_t>(levels_[j])};
    }

    int components_ = 0;
    std::vector<int> levels_;
    std::vector<std::size_t> offsets_{0};
    std::vector<double> values_;
};

/// Group mixing weights nu_x = (1 - T) upsilon + T upsilon_x.
///
/// Under the shared regime (T = 0) every nu_x is a bitwise copy of upsilon.
class GroupMixingWeights {
public:
    GroupMixingWeights() = default;

    static GroupMixingWeights shared(ProbabilityVector upsilon, int groups) {
        GroupMixingWeights w;
        w.nu_.assign(static_cast<std::size_t>(groups), upsilon);
        w.upsilon_ = std::move(upsilon);
        w.alternative_ = false;
        return w;
    }

    /// `upsilon` is carried along so that a later switch back to T = 0 has a
    /// defined shared vector; it does not enter nu_x.
    static GroupMixingWeights group_specific(std::vector<ProbabilityVector> nus, ProbabilityVector upsilon) {
        if (nus.empty()) throw ArgumentError("need at least one group weight vector");
        for (const auto& v : nus)
            if (v.size() != upsilon.size()) throw DimensionError("group weight vectors differ in length");
        GroupMixingWeights w;
        w.nu_ = std::move(nus);
        w.upsilon_ = std::move(upsilon);
        w.alternative_ = true;
        return w;
    }

    bool alternative() const noexcept { return alternative_; }
    int indicator() const noexcept { return alternative_ ? 1 : 0; }
    int groups() const noexcept { return static_cast<int>(nu_.size()); }
    int components() const noexcept { return static_cast<int>(upsilon_.size()); }
    const ProbabilityVector& nu(int x) const { return nu_.at(static_cast<std::size_t>(x)); }
    const ProbabilityVector& upsilon() const noexcept { return upsilon_; }

    friend bool operator==(const GroupMixingWeights&, const GroupMixingWeights&) = default;

private:
    std::vector<ProbabilityVector> nu_;
    ProbabilityVector upsilon_;
    bool alternative_ = false;
};

/// pi_{Y,X}(y, x) = pi_X(x) sum_h nu_hx prod_j pi_hj(y_j).
struct JointModel {
    CategorySpace space;
    ProbabilityVector pi_x;
    ComponentProfiles profiles;
    GroupMixingWeights weights;

    void validate() const {
        space.validate();
        if (pi_x.size() != static_cast<std::size_t>(space.groups)) throw DimensionError("pi_X length differs from k");
        if (profiles.components() != space.components || profiles.levels() != space.levels)
            throw DimensionError("component profiles do not match the category space");
        if (weights.groups() != space.groups || weights.components() != space.components)
            throw DimensionError("mixing weights do not match the category space");
    }

    friend bool operator==(const JointModel&, const JointModel&) = default;
};

struct EvalOptions {
    /// Kernel products over more than this many variables are accumulated in
    /// log scale.
    std::size_t log_scale_above = 30;
};

/// Dense table over a product of finite ranges, row-major (last axis fastest).
struct CellTable {
    std::vector<int> dims;
    std::vector<double> values;

    std::size_t index(std::span<const int> cell) const {
        std::size_t at = 0;
        for (std::size_t a = 0; a < dims.size(); ++a) at = at * static_cast<std::size_t>(dims[a]) + static_cast<std::size_t>(cell[a]);
        return at;
    }
    double operator()(std::span<const int> cell) const { return values[index(cell)]; }
    double operator()(std::initializer_list<int> cell) const {
        return values[index(std::span<const int>(cell.begin(), cell.size()))];
    }
    double total() const noexcept {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
};

/// Calls fn(cell) for every cell of the product range `dims`, last axis fastest.
template <typename Fn>
void for_each_cell(std::span<const int> dims, Fn&& fn) {
    std::vector<int> cell(dims.size(), 0);
    for (int d : dims)
        if (d <= 0) return;
    while (true) {
        fn(std::span<const int>(cell));
        std::size_t a = dims.size();
        while (a > 0) {
            --a;
            if (++cell[a] < dims[a]) break;
            cell[a] = 0;
            if (a == 0) return;
        }
        if (dims.empty()) return;
    }
}

namespace detail {

inline void check_group(const JointModel& m, int x) {
    if (x < 0 || x >= m.space.groups)
        throw DimensionError("group " + std::to_string(x + 1) + " outside 1.." + std::to_string(m.space.groups));
}

inline void check_categories(const JointModel& m, std::span<const int> y) {
    if (y.size() != m.space.variables())
        throw DimensionError("category vector has length " + std::to_string(y.size()) + ", expected " +
                             std::to_string(m.space.variables()));
    for (std::size_t j = 0; j < y.size(); ++j)
        if (y[j] < 0 || y[j] >= m.space.levels[j])
            throw DimensionError("variable " + std::to_string(j + 1) + " category " + std::to_string(y[j] + 1) +
                                 " outside 1.." + std::to_string(m.space.levels[j]));
}

inline std::vector<std::size_t> checked_subset(const JointModel& m, std::span<const std::size_t> subset) {
    if (subset.empty()) throw ArgumentError("variable subset is empty");
    std::vector<std::size_t> sorted(subset.begin(), subset.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ArgumentError("variable subset has duplicate indices");
    if (sorted.back() >= m.space.variables())
        throw ArgumentError("variable index " + std::to_string(sorted.back() + 1) + " outside 1.." +
                            std::to_string(m.space.variables()));
    return {subset.begin(), subset.end()};
}

}  // namespace detail

/// pi_{Y|X=x}(y) for 0-based categories y and group x.
inline double eval_conditional_pmf(const JointModel& model, std::span<const int> y, int x, EvalOptions opts = {}) {
    detail::check_categories(model, y);
    detail::check_group(model, x);
    const auto& nu = model.weights.nu(x);
    const int H = model.space.components;

    if (y.size() <= opts.log_scale_above) {
        double total = 0.0;
        for (int h = 0; h < H; ++h) {
            double term = nu[static_cast<std::size_t>(h)];
            for (std::size_t j = 0; j < y.size(); ++j) term *= model.profiles(h, j)[static_cast<std::size_t>(y[j])];
            total += term;
        }
        return total;
    }

    // Zero factors map to -inf and drop out of the sum.
    std::vector<double> logs(static_cast<std::size_t>(H));
    double top = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < H; ++h) {
        double l = std::log(nu[static_cast<std::size_t>(h)]);
        for (std::size_t j = 0; j < y.size() && l > -std::numeric_limits<double>::infinity(); ++j)
            l += std::log(model.profiles(h, j)[static_cast<std::size_t>(y[j])]);
        logs[static_cast<std::size_t>(h)] = l;
        top = std::max(top, l);
    }
    if (top == -std::numeric_limits<double>::infinity()) return 0.0;
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    return std::exp(top) * acc;
}

inline double eval_joint_pmf(const JointModel& model, std::span<const int> y, int x, EvalOptions opts = {}) {
    return eval_conditional_pmf(model, y, x, opts) * model.pi_x[static_cast<std::size_t>(x)];
}

/// pi_{Y_J|X=x}: sum_h nu_hx prod_{j in J} pi_hj(y_j), tabulated over the
/// variables of `subset` in the given order. No enumeration of Y_{J^c}.
inline CellTable marginal_pmf_subset(const JointModel& model, std::span<const std::size_t> subset, int x) {
    const auto vars = detail::checked_subset(model, subset);
    detail::check_group(model, x);

    CellTable table;
    std::uint64_t cells = 1;
    for (std::size_t j : vars) {
        table.dims.push_back(model.space.levels[j]);
        cells *= static_cast<std::uint64_t>(model.space.levels[j]);
        if (cells > kOracleCellCap) throw CapacityError("marginal table exceeds the cell cap");
    }
    table.values.assign(cells, 0.0);

    std::vector<double> block;
    const auto& nu = model.weights.nu(x);
    for (int h = 0; h < model.space.components; ++h) {
        const double w = nu[static_cast<std::size_t>(h)];
        if (w == 0.0) continue;
        block.assign(1, w);
        for (std::size_t j : vars) {
            auto kernel = model.profiles(h, j);
            std::vector<double> next;
            next.reserve(block.size() * kernel.size());
            for (double b : block)
                for (double q : kernel) next.push_back(b * q);
            block = std::move(next);
        }
        for (std::size_t c = 0; c < block.size(); ++c) table.values[c] += block[c];
    }
    return table;
}

/// pi_{Y_J}: the group-conditional tables mixed with weights pi_X.
inline CellTable marginal_pmf_unconditional(const JointModel& model, std::span<const std::size_t> subset) {
    CellTable out;
    for (int x = 0; x < model.space.groups; ++x) {
        CellTable t = marginal_pmf_subset(model, subset, x);
        const double w = model.pi_x[static_cast<std::size_t>(x)];
        if (x == 0) {
            out.dims = t.dims;
            out.values.assign(t.values.size(), 0.0);
        }
        for (std::size_t c = 0; c < t.values.size(); ++c) out.values[c] += w * t.values[c];
    }
    return out;
}

/// Brute-force enumeration of pi_{Y,X} over every (y, x) cell. Axes are the p
/// variables followed by the group. Intended as a test oracle.
inline CellTable full_joint_tensor(const JointModel& model, EvalOptions opts = {}) {
    const std::uint64_t cells = model.space.joint_cell_count();
    if (cells == 0 || cells > kOracleCellCap)
        throw CapacityError("joint space has more than " + std::to_string(kOracleCellCap) + " cells");
    CellTable t;
    t.dims = model.space.levels;
    t.dims.push_back(model.space.groups);
    t.values.reserve(cells);
    const std::size_t p = model.space.variables();
    for_each_cell(std::span<const int>(t.dims), [&](std::span<const int> cell) {
        t.values.push_back(eval_joint_pmf(model, cell.first(p), cell[p], opts));
    });
    return t;
}

}  // namespace catdiff
