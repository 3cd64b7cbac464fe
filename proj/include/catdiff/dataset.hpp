#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "catdiff/errors.hpp"
#include "catdiff/space.hpp"

namespace catdiff {

/// n units of (y_i, x_i). Categories and groups are 0-based in memory.
/// `space.components` is not meaningful for data and is left at 1.
struct Dataset {
    CategorySpace space;
    std::vector<int> y;  // n x p, row-major
    std::vector<int> x;
    std::vector<std::string> names;  // p variable names, may be empty

    std::size_t size() const noexcept { return x.size(); }
    std::span<const int> row(std::size_t i) const noexcept {
        const std::size_t p = space.variables();
        return {y.data() + i * p, p};
    }

    void push_back(std::span<const int> cats, int group) {
        y.insert(y.end(), cats.begin(), cats.end());
        x.push_back(group);
    }

    void validate() const {
        space.validate();
        const std::size_t p = space.variables();
        if (y.size() != x.size() * p) throw DimensionError("dataset category matrix has wrong size");
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < 0 || x[i] >= space.groups)
                throw DimensionError("row " + std::to_string(i + 1) + ": group outside 1.." + std::to_string(space.groups));
            for (std::size_t j = 0; j < p; ++j) {
                const int c = y[i * p + j];
                if (c < 0 || c >= space.levels[j])
                    throw DimensionError("row " + std::to_string(i + 1) + ", variable " + std::to_string(j + 1) +
                                         ": category outside 1.." + std::to_string(space.levels[j]));
            }
        }
    }

    std::string name(std::size_t j) const { return j < names.size() ? names[j] : "y" + std::to_string(j + 1); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// How to interpret a dataset file. Unset level counts and group counts are
/// inferred from the largest code observed (at least 2 levels per variable).
struct DatasetSchema {
    std::string group_column = "group";
    std::optional<std::vector<int>> levels;
    std::optional<int> groups;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// Reads a comma-separated file with a header row and 1-based integer codes.
inline Dataset read_dataset(const std::string& path, const DatasetSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open dataset file " + path);

    std::string line;
    if (!std::getline(in, line)) throw IngestionError(path + ": missing header row");
    std::vector<std::string> header;
    for (auto cell : detail::split_csv_line(line)) header.emplace_back(cell);
    const auto group_at = std::find(header.begin(), header.end(), schema.group_column);
    if (group_at == header.end()) throw IngestionError(path + ": no column named '" + schema.group_column + "'");
    const auto group_col = static_cast<std::size_t>(group_at - header.begin());

    Dataset data;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != group_col) data.names.emplace_back(header[c]);
    const std::size_t p = data.names.size();
    if (p == 0) throw IngestionError(path + ": no categorical columns");
    if (schema.levels && schema.levels->size() != p)
        throw IngestionError(path + ": schema declares " + std::to_string(schema.levels->size()) + " variables, file has " +
                             std::to_string(p));

    std::vector<int> observed_max(p, 0);
    int max_group = 0;
    std::vector<int> cats(p);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        ++row;
        const auto cells = detail::split_csv_line(line);
        const std::string where = path + ": row " + std::to_string(row);
        if (cells.size() != header.size())
            throw IngestionError(where + ": expected " + std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));
        std::size_t j = 0;
        int group = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const std::string column(header[c]);
            if (cells[c].empty()) throw IngestionError(where + ", column '" + column + "': missing value");
            int v = 0;
            auto [end, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
            if (ec != std::errc{} || end != cells[c].data() + cells[c].size())
                throw IngestionError(where + ", column '" + column + "': cannot parse '" + std::string(cells[c]) + "'");
            if (v < 1) throw IngestionError(where + ", column '" + column + "': codes start at 1");
            if (c == group_col) {
                if (schema.groups && v > *schema.groups)
                    throw IngestionError(where + ", column '" + column + "': group " + std::to_string(v) + " outside 1.." +
                                         std::to_string(*schema.groups));
                group = v - 1;
                max_group = std::max(max_group, v);
            } else {
                if (schema.levels && v > (*schema.levels)[j])
                    throw IngestionError(where + ", column '" + column + "': category " + std::to_string(v) +
                                         " outside 1.." + std::to_string((*schema.levels)[j]));
                cats[j] = v - 1;
                observed_max[j] = std::max(observed_max[j], v);
                ++j;
            }
        }
        data.push_back(cats, group);
    }

    if (schema.levels) {
        data.space.levels = *schema.levels;
    } else {
        data.space.levels.resize(p);
        for (std::size_t j = 0; j < p; ++j) data.space.levels[j] = std::max(2, observed_max[j]);
    }
    data.space.groups = schema.groups ? *schema.groups : std::max(1, max_group);
    data.space.components = 1;
    try {
        data.validate();
    } catch (const Error& e) {
        throw IngestionError(path + ": " + e.what());
    }
    return data;
}

/// Header row of variable names then "group"; 1-based codes; '\n' endings.
inline std::string format_dataset(const Dataset& data, const std::string& group_column = "group") {
    std::ostringstream out;
    const std::size_t p = data.space.variables();
    for (std::size_t j = 0; j < p; ++j) out << data.name(j) << ',';
    out << group_column << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int c : data.row(i)) out << (c + 1) << ',';
        out << (data.x[i] + 1) << '\n';
    }
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    if (!out.flush()) throw IoError("write to " + path + " failed");
}

inline void write_dataset(const Dataset& data, const std::string& path, const std::string& group_column = "group") {
    write_text_file(path, format_dataset(data, group_column));
}

}  // namespace catdiff
