#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "json.hpp"

#include "catdiff/config.hpp"
#include "catdiff/errors.hpp"
#include "catdiff/gibbs.hpp"

namespace catdiff {

/// On-disk chain layout (format version 1). A directory holding
///
///   metadata.json    space, prior, schedule, rng, config hash, array table
///   pi_x.f64         [draws, k]
///   nu.f64           [draws, k, h_bar]
///   upsilon.f64      [draws, h_bar]
///   profiles.f64     [draws, h_bar, sum_j d_j]
///   T.u8             [draws]
///   occupancy.i32    [draws]
///
/// Arrays are flat little-endian, row-major.
inline constexpr int kChainFormatVersion = 1;
inline constexpr const char* kChainFormatName = "catdiff-chain";

namespace detail {

template <typename T>
void write_array(const std::filesystem::path& path, const std::vector<T>& values) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (T v : values) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
        out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
    }
    if (!out.flush()) throw IoError("write to " + path.string() + " failed");
}

template <typename T>
std::vector<T> read_array(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("missing chain array " + path.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() != expected * sizeof(T))
        throw IoError("chain array " + path.string() + " has " + std::to_string(raw.size()) + " bytes, expected " +
                      std::to_string(expected * sizeof(T)));
    std::vector<T> out(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, raw.data() + i * sizeof(T), sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(bytes), std::end(bytes));
        std::memcpy(&out[i], bytes, sizeof(T));
    }
    return out;
}

}  // namespace detail

inline void write_chain(const ChainOutput& chain, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create chain directory " + dir.string() + ": " + ec.message());

    const std::size_t n = chain.draws.size();
    const auto k = static_cast<std::size_t>(chain.space.groups);
    const auto H = static_cast<std::size_t>(chain.space.components);
    const std::size_t stride = chain.space.total_levels();

    std::vector<double> pi_x, nu, upsilon, profiles;
    std::vector<std::uint8_t> T;
    pi_x.reserve(n * k);
    nu.reserve(n * k * H);
    upsilon.reserve(n * H);
    profiles.reserve(n * H * stride);
    for (const auto& d : chain.draws) {
        pi_x.insert(pi_x.end(), d.pi_x.values().begin(), d.pi_x.values().end());
        for (int x = 0; x < chain.space.groups; ++x)
            nu.insert(nu.end(), d.weights.nu(x).values().begin(), d.weights.nu(x).values().end());
        upsilon.insert(upsilon.end(), d.weights.upsilon().values().begin(), d.weights.upsilon().values().end());
        profiles.insert(profiles.end(), d.profiles.raw().begin(), d.profiles.raw().end());
        T.push_back(d.weights.alternative() ? 1 : 0);
    }
    std::vector<std::int32_t> occupancy(chain.occupancy.begin(), chain.occupancy.end());

    detail::write_array(dir / "pi_x.f64", pi_x);
    detail::write_array(dir / "nu.f64", nu);
    detail::write_array(dir / "upsilon.f64", upsilon);
    detail::write_array(dir / "profiles.f64", profiles);
    detail::write_array(dir / "T.u8", T);
    detail::write_array(dir / "occupancy.i32", occupancy);

    nlohmann::json meta = {
        {"format", kChainFormatName},
        {"version", kChainFormatVersion},
        {"space", {{"levels", chain.space.levels}, {"groups", chain.space.groups}, {"h_bar", chain.space.components}}},
        {"prior", to_json(chain.config)},
        {"schedule", to_json(chain.schedule)},
        {"rng", {{"seed", chain.rng.seed}, {"stream", chain.rng.stream}}},
        {"config_hash", config_hash(chain.config, chain.schedule)},
        {"draws", n},
        {"arrays",
         {{"pi_x", {{"file", "pi_x.f64"}, {"dtype", "f64"}, {"shape", {n, k}}}},
          {"nu", {{"file", "nu.f64"}, {"dtype", "f64"}, {"shape", {n, k, H}}}},
          {"upsilon", {{"file", "upsilon.f64"}, {"dtype", "f64"}, {"shape", {n, H}}}},
          {"profiles", {{"file", "profiles.f64"}, {"dtype", "f64"}, {"shape", {n, H, stride}}}},
          {"T", {{"file", "T.u8"}, {"dtype", "u8"}, {"shape", {n}}}},
          {"occupancy", {{"file", "occupancy.i32"}, {"dtype", "i32"}, {"shape", {n}}}}}},
        {"warning",
         "component labels are not identified: pi_hj and nu columns may permute across draws; "
         "summaries are computed only from permutation-invariant functionals"},
    };
    write_text_file((dir / "metadata.json").string(), meta.dump(2) + "\n");
}

inline ChainOutput read_chain(const std::filesystem::path& dir) {
    const auto meta_path = dir / "metadata.json";
    std::ifstream in(meta_path);
    if (!in) throw IoError("no chain metadata at " + meta_path.string());
    ChainOutput chain;
    std::size_t n = 0;
    try {
        const auto meta = nlohmann::json::parse(in);
        if (meta.at("format").get<std::string>() != kChainFormatName) throw IoError(meta_path.string() + ": not a chain directory");
        if (meta.at("version").get<int>() != kChainFormatVersion)
            throw IoError(meta_path.string() + ": unsupported chain format version");
        const auto& sp = meta.at("space");
        chain.space = CategorySpace(sp.at("levels").get<std::vector<int>>(), sp.at("groups").get<int>(), sp.at("h_bar").get<int>());
        chain.config = prior_from_json(meta.at("prior"));
        chain.schedule = schedule_from_json(meta.at("schedule"));
        chain.rng = {meta.at("rng").at("seed").get<std::uint64_t>(), meta.at("rng").at("stream").get<std::uint64_t>()};
        n = meta.at("draws").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw IoError(meta_path.string() + ": corrupt metadata (" + e.what() + ")");
    }

    const auto k = static_cast<std::size_t>(chain.space.groups);
    const auto H = static_cast<std::size_t>(chain.space.components);
    const std::size_t stride = chain.space.total_levels();
    const auto pi_x = detail::read_array<double>(dir / "pi_x.f64", n * k);
    const auto nu = detail::read_array<double>(dir / "nu.f64", n * k * H);
    const auto upsilon = detail::read_array<double>(dir / "upsilon.f64", n * H);
    const auto profiles = detail::read_array<double>(dir / "profiles.f64", n * H * stride);
    const auto T = detail::read_array<std::uint8_t>(dir / "T.u8", n);
    const auto occupancy = detail::read_array<std::int32_t>(dir / "occupancy.i32", n);

    auto slice = [](const std::vector<double>& v, std::size_t at, std::size_t len) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(at), v.begin() + static_cast<std::ptrdiff_t>(at + len));
    };
    try {
        chain.draws.reserve(n);
        for (std::size_t d = 0; d < n; ++d) {
            JointModel m;
            m.space = chain.space;
            m.pi_x = ProbabilityVector(slice(pi_x, d * k, k));
            m.profiles = ComponentProfiles::from_raw(chain.space.components, chain.space.levels,
                                                     std::span<const double>(profiles).subspan(d * H * stride, H * stride));
            ProbabilityVector ups(slice(upsilon, d * H, H));
            if (T[d]) {
                std::vector<ProbabilityVector> rows;
                for (std::size_t x = 0; x < k; ++x) rows.emplace_back(slice(nu, (d * k + x) * H, H));
                m.weights = GroupMixingWeights::group_specific(std::move(rows), std::move(ups));
            } else {
                m.weights = GroupMixingWeights::shared(std::move(ups), chain.space.groups);
            }
            chain.draws.push_back(std::move(m));
            chain.occupancy.push_back(occupancy[d]);
        }
    } catch (const Error& e) {
        throw IoError(dir.string() + ": corrupt chain arrays (" + e.what() + ")");
    }
    return chain;
}

/// JSON document of one JointModel. Arrays are 0-based: profiles[h][j][c],
/// nu[x][h].
inline nlohmann::json model_to_json(const JointModel& m) {
    nlohmann::json profiles = nlohmann::json::array();
    for (int h = 0; h < m.space.components; ++h) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.space.variables(); ++j) {
            const auto k = m.profiles(h, j);
            row.push_back(std::vector<double>(k.begin(), k.end()));
        }
        profiles.push_back(std::move(row));
    }
    nlohmann::json nu = nlohmann::json::array();
    for (int x = 0; x < m.space.groups; ++x) nu.push_back(m.weights.nu(x).vector());
    return {{"format", "catdiff-model"},
            {"version", 1},
            {"space", {{"levels", m.space.levels}, {"groups", m.space.groups}, {"h_bar", m.space.components}}},
            {"pi_x", m.pi_x.vector()},
            {"T", m.weights.indicator()},
            {"upsilon", m.weights.upsilon().vector()},
            {"nu", nu},
            {"profiles", profiles}};
}

inline JointModel model_from_json(const nlohmann::json& doc) {
    try {
        JointModel m;
        const auto& sp = doc.at("space");
        m.space = CategorySpace(sp.at("levels").get<std::vector<int>>(), sp.at("groups").get<int>(), sp.at("h_bar").get<int>());
        m.pi_x = ProbabilityVector(doc.at("pi_x").get<std::vector<double>>());
        m.profiles = ComponentProfiles(m.space.components, m.space.levels);
        const auto& prof = doc.at("profiles");
        if (prof.size() != static_cast<std::size_t>(m.space.components)) throw DimensionError("profiles need h_bar rows");
        for (int h = 0; h < m.space.components; ++h) {
            const auto& row = prof.at(static_cast<std::size_t>(h));
            if (row.size() != m.space.variables()) throw DimensionError("profiles need p kernels per component");
            for (std::size_t j = 0; j < m.space.variables(); ++j)
                m.profiles.set(h, j, ProbabilityVector(row.at(j).get<std::vector<double>>()));
        }
        ProbabilityVector upsilon(doc.at("upsilon").get<std::vector<double>>());
        if (doc.at("T").get<int>() == 1) {
            std::vector<ProbabilityVector> rows;
            for (const auto& r : doc.at("nu")) rows.emplace_back(r.get<std::vector<double>>());
            m.weights = GroupMixingWeights::group_specific(std::move(rows), std::move(upsilon));
        } else {
            m.weights = GroupMixingWeights::shared(std::move(upsilon), m.space.groups);
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ArgumentError(std::string("malformed model document: ") + e.what());
    }
}

}  // namespace catdiff
