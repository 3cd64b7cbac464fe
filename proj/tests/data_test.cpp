#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "catdiff/dataset.hpp"
#include "catdiff/simulate.hpp"
#include "oracles.hpp"

using namespace catdiff;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("catdiff_data_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string write_file(const fs::path& dir, const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
}

/// The same model restricted to `vars` (the law of those variables given X
/// is unchanged by dropping the others).
JointModel restrict_to(const JointModel& m, const std::vector<std::size_t>& vars) {
    JointModel out;
    std::vector<int> levels;
    for (std::size_t j : vars) levels.push_back(m.space.levels[j]);
    out.space = CategorySpace(levels, m.space.groups, m.space.components);
    out.pi_x = m.pi_x;
    out.profiles = ComponentProfiles(m.space.components, levels);
    for (int h = 0; h < m.space.components; ++h)
        for (std::size_t a = 0; a < vars.size(); ++a) {
            const auto k = m.profiles(h, vars[a]);
            out.profiles.set(h, a, ProbabilityVector(std::vector<double>(k.begin(), k.end())));
        }
    out.weights = m.weights;
    return out;
}

}  // namespace

TEST(GenerateFromModel, DegenerateKernelsRepeatOneRow) {
    JointModel m;
    m.space = CategorySpace({3, 2, 4}, 2, 1);
    m.pi_x = ProbabilityVector({0.5, 0.5});
    m.profiles = ComponentProfiles(1, {3, 2, 4});
    m.profiles.set(0, 0, ProbabilityVector::one_hot(3, 2));
    m.profiles.set(0, 1, ProbabilityVector::one_hot(2, 0));
    m.profiles.set(0, 2, ProbabilityVector::one_hot(4, 1));
    m.weights = GroupMixingWeights::shared(ProbabilityVector({1.0}), 2);
    Rng rng(RngSpec{1, 0});
    const std::vector<int> counts{4, 3};
    const auto d = generate_from_model(m, counts, rng);
    ASSERT_EQ(d.size(), 7u);
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(std::vector<int>(d.row(i).begin(), d.row(i).end()), (std::vector<int>{2, 0, 1}));
        EXPECT_EQ(d.x[i], i < 4 ? 0 : 1);
    }
}

TEST(GenerateFromModel, ZeroCountsGiveEmptyDataset) {
    Rng rng(RngSpec{2, 0});
    const auto m = oracle::random_model(CategorySpace({2, 2}, 2, 2), rng);
    const std::vector<int> counts{0, 0};
    const auto d = generate_from_model(m, counts, rng);
    EXPECT_EQ(d.size(), 0u);
    EXPECT_NO_THROW(d.validate());
    EXPECT_THROW(generate_from_model(m, std::vector<int>{1}, rng), ArgumentError);
}

TEST(GenerateFromModel, FrequenciesWithinThreeSigma) {
    Rng rng(RngSpec{3, 0});
    const CategorySpace space({2, 3, 2}, 2, 3);
    const auto m = oracle::random_model(space, rng);
    const int n = 100000;
    const std::vector<int> counts{n, n};
    const auto d = generate_from_model(m, counts, rng);
    std::vector<std::vector<double>> freq(2, std::vector<double>(12, 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto y = d.row(i);
        freq[static_cast<std::size_t>(d.x[i])][static_cast<std::size_t>((y[0] * 3 + y[1]) * 2 + y[2])] += 1.0 / n;
    }
    const auto tensor = full_joint_tensor(m);
    for (int x = 0; x < 2; ++x) {
        const std::size_t all[3] = {0, 1, 2};
        const auto cond = oracle::conditional_from_tensor(tensor, all, x);
        for (std::size_t c = 0; c < 12; ++c) {
            const double p = cond.values[c];
            const double se = std::sqrt(p * (1 - p) / n);
            EXPECT_NEAR(freq[static_cast<std::size_t>(x)][c], p, 3 * se + 1e-12) << "group " << x << " cell " << c;
        }
    }
}

TEST(GenerateFromModel, DeterministicForSeed) {
    const auto a = build_scenario(ScenarioSpec{2, 50, 9});
    const auto b = build_scenario(ScenarioSpec{2, 50, 9});
    EXPECT_EQ(a.first, b.first);
    EXPECT_EQ(a.second, b.second);
    EXPECT_NE(a.second, build_scenario(ScenarioSpec{2, 50, 10}).second);
}

TEST(BuildScenario, DimensionsAndDefaultSize) {
    const auto [m, d] = build_scenario(ScenarioSpec{1, 200, 1});
    EXPECT_EQ(m.space.variables(), 17u);
    EXPECT_EQ(m.space.groups, 2);
    EXPECT_EQ(m.space.components, 5);
    EXPECT_EQ(d.size(), 400u);
    EXPECT_THROW(build_scenario(ScenarioSpec{4, 10, 1}), ArgumentError);
    EXPECT_THROW(build_scenario(ScenarioSpec{0, 10, 1}), ArgumentError);
}

TEST(BuildScenario, BackgroundVariablesShareOneKernel) {
    const auto m = build_scenario(ScenarioSpec{2, 0, 5}).first;
    for (std::size_t j = 0; j < 17; ++j) {
        if (scenario::is_signal(j)) continue;
        for (int h = 1; h < 5; ++h)
            for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(m.profiles(h, j)[c], m.profiles(0, j)[c]);
    }
}

TEST(BuildScenario, ScenarioOneGroupsIdentical) {
    const auto m = build_scenario(ScenarioSpec{1, 0, 6}).first;
    EXPECT_FALSE(m.weights.alternative());
    const std::vector<int> y{0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0, 1, 2, 3, 0};
    EXPECT_EQ(eval_conditional_pmf(m, y, 0), eval_conditional_pmf(m, y, 1));
    // Null holds exactly on an enumerable restriction: signal variables plus
    // two background variables.
    const auto sub = restrict_to(m, {0, 4, 9, 11, 14, 16});
    const auto tensor = full_joint_tensor(sub);
    const std::size_t all[6] = {0, 1, 2, 3, 4, 5};
    const auto marginal = marginal_pmf_unconditional(sub, all);
    for_each_cell(std::span<const int>(tensor.dims), [&](std::span<const int> c) {
        EXPECT_NEAR(tensor(c), marginal(c.first(6)) * sub.pi_x[static_cast<std::size_t>(c[6])], 1e-12);
    });
}

TEST(BuildScenario, ScenarioTwoGroupOneSignalMarginal) {
    const auto m = build_scenario(ScenarioSpec{2, 0, 7}).first;
    for (std::size_t j : scenario::kSignalVariables) {
        const std::size_t keep[1] = {j};
        const auto t = marginal_pmf_subset(m, keep, 0);
        EXPECT_EQ(t.values, (std::vector<double>{0.75, 0.25, 0.0, 0.0}));
    }
}

TEST(BuildScenario, ScenarioThreeMarginalsEqualPairsDiffer) {
    const auto m = build_scenario(ScenarioSpec{3, 0, 8}).first;
    for (std::size_t j = 0; j < 17; ++j) {
        const std::size_t keep[1] = {j};
        const auto a = marginal_pmf_subset(m, keep, 0);
        const auto b = marginal_pmf_subset(m, keep, 1);
        double l1 = 0;
        for (std::size_t c = 0; c < 4; ++c) l1 += std::abs(a.values[c] - b.values[c]);
        EXPECT_LE(l1, 1e-12);
        if (scenario::is_signal(j))
            for (double v : b.values) EXPECT_NEAR(v, 0.25, 1e-15);
    }
    const std::size_t pair[2] = {4, 16};
    const auto a = marginal_pmf_subset(m, pair, 0);
    const auto b = marginal_pmf_subset(m, pair, 1);
    double l1 = 0;
    for (std::size_t c = 0; c < a.values.size(); ++c) l1 += std::abs(a.values[c] - b.values[c]);
    EXPECT_GT(l1, 0.1);
}

// --- CSV -----------------------------------------------------------------------

TEST(ReadDataset, WellFormedFile) {
    const auto dir = temp_dir("ok");
    const auto path = write_file(dir, "d.csv", "a,b,group\n1,3,1\n2,1,2\n");
    const auto d = read_dataset(path);
    EXPECT_EQ(d.size(), 2u);
    EXPECT_EQ(d.space.levels, (std::vector<int>{2, 3}));
    EXPECT_EQ(d.space.groups, 2);
    EXPECT_EQ(d.names, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(d.y, (std::vector<int>{0, 2, 1, 0}));
    EXPECT_EQ(d.x, (std::vector<int>{0, 1}));
}

TEST(ReadDataset, GroupColumnAnywhereAndCustomName) {
    const auto dir = temp_dir("col");
    const auto path = write_file(dir, "d.csv", "party,a,b\r\n2,1,1\r\n1,2,2\r\n");
    const auto d = read_dataset(path, DatasetSchema{"party", std::nullopt, std::nullopt});
    EXPECT_EQ(d.x, (std::vector<int>{1, 0}));
    EXPECT_EQ(d.y, (std::vector<int>{0, 0, 1, 1}));
    EXPECT_THROW(read_dataset(path), IngestionError);
}

TEST(ReadDataset, OutOfRangeNamesRowAndColumn) {
    const auto dir = temp_dir("range");
    const auto path = write_file(dir, "d.csv", "a,b,group\n1,2,1\n4,5,2\n");
    try {
        read_dataset(path, DatasetSchema{"group", std::vector<int>{4, 4}, 2});
        FAIL() << "expected an ingestion error";
    } catch (const IngestionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
        EXPECT_NE(msg.find("'b'"), std::string::npos) << msg;
    }
}

TEST(ReadDataset, MalformedCellsRejected) {
    const auto dir = temp_dir("bad");
    EXPECT_THROW(read_dataset(write_file(dir, "a.csv", "a,group\nx,1\n")), IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "b.csv", "a,group\n1,\n")), IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "c.csv", "a,group\n1\n")), IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "d.csv", "a,group\n0,1\n")), IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "e.csv", "a,group\n1,3\n"), DatasetSchema{"group", std::nullopt, 2}),
                 IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "f.csv", "")), IngestionError);
    EXPECT_THROW(read_dataset((dir / "missing.csv").string()), IngestionError);
    EXPECT_THROW(read_dataset(write_file(dir, "g.csv", "a,b,group\n1,1,1\n"), DatasetSchema{"group", std::vector<int>{2}, 1}),
                 IngestionError);
}

TEST(WriteDataset, RoundTripIsIdentity) {
    const auto dir = temp_dir("rt");
    auto d = build_scenario(ScenarioSpec{3, 30, 2}).second;
    const auto path = (dir / "d.csv").string();
    write_dataset(d, path);
    const auto back = read_dataset(path, DatasetSchema{"group", d.space.levels, d.space.groups});
    EXPECT_EQ(back.y, d.y);
    EXPECT_EQ(back.x, d.x);
    EXPECT_EQ(back.space.levels, d.space.levels);
    write_dataset(back, (dir / "again.csv").string());
    std::ifstream a(path), b(dir / "again.csv");
    EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST(WriteDataset, EmptyDatasetIsHeaderOnly) {
    Dataset d;
    d.space = CategorySpace({2, 3}, 2, 1);
    EXPECT_EQ(format_dataset(d), "y1,y2,group\n");
}

TEST(WriteDataset, StableColumnOrder) {
    Dataset d;
    d.space = CategorySpace({2, 3}, 2, 1);
    d.names = {"first", "second"};
    d.push_back(std::vector<int>{1, 2}, 1);
    EXPECT_EQ(format_dataset(d), "first,second,group\n2,3,2\n");
    EXPECT_EQ(format_dataset(d), format_dataset(d));
}
