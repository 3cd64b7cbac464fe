#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "catdiff/priors.hpp"
#include "catdiff/rng.hpp"

using namespace catdiff;

TEST(DefaultConfig, ScenarioDimensions) {
    const CategorySpace space(std::vector<int>(17, 4), 2, 10);
    const auto c = default_config(space);
    EXPECT_EQ(c.alpha, (std::vector<double>{0.5, 0.5}));
    for (const auto& g : c.gamma) EXPECT_EQ(g, (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
    EXPECT_EQ(c.pr_h1, 0.5);
    EXPECT_EQ(c.h_bar, 10);
    EXPECT_DOUBLE_EQ(c.nu_concentration, 0.1);
    EXPECT_NO_THROW(c.validate(space));
}

TEST(DefaultConfig, SingleGroupAndBinaryVariables) {
    const auto c = default_config(CategorySpace({2, 2}, 1, 3));
    EXPECT_EQ(c.alpha, std::vector<double>{0.5});
    EXPECT_EQ(c.gamma[1], (std::vector<double>{0.5, 0.5}));
}

TEST(PriorConfig, ValidateRejectsInconsistencies) {
    const CategorySpace space({2, 3}, 2, 4);
    auto good = default_config(space);
    auto c = good;
    c.alpha = {0.5};
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.alpha[0] = 0.0;
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.gamma[1] = {1.0, 1.0};
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.gamma[0][1] = -1.0;
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.pr_h1 = 1.5;
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.h_bar = 5;
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.nu_concentration = 0.0;
    EXPECT_THROW(c.validate(space), ArgumentError);
    c = good;
    c.pr_h1 = 0.0;
    EXPECT_NO_THROW(c.validate(space));
}

TEST(Rng, SameSpecSameSequence) {
    Rng a(RngSpec{99, 3}), b(RngSpec{99, 3}), c(RngSpec{99, 4});
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double va = a.uniform();
        EXPECT_EQ(va, b.uniform());
        differs |= va != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, CategoricalSkipsZeroWeights) {
    Rng rng(RngSpec{1, 1});
    const std::vector<double> w{0.0, 2.0, 0.0, 1.0};
    int hits[4] = {0, 0, 0, 0};
    for (int i = 0; i < 30000; ++i) ++hits[rng.categorical(w)];
    EXPECT_EQ(hits[0], 0);
    EXPECT_EQ(hits[2], 0);
    EXPECT_NEAR(hits[1] / 30000.0, 2.0 / 3.0, 0.01);
}

TEST(Rng, SmallShapeLogGammaStaysFinite) {
    Rng rng(RngSpec{2, 0});
    double mean = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double l = rng.log_gamma_variate(0.05);
        ASSERT_TRUE(std::isfinite(l));
        mean += std::exp(l);
    }
    EXPECT_NEAR(mean / n, 0.05, 0.005);
}

TEST(SampleDirichlet, DegenerateSimplex) {
    Rng rng(RngSpec{3, 0});
    const std::vector<double> conc{0.3};
    for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_dirichlet(conc, rng)[0], 1.0);
}

TEST(SampleDirichlet, RejectsNonpositive) {
    Rng rng(RngSpec{3, 0});
    EXPECT_THROW(sample_dirichlet(std::vector<double>{1.0, 0.0}, rng), ArgumentError);
    EXPECT_THROW(sample_dirichlet(std::vector<double>{}, rng), ArgumentError);
}

TEST(SampleDirichlet, MomentsMatchConcentration) {
    Rng rng(RngSpec{4, 0});
    for (const auto& conc : {std::vector<double>{1, 1}, std::vector<double>{5, 1}, std::vector<double>{0.1, 0.1, 0.1}}) {
        double total = 0;
        for (double a : conc) total += a;
        std::vector<double> mean(conc.size(), 0.0);
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const auto v = sample_dirichlet(conc, rng);
            for (std::size_t c = 0; c < conc.size(); ++c) mean[c] += v[c] / n;
        }
        for (std::size_t c = 0; c < conc.size(); ++c) EXPECT_NEAR(mean[c], conc[c] / total, 0.01);
    }
}

TEST(SampleDirichlet, TinyConcentrationsNeverUnderflowToZeroVector) {
    Rng rng(RngSpec{5, 0});
    for (int i = 0; i < 10000; ++i) {
        const auto v = sample_symmetric_dirichlet(0.001, 10, rng);
        double s = 0;
        for (double x : v.values()) s += x;
        ASSERT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(SamplePriorModel, BoundaryProbabilitiesPinIndicator) {
    const CategorySpace space({2, 3}, 3, 4);
    auto cfg = default_config(space);
    Rng rng(RngSpec{6, 0});
    cfg.pr_h1 = 0.0;
    for (int i = 0; i < 200; ++i) {
        const auto m = sample_prior_model(cfg, space, rng);
        ASSERT_FALSE(m.weights.alternative());
        for (int x = 1; x < 3; ++x) ASSERT_EQ(m.weights.nu(x), m.weights.nu(0));
    }
    cfg.pr_h1 = 1.0;
    for (int i = 0; i < 200; ++i) ASSERT_TRUE(sample_prior_model(cfg, space, rng).weights.alternative());
}

TEST(SamplePriorModel, IndicatorFrequencyAndStructure) {
    const CategorySpace space({2, 2}, 2, 3);
    const auto cfg = default_config(space);
    Rng rng(RngSpec{7, 0});
    int ones = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto m = sample_prior_model(cfg, space, rng);
        ASSERT_NO_THROW(m.validate());
        if (m.weights.alternative()) {
            ++ones;
            ASSERT_NE(m.weights.nu(0), m.weights.nu(1));
        } else {
            ASSERT_EQ(m.weights.nu(0), m.weights.nu(1));
        }
    }
    EXPECT_NEAR(static_cast<double>(ones) / n, 0.5, 0.02);
}

TEST(SamplePriorModel, GroupWeightsIndependentUnderAlternative) {
    // Correlation of nu_{1,1} and nu_{1,2} across draws should vanish.
    const CategorySpace space({2}, 2, 2);
    auto cfg = default_config(space);
    cfg.pr_h1 = 1.0;
    cfg.nu_concentration = 1.0;
    Rng rng(RngSpec{8, 0});
    const int n = 20000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i) {
        const auto m = sample_prior_model(cfg, space, rng);
        const double a = m.weights.nu(0)[0], b = m.weights.nu(1)[0];
        sa += a;
        sb += b;
        sab += a * b;
        saa += a * a;
        sbb += b * b;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    EXPECT_LT(std::abs(corr), 0.05);
}

TEST(SamplePriorModel, ReproducibleForEqualSpec) {
    const CategorySpace space({3, 2, 4}, 2, 5);
    const auto cfg = default_config(space);
    Rng a(RngSpec{10, 2}), b(RngSpec{10, 2});
    for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_prior_model(cfg, space, a), sample_prior_model(cfg, space, b));
}
