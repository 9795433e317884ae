#include <gtest/gtest.h>

#include <cmath>

#include "cogsim/random.hpp"
#include "cogsim/stats.hpp"

using namespace cogsim;

TEST(Stats, KolmogorovConstants)
{
    // tabulated asymptotic critical values
    EXPECT_NEAR(ks_critical_constant(0.05), 1.3581, 1e-4);
    EXPECT_NEAR(ks_critical_constant(0.01), 1.6276, 1e-4);
    EXPECT_NEAR(kolmogorov_survival(1.3581), 0.05, 1e-3);
    EXPECT_NEAR(kolmogorov_survival(1.6276), 0.01, 1e-3);
    EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
}

TEST(Stats, TwoSampleStatistic)
{
    EXPECT_DOUBLE_EQ(ks_two_sample_statistic({1, 2, 3, 4}, {1, 2, 3, 4}), 0.0);
    EXPECT_DOUBLE_EQ(ks_two_sample_statistic({1, 1, 1, 1}, {2, 2, 2, 2}), 1.0);
    EXPECT_DOUBLE_EQ(ks_two_sample_statistic({1, 2}, {2, 3}), 0.5);
}

TEST(Stats, OneSampleRejectsAShiftedLaw)
{
    RandomStream rng(1);
    std::vector<std::int64_t> x;
    for (int i = 0; i < 20'000; ++i) {
        std::int64_t k = 1;
        while (rng.uniform() < 0.5) ++k;
        x.push_back(k);
    }
    const auto geom = [](double p) {
        return [p](std::int64_t k) { return k < 1 ? 0.0 : 1.0 - std::pow(1.0 - p, static_cast<double>(k)); };
    };
    EXPECT_FALSE(ks_one_sample_discrete(x, geom(0.5)).rejected);
    EXPECT_TRUE(ks_one_sample_discrete(x, geom(0.45)).rejected);
}

TEST(Stats, DkwAndShortfall)
{
    EXPECT_NEAR(dkw_epsilon(10'000, 0.01), std::sqrt(std::log(200.0) / 20'000.0), 1e-15);
    EXPECT_DOUBLE_EQ(max_cdf_shortfall({1, 1, 2}, {2, 3, 4}), 0.0);
    EXPECT_NEAR(max_cdf_shortfall({3, 3}, {1, 3}), 0.5, 1e-15);
}

TEST(Stats, QuantilesAndSlope)
{
    const std::vector<int> v{1, 2, 3, 4, 5};
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 3.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 5.0);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.125), 1.5);
    EXPECT_NEAR(least_squares_slope({0, 1, 2, 3}, {1, 3, 5, 7}), 2.0, 1e-15);
    EXPECT_EQ(least_squares_slope({1}, {1}), 0.0);
}

TEST(Random, StreamsAreIndependentAndReproducible)
{
    RandomStream a(7, StreamId::arrivals), b(7, StreamId::channel), c(7, StreamId::arrivals);
    int same = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next(), y = b.next(), z = c.next();
        same += x == y;
        ASSERT_EQ(x, z);
    }
    EXPECT_EQ(same, 0);
    RandomStream u(8);
    for (int i = 0; i < 10'000; ++i) {
        const double x = u.uniform();
        ASSERT_GE(x, 0.0);
        ASSERT_LT(x, 1.0);
    }
}
