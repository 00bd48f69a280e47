#include "fbc/error.hpp"
#include "fbc/fd.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fbc;

TEST(Grid, UniformPointsAndWeights) {
    const Grid g = Grid::uniform(0.0, 1.0, 11);
    ASSERT_EQ(g.size(), 11u);
    EXPECT_DOUBLE_EQ(g.spacing(), 0.1);
    EXPECT_EQ(g[7], 0.7);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_NEAR(g.weights().sum(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(g.weights()(0), 0.05);
    EXPECT_DOUBLE_EQ(g.weights()(5), 0.1);
}

TEST(Grid, RejectsBadPoints) {
    EXPECT_THROW(Grid({0.0, 1.0}), DataError);
    EXPECT_THROW(Grid({0.0, 0.5, 0.4}), DataError);
    EXPECT_THROW(Grid({0.0, 0.1, 0.3}), DataError);
    EXPECT_THROW(Grid({0.0, NAN, 1.0}), DataError);
}

TEST(Grid, Matches) {
    const Grid a = Grid::uniform(0.0, 1.0, 51);
    EXPECT_TRUE(a.matches(Grid::uniform(0.0, 1.0, 51)));
    EXPECT_FALSE(a.matches(Grid::uniform(0.0, 1.0, 52)));
    EXPECT_FALSE(a.matches(Grid::uniform(0.0, 1.1, 51)));
}

TEST(Quadrature, TrapezoidExactForLinearAndConvergentForSmooth) {
    const Grid g = Grid::uniform(0.0, 1.0, 101);
    Vector one = Vector::Ones(101);
    Vector t = Eigen::Map<const Vector>(g.points().data(), 101);
    EXPECT_NEAR(inner_product(one, t, g), 0.5, 1e-14);
    Vector s(101);
    for (int i = 0; i < 101; ++i) s(i) = std::numbers::sqrt2 * std::sin(std::numbers::pi * g[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(l2_norm(s, g), 1.0, 1e-4);
    EXPECT_THROW(inner_product(one.head(5), t, g), DimensionError);
}

namespace {

FunctionalDataset toy(int n0, int n1) {
    const Grid g = Grid::uniform(0.0, 1.0, 5);
    Matrix x(n0 + n1, 5);
    std::vector<int> y;
    for (int i = 0; i < n0 + n1; ++i) {
        for (int j = 0; j < 5; ++j) x(i, j) = (i < n0 ? 0.0 : 3.0) + 0.1 * i + 0.01 * j * j;
        y.push_back(i < n0 ? 0 : 1);
    }
    return {g, x, y};
}

}  // namespace

TEST(Dataset, EmpiricalPriorsAndCounts) {
    const auto d = toy(3, 5);
    ASSERT_EQ(d.num_groups(), 2u);
    EXPECT_DOUBLE_EQ(d.priors()[0], 3.0 / 8.0);
    EXPECT_EQ(d.group_counts()[1], 5u);
    EXPECT_EQ(d.group_indices(0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Dataset, RejectsSingletonGroupsAndBadShapes) {
    EXPECT_THROW(toy(1, 4), DataError);
    const Grid g = Grid::uniform(0.0, 1.0, 5);
    EXPECT_THROW(FunctionalDataset(g, Matrix::Zero(4, 6), {0, 0, 1, 1}), DimensionError);
    EXPECT_THROW(FunctionalDataset(g, Matrix::Zero(4, 5), {0, 0, 1}), DimensionError);
    EXPECT_THROW(FunctionalDataset(g, Matrix::Zero(4, 5), {0, 0, 1, 1}, {0.3, 0.3}), DataError);
    EXPECT_THROW(FunctionalDataset(g, Matrix::Zero(4, 5), {0, 0, -1, 1}), DataError);
}

TEST(Dataset, SubsetReestimatesPriors) {
    const auto d = toy(4, 4);
    const std::vector<std::size_t> rows{0, 1, 4, 5, 6, 7};
    const auto s = d.subset(rows);
    EXPECT_EQ(s.size(), 6u);
    EXPECT_DOUBLE_EQ(s.priors()[0], 1.0 / 3.0);
    EXPECT_EQ(s.curves().row(2), d.curves().row(4));
}

TEST(Smoother, ReproducesLinearFunctionsAndRowsSumToOne) {
    const Grid g = Grid::uniform(0.0, 1.0, 51);
    const LocalLinearSmoother sm(g, default_presmooth_bandwidth(g));
    EXPECT_EQ(sm.fallback_points(), 0u);
    Vector line(51);
    for (int i = 0; i < 51; ++i) line(i) = 2.0 - 3.0 * g[static_cast<std::size_t>(i)];
    EXPECT_LT((sm.apply(line) - line).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((sm.weights().rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_THROW(LocalLinearSmoother(g, 0.0), ParameterError);
}

TEST(Smoother, ReducesNoise) {
    const Grid g = Grid::uniform(0.0, 1.0, 101);
    const LocalLinearSmoother sm(g, default_presmooth_bandwidth(g));
    Vector noise(101);
    for (int i = 0; i < 101; ++i) noise(i) = (i % 2 == 0) ? 1.0 : -1.0;
    EXPECT_LT(sm.apply(noise).norm(), 0.1 * noise.norm());
}

TEST(Centering, GroupMeansVanish) {
    const auto d = toy(3, 4);
    const auto c = center_by_group(d);
    Matrix sums = Matrix::Zero(2, 5);
    for (std::size_t i = 0; i < d.size(); ++i) sums.row(d.labels()[i]) += c.data.curves().row(static_cast<Eigen::Index>(i));
    EXPECT_LT(sums.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(c.group_means(1, 0), 3.0 + 0.1 * (3 + 4 + 5 + 6) / 4.0, 1e-12);
}
