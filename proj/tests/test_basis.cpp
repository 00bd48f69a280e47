#include "fbc/basis.hpp"
#include "fbc/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fbc;

namespace {

// Curves sum_j sqrt(lambda_j) xi_j phi_j with a sine basis on [0, 1].
FunctionalDataset sine_curves(std::size_t n, std::size_t m, std::uint64_t seed, double shift = 0.0) {
    const Grid g = Grid::uniform(0.0, 1.0, m);
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = static_cast<int>(i % 2);
        for (int j = 1; j <= 4; ++j) {
            const double a = z(gen) / j;
            for (std::size_t t = 0; t < m; ++t) x(i, t) += a * std::numbers::sqrt2 * std::sin(j * std::numbers::pi * g[t]);
        }
        if (y[i] == 1) x.row(i).array() += shift;
    }
    return {g, x, y};
}

Matrix gram(const Matrix& f, const Grid& g) { return f * g.weights().asDiagonal() * f.transpose(); }

}  // namespace

TEST(Fpca, OperatorResidual) {
    const auto d = sine_curves(80, 41, 1);
    const auto b = fpca(d, 6);
    const Matrix centered = d.curves().rowwise() - d.curves().colwise().mean();
    const Matrix cov = centered.transpose() * centered / 79.0;
    const Matrix W = d.grid().weights().asDiagonal();
    for (int j = 0; j < 6; ++j) {
        const Vector phi = b.functions.row(j).transpose();
        const Vector r = cov * W * phi - b.eigenvalues(j) * phi;
        EXPECT_LT(r.cwiseAbs().maxCoeff(), 1e-8 * b.eigenvalues(0)) << j;
    }
    EXPECT_LT((gram(b.functions, d.grid()) - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
    for (int j = 1; j < 6; ++j) EXPECT_GE(b.eigenvalues(j - 1), b.eigenvalues(j));
}

TEST(Fpca, RecoversGeneratingBasis) {
    const auto d = sine_curves(4000, 101, 2);
    const auto b = fpca(d, 3);
    for (int j = 0; j < 3; ++j) {
        Vector phi(101);
        for (int t = 0; t < 101; ++t) phi(t) = std::numbers::sqrt2 * std::sin((j + 1) * std::numbers::pi * d.grid()[t]);
        EXPECT_GT(std::abs(inner_product(phi, b.functions.row(j).transpose(), d.grid())), 0.99) << j;
        EXPECT_NEAR(b.eigenvalues(j), 1.0 / ((j + 1.0) * (j + 1.0)), 0.08 / ((j + 1.0) * (j + 1.0)));
    }
}

TEST(Fpca, RejectsInfeasibleJ) {
    const auto d = sine_curves(10, 21, 3);
    EXPECT_THROW(fpca(d, 10), ParameterError);
    EXPECT_THROW(fpca(d, 0), ParameterError);
    EXPECT_NO_THROW(fpca(d, 9));
}

TEST(Fpca, TruncationIsNested) {
    const auto d = sine_curves(60, 31, 4);
    const auto b = fpca(d, 8);
    const Matrix full = project(d, b);
    const Matrix part = project(d, b.truncate(3));
    EXPECT_EQ(part, full.leftCols(3));
}

TEST(Fpca, ScoresAreUncorrelatedWithEigenvalueVariance) {
    const auto d = sine_curves(200, 51, 5);
    const auto b = fpca(d, 4);
    const Matrix s = project(d, b);
    const Matrix c = (s.rowwise() - s.colwise().mean()).transpose() * (s.rowwise() - s.colwise().mean()) / 199.0;
    for (int j = 0; j < 4; ++j) {
        EXPECT_NEAR(c(j, j), b.eigenvalues(j), 1e-10 * b.eigenvalues(0));
        for (int k = 0; k < j; ++k) EXPECT_NEAR(c(j, k), 0.0, 1e-10 * b.eigenvalues(0));
    }
}

TEST(Fpls, ScoreAndWeightOrthogonality) {
    const auto d = sine_curves(120, 41, 6, 0.3);
    const auto dec = fpls_decompose(d, 5);
    const Matrix& s = dec.scores;
    const Matrix sts = s.transpose() * s;
    for (int j = 0; j < 5; ++j)
        for (int k = 0; k < j; ++k) EXPECT_NEAR(sts(j, k), 0.0, 1e-9 * std::sqrt(sts(j, j) * sts(k, k)));
    EXPECT_LT((gram(dec.basis.functions, d.grid()) - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fpls, ProjectReplaysTrainingScores) {
    const auto d = sine_curves(90, 31, 7, 0.5);
    const auto dec = fpls_decompose(d, 4);
    const Matrix s = project(d, dec.basis);
    EXPECT_LT((s - dec.scores).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(project(d, dec.basis.truncate(2)), s.leftCols(2));
}

TEST(Fpls, FirstWeightIsNormalisedCrossCovariance) {
    const auto d = sine_curves(70, 31, 8, 0.4);
    const auto b = fpls(d, 1);
    const Matrix xc = d.curves().rowwise() - d.curves().colwise().mean();
    Vector y(70);
    for (int i = 0; i < 70; ++i) y(i) = d.labels()[i] - 0.5;
    Vector w = xc.transpose() * y;
    w /= l2_norm(w, d.grid());
    const Vector got = b.functions.row(0).transpose();
    EXPECT_LT(std::min((got - w).cwiseAbs().maxCoeff(), (got + w).cwiseAbs().maxCoeff()), 1e-10);
}

TEST(Basis, GroupEigenstructureAndSigns) {
    const auto d = sine_curves(60, 31, 9);
    const auto groups = group_eigenstructure(d, 3);
    ASSERT_EQ(groups.size(), 2u);
    Matrix f(2, 3);
    f << 0.1, -0.5, 0.2, -0.3, 0.3, 0.1;
    normalize_signs(f);
    EXPECT_EQ(f(0, 1), 0.5);
    EXPECT_EQ(f(1, 0), 0.3);
}
