#include "fbc/copula.hpp"
#include "fbc/error.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace fbc;

namespace {

struct Normals {
    std::mt19937_64 gen;
    std::normal_distribution<double> z;
    double operator()() { return z(gen); }
};

Matrix correlated_normals(const Matrix& R, int n, Normals& next) {
    const Matrix L = Eigen::LLT<Matrix>(R).matrixL();
    Matrix out(n, R.rows());
    for (int i = 0; i < n; ++i) {
        Vector e(R.rows());
        for (auto& v : e) v = next();
        out.row(i) = (L * e).transpose();
    }
    return out;
}

}  // namespace

TEST(GaussianCopula, MatchesNormalDensityRatio) {
    Normals next{std::mt19937_64(11), {}};
    double worst = 0.0;
    for (int draw = 0; draw < 100; ++draw) {
        const int dim = 2 + draw % 6;
        const Matrix R = oracle::random_correlation(dim, next);
        const auto model = CopulaModel::gaussian(R);
        Vector z(dim), u(dim);
        for (int j = 0; j < dim; ++j) {
            z(j) = 1.5 * next();
            u(j) = oracle::normal_cdf(z(j));
        }
        const double want = oracle::gaussian_copula_ratio(z, R);
        const double got = gaussian_copula_logdensity(u, model);
        worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(TCopula, BivariateClosedForm) {
    const double rho = 0.6;
    Matrix R(2, 2);
    R << 1.0, rho, rho, 1.0;
    for (double nu : {2.5, 4.0, 30.0}) {
        const auto model = CopulaModel::student_t(R, nu);
        const auto t1 = [nu](double x) {
            return std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
                   0.5 * (nu + 1) * std::log1p(x * x / nu);
        };
        for (auto [x, y] : {std::pair{0.1, -0.4}, std::pair{2.0, 1.5}, std::pair{-3.0, 2.5}}) {
            const double q = (x * x - 2 * rho * x * y + y * y) / (1 - rho * rho);
            const double joint = -std::log(2 * std::numbers::pi) - 0.5 * std::log(1 - rho * rho) -
                                 0.5 * (nu + 2) * std::log1p(q / nu);
            Vector v(2);
            v << x, y;
            EXPECT_NEAR(model.t_log_density_from_t_scores(v), joint - t1(x) - t1(y), 1e-12);
        }
    }
}

TEST(TCopula, LargeTailIndexApproachesGaussian) {
    Normals next{std::mt19937_64(12), {}};
    double worst = 0.0;
    for (int draw = 0; draw < 50; ++draw) {
        // The exact gap grows like q^2 / nu for the quadratic form q, so keep R well conditioned.
        const Matrix R = oracle::random_correlation(4, next, 12);
        const auto g = CopulaModel::gaussian(R);
        const auto t = CopulaModel::student_t(R, 1e6);
        Vector u(4);
        for (auto& v : u) v = oracle::normal_cdf(next());
        worst = std::max(worst, std::abs(t_copula_logdensity(u, t) - gaussian_copula_logdensity(u, g)));
    }
    EXPECT_LT(worst, 1e-3);
}

TEST(Copula, OneDimensionalAndIndependenceAreFlat) {
    Vector u(1);
    u << 0.3;
    EXPECT_NEAR(copula_logdensity(u, CopulaModel::gaussian(Matrix::Identity(1, 1))), 0.0, 1e-15);
    EXPECT_NEAR(copula_logdensity(u, CopulaModel::student_t(Matrix::Identity(1, 1), 5.0)), 0.0, 1e-12);
    Vector w(3);
    w << 0.1, 0.5, 0.9;
    EXPECT_EQ(copula_logdensity(w, CopulaModel::independence(3)), 0.0);
    w(1) = 1.0;
    EXPECT_THROW(copula_logdensity(w, CopulaModel::independence(3)), DomainError);
}

TEST(Copula, RejectsBadCorrelation) {
    Matrix R(2, 2);
    R << 1.0, 1.2, 1.2, 1.0;
    EXPECT_THROW(CopulaModel::gaussian(R), NumericalError);
    R << 2.0, 0.0, 0.0, 1.0;
    EXPECT_THROW(CopulaModel::gaussian(R), NumericalError);
}

TEST(Kendall, MatchesBruteForceExactly) {
    Normals next{std::mt19937_64(13), {}};
    Matrix s(57, 4);
    for (int i = 0; i < 57; ++i)
        for (int j = 0; j < 4; ++j) s(i, j) = std::round(4.0 * next()) + (j == 3 ? s(i, 0) : 0.0);
    const Matrix tau = kendall_tau_matrix(s);
    for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            std::vector<double> x(57), y(57);
            for (int i = 0; i < 57; ++i) x[i] = s(i, a), y[i] = s(i, b);
            EXPECT_EQ(tau(a, b), oracle::kendall_brute(x, y)) << a << "," << b;
        }
    }
}

TEST(Spearman, MatchesPearsonOfRanks) {
    Matrix s(6, 2);
    s << 1, 10, 2, 30, 3, 20, 4, 60, 5, 50, 6, 40;
    // d = (0,1,-1,2,0,-2), rho = 1 - 6 * 10 / (6 * 35)
    EXPECT_NEAR(spearman_rho_matrix(s)(0, 1), 1.0 - 60.0 / 210.0, 1e-14);
    Matrix flat(4, 2);
    flat << 1, 1, 2, 1, 3, 1, 4, 1;
    EXPECT_THROW(spearman_rho_matrix(flat), DataError);
}

TEST(RankToCorrelation, Maps) {
    Matrix r(2, 2);
    r << 1.0, 0.5, 0.5, 1.0;
    EXPECT_NEAR(rank_to_correlation(r, RankMethod::KendallTau)(0, 1), std::sin(std::numbers::pi / 4), 1e-15);
    EXPECT_NEAR(rank_to_correlation(r, RankMethod::SpearmanRho)(0, 1), 2 * std::sin(std::numbers::pi / 12), 1e-15);
    EXPECT_THROW(rank_to_correlation(r, RankMethod::SpearmanRho, CopulaFamily::StudentT), ParameterError);
}

TEST(NearestPd, RepairsIndefiniteAndKeepsPd) {
    Matrix a(3, 3);
    a << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    const Matrix b = nearest_pd_repair(a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(b);
    EXPECT_GE(es.eigenvalues().minCoeff(), kMinCorrEigenvalue);
    EXPECT_LT((b.diagonal().array() - 1.0).abs().maxCoeff(), 1e-15);
    EXPECT_LT((b - b.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NO_THROW(CopulaModel::gaussian(b));
    Matrix pd(2, 2);
    pd << 1.0, 0.3, 0.3, 1.0;
    EXPECT_EQ(nearest_pd_repair(pd), pd);
}

TEST(PseudoObservations, RanksOverNPlusOne) {
    Matrix s(4, 1);
    s << 3.0, 1.0, 4.0, 2.0;
    const Matrix u = pseudo_observations(s);
    EXPECT_DOUBLE_EQ(u(0, 0), 0.6);
    EXPECT_DOUBLE_EQ(u(1, 0), 0.2);
    EXPECT_DOUBLE_EQ(u(2, 0), 0.8);
}

TEST(TailFit, HeavyTailsGiveSmallNuAndNormalsGiveLarge) {
    Normals next{std::mt19937_64(14), {}};
    Matrix R(3, 3);
    R << 1.0, 0.5, 0.2, 0.5, 1.0, 0.4, 0.2, 0.4, 1.0;
    const Matrix z = correlated_normals(R, 1500, next);
    std::mt19937_64 gen(15);
    std::chi_squared_distribution<double> chi(3.0);
    Matrix t = z;
    for (int i = 0; i < t.rows(); ++i) t.row(i) /= std::sqrt(chi(gen) / 3.0);
    const auto heavy = fit_copula(t, CopulaFamily::StudentT);
    EXPECT_GT(*heavy.tail_index(), 2.0);
    EXPECT_LT(*heavy.tail_index(), 6.0);
    const auto light = fit_copula(z, CopulaFamily::StudentT);
    EXPECT_GT(*light.tail_index(), 20.0);
    EXPECT_NEAR(heavy.corr()(0, 1), 0.5, 0.06);
}

TEST(TailFit, LikelihoodMatchesDensitySum) {
    Normals next{std::mt19937_64(16), {}};
    Matrix R(2, 2);
    R << 1.0, -0.3, -0.3, 1.0;
    const Matrix u = pseudo_observations(correlated_normals(R, 40, next));
    const TailLikelihood like(u);
    const Eigen::LLT<Matrix> chol(R);
    const auto model = CopulaModel::student_t(R, 7.0);
    double sum = 0.0;
    for (int i = 0; i < 40; ++i) sum += t_copula_logdensity(u.row(i).transpose(), model);
    EXPECT_NEAR(like(7.0, chol), sum, 1e-9);
}
