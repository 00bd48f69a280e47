#include "fbc/classifiers.hpp"
#include "fbc/error.hpp"
#include "fbc/simgen.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

using namespace fbc;

namespace {

GeneratedData scenario(const char* label, std::uint64_t seed, std::size_t n_train = 100) {
    auto cfg = ScenarioConfig::from_label(label);
    cfg.seed = seed;
    cfg.n_train = n_train;
    cfg.n_test = 60;
    return generate(cfg);
}

ClassifierSpec fixed(Method m, std::size_t J) {
    ClassifierSpec s;
    s.method = m;
    s.J = J;
    return s;
}

}  // namespace

TEST(Methods, Spellings) {
    for (Method m : kAllMethods) {
        EXPECT_EQ(parse_method(method_key(m)), m);
        EXPECT_EQ(parse_method(method_label(m)), m);
    }
    EXPECT_EQ(parse_method("BCT_pls"), Method::BCt_PLS);
    EXPECT_EQ(parse_method("Logistic"), Method::Logistic);
    EXPECT_THROW(parse_method("svm"), ParameterError);
    EXPECT_TRUE(uses_copula(Method::BCt));
    EXPECT_FALSE(uses_copula(Method::BC));
    EXPECT_EQ(basis_kind(Method::BCG_PLS), BasisKind::PLS);
    EXPECT_EQ(copula_family(Method::BCt_PLS), CopulaFamily::StudentT);
}

TEST(Spec, CopulaRangesStartAtTwo) {
    EXPECT_EQ(std::get<JRange>(ClassifierSpec::with_default_range(Method::BCG).J).min, 2u);
    EXPECT_EQ(std::get<JRange>(ClassifierSpec::with_default_range(Method::BC).J).min, 1u);
    ClassifierSpec s;
    s.method = Method::BCt;
    s.J = JRange{1, 5};
    EXPECT_EQ(std::get<JRange>(s.normalized().J).min, 2u);
    s.J = JRange{6, 5};
    EXPECT_THROW((void)s.normalized(), ParameterError);
    s.J = JRange{1, 5};
    s.folds = 1;
    EXPECT_THROW((void)s.normalized(), ParameterError);
}

TEST(Decide, TieBreaks) {
    Vector s(3);
    s << 1.0, 2.0, 2.0;
    EXPECT_EQ(decide(Method::BC, s), 1);
    Vector t(2);
    t << 0.5, 0.5;
    EXPECT_EQ(decide(Method::BCG, t), 0);
    EXPECT_EQ(decide(Method::CEN, t), 1);
}

TEST(Bayes, LogJointIsPriorPlusMarginalsForBc) {
    const auto data = scenario("RSDN", 1);
    const auto model = train(fixed(Method::BC, 4), data.train);
    const auto& bayes = std::get<TrainedBayesModel>(model.model);
    const Matrix scores = project(data.test, bayes.basis);
    const Matrix out = log_posterior_ratios(model, data.test.curves(), data.test.grid());
    for (int i = 0; i < 5; ++i) {
        for (int k = 0; k < 2; ++k) {
            const auto& g = bayes.groups[k];
            double want = std::log(g.prior);
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (double v : g.marginals[j].sample()) {
                    const double u = (scores(i, j) - v) / g.marginals[j].bandwidth();
                    s += std::exp(-0.5 * u * u) / (std::sqrt(2 * M_PI) * g.marginals[j].bandwidth());
                }
                want += std::log(s / static_cast<double>(g.marginals[j].sample().size()));
            }
            EXPECT_NEAR(out(i, k), want, 1e-9);
        }
    }
}

TEST(Bayes, CopulaTermUsesEcdfQuantiles) {
    const auto data = scenario("RSDN", 2);
    const auto model = train(fixed(Method::BCG, 3), data.train);
    const auto& g = std::get<TrainedBayesModel>(model.model).groups[1];
    const std::size_t n = g.sample_size();
    ASSERT_EQ(g.quantile_table.size(), static_cast<Eigen::Index>(n + 1));
    EXPECT_DOUBLE_EQ(g.quantile_table(0), normal_quantile(0.5 / (n + 1.0)));
    EXPECT_DOUBLE_EQ(g.quantile_table(3), normal_quantile(3.0 / (n + 1.0)));
    const Vector s = Vector::Constant(3, 0.1);
    Vector u(3);
    for (int j = 0; j < 3; ++j) u(j) = clamp_pseudo_obs(ecdf(g.marginals[j].sample(), 0.1), n);
    EXPECT_NEAR(g.copula_term(s), gaussian_copula_logdensity(u, g.copula), 1e-12);
}

TEST(Bayes, OneComponentCopulaEqualsBc) {
    const auto data = scenario("SSDN", 3);
    const auto bc = train(fixed(Method::BC, 1), data.train);
    const auto bcg = ModelPath(Method::BCG, RankMethod::KendallTau, data.train, 1).model(1);
    const Matrix a = log_posterior_ratios(bc, data.test.curves(), data.test.grid());
    const Matrix b = log_posterior_ratios(bcg, data.test.curves(), data.test.grid());
    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModelPath, TruncationsMatchDirectFits) {
    const auto data = scenario("RSDN", 4);
    for (Method m : kAllMethods) {
        const ModelPath path(m, RankMethod::KendallTau, data.train, 8);
        ASSERT_GE(path.max_feasible_J(), 5u) << method_label(m);
        const auto each = path.classify_each(data.test.curves(), {2, 5});
        for (std::size_t idx : {0u, 1u}) {
            const std::size_t J = idx == 0 ? 2 : 5;
            const auto direct = train(fixed(m, J), data.train);
            const auto via_path = path.model(J);
            const Matrix a = log_posterior_ratios(direct, data.test.curves(), data.test.grid());
            const Matrix b = log_posterior_ratios(via_path, data.test.curves(), data.test.grid());
            if (m == Method::BCt || m == Method::BCt_PLS) {
                EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6) << method_label(m) << " J=" << J;
            } else {
                EXPECT_EQ(a, b) << method_label(m) << " J=" << J;
            }
            EXPECT_EQ(each[idx], classify(via_path, data.test.curves(), data.test.grid())) << method_label(m);
        }
    }
}

TEST(ModelPath, CopulaFeasibilityCappedByGroupSize) {
    const auto data = scenario("RSDN", 5, 20);
    const ModelPath path(Method::BCG, RankMethod::KendallTau, data.train, 19);
    EXPECT_LE(path.max_feasible_J(), 9u);
    EXPECT_THROW((void)path.model(15), ParameterError);
}

TEST(ModelPath, Incompatibilities) {
    auto cfg = ScenarioConfig::from_label("MDSN");
    cfg.n_train = 60;
    cfg.n_test = 6;
    const auto data = generate(cfg);
    EXPECT_THROW(ModelPath(Method::CEN, RankMethod::KendallTau, data.train, 3), ParameterError);
    const auto binary = scenario("RSDN", 6);
    EXPECT_THROW(ModelPath(Method::BCt, RankMethod::SpearmanRho, binary.train, 3), ParameterError);
    EXPECT_NO_THROW(ModelPath(Method::BCG, RankMethod::SpearmanRho, binary.train, 3));
}

TEST(Classify, GridMismatchIsRejected) {
    const auto data = scenario("RSDN", 7);
    const auto model = train(fixed(Method::BC, 3), data.train);
    const Grid other = Grid::uniform(0.0, 1.0, 41);
    const Matrix zeros = Matrix::Zero(2, 41);
    EXPECT_THROW(classify(model, zeros, other), DimensionError);
}

TEST(Centroid, DecisionMatchesScoreSign) {
    const auto data = scenario("SDSN", 8);
    const auto model = train(fixed(Method::CEN, 5), data.train);
    const auto& cen = std::get<CentroidModel>(model.model);
    const auto pred = classify(model, data.test.curves(), data.test.grid());
    for (Eigen::Index i = 0; i < data.test.curves().rows(); ++i) {
        const double t = centroid_score(cen, data.test.curves().row(i).transpose(), data.test.grid());
        EXPECT_EQ(pred[i], t <= 0.0 ? 1 : 0);
    }
    EXPECT_LT(error_rate(pred, data.test.labels()), 0.45);
}

TEST(Lda, MatchesHandComputedRule) {
    Matrix s(6, 1);
    s << 0.0, 1.0, 2.0, 4.0, 5.0, 6.0;
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    const auto lda = lda_fit(s, y, 2);
    // Pooled variance (2 + 2) / (6 - 2) = 1, means 1 and 5, equal priors.
    EXPECT_NEAR(lda.pooled_inverse(0, 0), 1.0, 1e-14);
    Vector x(1);
    x << 2.9;
    const Vector d = lda.discriminants(x);
    EXPECT_NEAR(d(1) - d(0), 2.9 * 4.0 - 0.5 * (25.0 - 1.0), 1e-12);
    EXPECT_FALSE(lda.ridge_added);
}

TEST(Lda, SingularCovarianceGetsRidge) {
    Matrix s(4, 2);
    s << 0, 0, 1, 0, 3, 0, 4, 0;
    const auto lda = lda_fit(s, {0, 0, 1, 1}, 2);
    EXPECT_TRUE(lda.ridge_added);
    EXPECT_TRUE(lda.pooled_inverse.allFinite());
}

TEST(Logistic, ScoreEquationsVanishAtOptimum) {
    std::mt19937_64 gen(9);
    std::normal_distribution<double> z;
    Matrix x(200, 2);
    std::vector<int> y(200);
    for (int i = 0; i < 200; ++i) {
        x(i, 0) = z(gen);
        x(i, 1) = z(gen);
        const double p = 1.0 / (1.0 + std::exp(-(0.3 + 1.2 * x(i, 0) - 0.7 * x(i, 1))));
        y[i] = std::uniform_real_distribution<double>()(gen) < p ? 1 : 0;
    }
    const auto fit = logistic_fit(x, y, 2);
    EXPECT_TRUE(fit.converged);
    EXPECT_FALSE(fit.capped);
    Vector grad = Vector::Zero(3);
    for (int i = 0; i < 200; ++i) {
        const double eta = fit.linear_predictors(x.row(i).transpose())(1);
        const double r = y[i] - 1.0 / (1.0 + std::exp(-eta));
        grad(0) += r;
        grad(1) += r * x(i, 0);
        grad(2) += r * x(i, 1);
    }
    EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Logistic, SeparableDataIsCapped) {
    Matrix x(6, 1);
    x << -3, -2, -1, 1, 2, 3;
    const auto fit = logistic_fit(x, {0, 0, 0, 1, 1, 1}, 2);
    EXPECT_TRUE(fit.capped);
    EXPECT_LE(fit.coefficients.cwiseAbs().maxCoeff(), 30.0);
    Vector v(1);
    v << 0.5;
    EXPECT_GT(fit.linear_predictors(v)(1), 0.0);
}

TEST(Folds, StratifiedPartition) {
    std::vector<int> y;
    for (int i = 0; i < 23; ++i) y.push_back(i < 13 ? 0 : 1);
    const auto folds = stratified_folds(y, 5, CounterRng(3));
    ASSERT_EQ(folds.size(), 5u);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        int c0 = 0;
        for (auto i : f) {
            seen.insert(i);
            c0 += y[i] == 0;
        }
        EXPECT_GE(c0, 2);
        EXPECT_LE(c0, 3);
        EXPECT_GE(f.size(), 4u);
        EXPECT_LE(f.size(), 5u);
    }
    EXPECT_EQ(seen.size(), 23u);
    EXPECT_EQ(folds, stratified_folds(y, 5, CounterRng(3)));
    EXPECT_NE(folds, stratified_folds(y, 5, CounterRng(4)));
}

TEST(Cv, SelectsMinimumWithSmallerJOnTies) {
    const auto data = scenario("RSDN", 10);
    ClassifierSpec s;
    s.method = Method::BCG;
    s.J = JRange{1, 8};
    const auto cv = select_J_cv(s, data.train, CounterRng(1));
    ASSERT_EQ(cv.candidates.front(), 2u);
    double best = 2.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < cv.candidates.size(); ++i) {
        ASSERT_TRUE(cv.feasible[i]);
        EXPECT_GE(cv.errors[i], 0.0);
        EXPECT_LE(cv.errors[i], 1.0);
        if (cv.errors[i] < best) best = cv.errors[i], arg = cv.candidates[i];
    }
    EXPECT_EQ(cv.best_J, arg);
    EXPECT_EQ(cv.best_error, best);
}

TEST(Cv, TrainWithCvIsDeterministic) {
    const auto data = scenario("SDSN", 11);
    ClassifierSpec s;
    s.method = Method::CEN;
    s.J = JRange{1, 10};
    const auto a = train_with_cv(s, data.train, CounterRng(5));
    const auto b = train_with_cv(s, data.train, CounterRng(5));
    EXPECT_EQ(a.model.J, b.model.J);
    EXPECT_EQ(a.cv->errors, b.cv->errors);
    EXPECT_EQ(a.model.J, a.cv->best_J);
}

TEST(Cv, ClassifierSelectionPrefersLowestError) {
    const auto data = scenario("RSDN", 12);
    std::vector<ClassifierSpec> specs;
    for (Method m : {Method::BC, Method::BCG}) {
        ClassifierSpec s;
        s.method = m;
        s.J = JRange{1, 6};
        specs.push_back(s);
    }
    const auto sel = select_classifier_cv(data.train, specs, CounterRng(2));
    ASSERT_EQ(sel.results.size(), 2u);
    const std::size_t other = 1 - sel.best;
    EXPECT_LE(sel.results[sel.best].best_error, sel.results[other].best_error);
}

TEST(ErrorRate, Fraction) {
    EXPECT_DOUBLE_EQ(error_rate({0, 1, 1, 0}, {0, 1, 0, 1}), 0.5);
    EXPECT_THROW(error_rate({0}, {0, 1}), DimensionError);
}
