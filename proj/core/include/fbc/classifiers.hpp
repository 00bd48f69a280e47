#pragma once

#include "fbc/basis.hpp"
#include "fbc/copula.hpp"
#include "fbc/density.hpp"
#include "fbc/fd.hpp"
#include "fbc/rng.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fbc {

/// Enumeration order doubles as the tie-break order when selecting a classifier.
enum class Method { BC, BCG, BCG_PLS, BCt, BCt_PLS, CEN, PLSDA, Logistic };

inline constexpr Method kAllMethods[] = {Method::BC,      Method::BCG, Method::BCG_PLS, Method::BCt,
                                         Method::BCt_PLS, Method::CEN, Method::PLSDA,   Method::Logistic};

/// CLI spelling: bc, bcg, bcg-pls, bct, bct-pls, cen, plsda, logistic.
std::string_view method_key(Method m);
/// Table spelling: BC, BCG, BCGPLS, BCt, BCtPLS, CEN, PLSDA, logistic.
std::string_view method_label(Method m);
/// Accepts either spelling, case-insensitively. Throws ParameterError.
Method parse_method(std::string_view text);

bool is_bayes(Method m);
bool uses_copula(Method m);
BasisKind basis_kind(Method m);
CopulaFamily copula_family(Method m);

struct JRange {
    std::size_t min = 1;
    std::size_t max = 30;
};

struct ClassifierSpec {
    Method method = Method::BCG;
    std::variant<std::size_t, JRange> J = JRange{};
    RankMethod rank_method = RankMethod::KendallTau;
    std::size_t folds = 10;

    /// Default candidate range: 1..30, or 2..30 for copula methods.
    static ClassifierSpec with_default_range(Method m, std::size_t j_max = 30);
    /// Raises the lower end of a range to 2 for copula methods and checks min <= max.
    [[nodiscard]] ClassifierSpec normalized() const;
    [[nodiscard]] bool has_range() const noexcept { return std::holds_alternative<JRange>(J); }
};

/// Per-group pieces of a trained Bayes classifier.
struct GroupModel {
    double prior = 0.0;
    std::vector<MarginalEstimate> marginals;  ///< one per score dimension
    CopulaModel copula = CopulaModel::independence(0);
    /// Copula-scale quantile of the clamped pseudo-observation c/(n_k+1), indexed by count c = 0..n_k.
    Vector quantile_table;

    [[nodiscard]] std::size_t sample_size() const noexcept {
        return marginals.empty() ? 0 : marginals.front().sample().size();
    }
    /// log pi_k + sum_j log f_jk(x_j) + log c_k(F_1k(x_1), ..., F_Jk(x_J)).
    [[nodiscard]] double log_joint(const Eigen::Ref<const Vector>& scores) const;
    /// Copula term alone.
    [[nodiscard]] double copula_term(const Eigen::Ref<const Vector>& scores) const;
};

/// Builds the quantile table for a group of size n under a fitted copula.
Vector copula_quantile_table(const CopulaModel& copula, std::size_t n);

struct TrainedBayesModel {
    Method method = Method::BCG;
    BasisSystem basis;
    std::vector<GroupModel> groups;
};

struct CentroidModel {
    BasisSystem basis;
    Vector direction;        ///< psi on the grid
    Vector projected_means;  ///< <mu_k, psi> for k = 0, 1
};

/// Fisher/Gaussian linear discriminant on PLS scores.
struct LdaModel {
    BasisSystem basis;
    Matrix means;             ///< K x J
    Matrix pooled_inverse;    ///< inverse pooled within-class covariance
    std::vector<double> priors;
    bool ridge_added = false;

    /// Linear discriminant delta_k(s) for each group.
    [[nodiscard]] Vector discriminants(const Eigen::Ref<const Vector>& scores) const;
};

/// Logistic (binomial or multinomial) regression on standardised PC scores.
struct LogisticModel {
    BasisSystem basis;
    Vector score_mean;   ///< standardisation applied before the linear predictor
    Vector score_scale;
    Matrix coefficients; ///< (K-1) x (J+1), column 0 is the intercept; class 0 is the baseline
    bool capped = false;
    bool converged = true;
    int iterations = 0;

    [[nodiscard]] Vector linear_predictors(const Eigen::Ref<const Vector>& scores) const;
};

using ModelVariant = std::variant<TrainedBayesModel, CentroidModel, LdaModel, LogisticModel>;

struct TrainedModel {
    Method method = Method::BCG;
    RankMethod rank_method = RankMethod::KendallTau;
    std::size_t J = 0;
    std::size_t num_groups = 2;
    /// Applied to incoming curves before projection when set.
    std::optional<double> presmooth_bandwidth;
    ModelVariant model;

    [[nodiscard]] const BasisSystem& basis() const;
};

/// Fits `spec` with a fixed J. Throws ParameterError if the spec carries a range.
TrainedModel train(const ClassifierSpec& spec, const FunctionalDataset& data);

/// n x K per-group scores. For Bayes methods these are log(pi_k f_k) up to a shared
/// constant; other methods report their own discriminant scale.
Matrix log_posterior_ratios(const TrainedModel& model, const Matrix& curves, const Grid& grid);
Vector log_posterior_ratios(const TrainedModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid);

std::vector<int> classify(const TrainedModel& model, const Matrix& curves, const Grid& grid);
int classify(const TrainedModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid);

/// Decision from per-group scores: argmax with ties to the lower group, except
/// CEN where a tie goes to group 1.
int decide(Method method, const Eigen::Ref<const Vector>& group_scores);

/// T(x) = (<x,psi> - <mu_1,psi>)^2 - (<x,psi> - <mu_0,psi>)^2; group 1 iff T <= 0.
double centroid_score(const CentroidModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid);

/// Linear discriminant fit on a score matrix. Adds a 1e-8 * trace / J ridge when the
/// pooled covariance is singular.
LdaModel lda_fit(const Matrix& scores, const std::vector<int>& labels, std::size_t num_groups);

struct LogisticOptions {
    int max_iterations = 100;
    double tolerance = 1e-8;
    double coefficient_cap = 30.0;
};

/// IRLS fit; `scores` are used as given (the functional wrapper standardises first).
/// Returned coefficients are on the scale of `scores`.
LogisticModel logistic_fit(const Matrix& scores, const std::vector<int>& labels, std::size_t num_groups,
                           const LogisticOptions& options = {});

/// A method fitted once at the largest J; models for every smaller J are
/// truncations (nested bases, shared marginals and rank correlations).
class ModelPath {
public:
    ModelPath(Method method, RankMethod rank_method, const FunctionalDataset& train, std::size_t j_max);

    [[nodiscard]] Method method() const noexcept { return method_; }
    /// Largest J for which a model can be built.
    [[nodiscard]] std::size_t max_feasible_J() const noexcept { return max_feasible_; }
    [[nodiscard]] bool feasible(std::size_t J) const noexcept { return J >= 1 && J <= max_feasible_; }

    [[nodiscard]] TrainedModel model(std::size_t J) const;

    /// Predicted labels of `curves` for each J in `Js` (all must be feasible).
    [[nodiscard]] std::vector<std::vector<int>> classify_each(const Matrix& curves, const std::vector<std::size_t>& Js) const;

private:
    [[nodiscard]] TrainedBayesModel bayes_model(std::size_t J) const;

    Method method_;
    RankMethod rank_method_;
    std::size_t num_groups_;
    std::vector<double> priors_;
    std::vector<int> labels_;
    BasisSystem basis_;
    Matrix scores_;  ///< training scores, n x Jmax
    std::size_t max_feasible_ = 0;
    // Bayes methods
    std::vector<std::vector<MarginalEstimate>> marginals_;  ///< [group][j]
    std::vector<Matrix> rank_corr_;                         ///< per group, Jmax x Jmax
    std::vector<std::optional<TailLikelihood>> tail_;       ///< per group, t copula only
};

// ---------------------------------------------------------------------------
// Cross-validation

/// Test-index sets of a stratified k-fold split: each group's members are
/// shuffled and dealt round-robin across folds.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& labels, std::size_t folds, CounterRng rng);

struct CvResult {
    std::vector<std::size_t> candidates;
    std::vector<double> errors;  ///< NaN where infeasible
    std::vector<bool> feasible;
    std::size_t best_J = 0;
    double best_error = 1.0;
};

/// Stratified k-fold CV error for each candidate J; the basis and all marginal
/// and copula estimates are refit inside every fold. J with any infeasible fold
/// is excluded; ties go to the smaller J.
CvResult select_J_cv(const ClassifierSpec& spec, const FunctionalDataset& data,
                     const std::vector<std::vector<std::size_t>>& folds);
CvResult select_J_cv(const ClassifierSpec& spec, const FunctionalDataset& data, CounterRng rng);

struct ClassifierSelection {
    std::size_t best = 0;  ///< index into the spec list
    std::vector<CvResult> results;
};

/// Runs select_J_cv for each spec on one shared fold split and picks the
/// lowest CV error; ties go to the earlier Method.
ClassifierSelection select_classifier_cv(const FunctionalDataset& data, const std::vector<ClassifierSpec>& specs,
                                         const std::vector<std::vector<std::size_t>>& folds);
ClassifierSelection select_classifier_cv(const FunctionalDataset& data, const std::vector<ClassifierSpec>& specs,
                                         CounterRng rng);

/// CV-selects J (when the spec has a range) and trains on all of `data`.
struct CvTrained {
    TrainedModel model;
    std::optional<CvResult> cv;
};
CvTrained train_with_cv(const ClassifierSpec& spec, const FunctionalDataset& data, CounterRng rng);

/// Fraction of mismatches.
double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace fbc
