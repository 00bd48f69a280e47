#include "fbc/classifiers.hpp"

#include "fbc/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace fbc {

std::string_view method_key(Method m) {
    switch (m) {
        case Method::BC: return "bc";
        case Method::BCG: return "bcg";
        case Method::BCG_PLS: return "bcg-pls";
        case Method::BCt: return "bct";
        case Method::BCt_PLS: return "bct-pls";
        case Method::CEN: return "cen";
        case Method::PLSDA: return "plsda";
        case Method::Logistic: return "logistic";
    }
    return "?";
}

std::string_view method_label(Method m) {
    switch (m) {
        case Method::BC: return "BC";
        case Method::BCG: return "BCG";
        case Method::BCG_PLS: return "BCGPLS";
        case Method::BCt: return "BCt";
        case Method::BCt_PLS: return "BCtPLS";
        case Method::CEN: return "CEN";
        case Method::PLSDA: return "PLSDA";
        case Method::Logistic: return "logistic";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    std::string key;
    for (char c : text) {
        if (c == '_' || c == '-') continue;
        key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (Method m : kAllMethods) {
        std::string canon;
        for (char c : method_key(m)) {
            if (c != '-') canon.push_back(c);
        }
        if (key == canon) return m;
    }
    throw ParameterError("unknown method '" + std::string(text) +
                         "'; expected one of bc, bcg, bcg-pls, bct, bct-pls, cen, plsda, logistic");
}

bool is_bayes(Method m) {
    return m == Method::BC || m == Method::BCG || m == Method::BCG_PLS || m == Method::BCt || m == Method::BCt_PLS;
}

bool uses_copula(Method m) { return is_bayes(m) && m != Method::BC; }

BasisKind basis_kind(Method m) {
    return (m == Method::BCG_PLS || m == Method::BCt_PLS || m == Method::PLSDA) ? BasisKind::PLS : BasisKind::PC;
}

CopulaFamily copula_family(Method m) {
    switch (m) {
        case Method::BCG:
        case Method::BCG_PLS: return CopulaFamily::Gaussian;
        case Method::BCt:
        case Method::BCt_PLS: return CopulaFamily::StudentT;
        default: return CopulaFamily::Independence;
    }
}

ClassifierSpec ClassifierSpec::with_default_range(Method m, std::size_t j_max) {
    ClassifierSpec spec;
    spec.method = m;
    spec.J = JRange{uses_copula(m) ? std::size_t{2} : std::size_t{1}, j_max};
    return spec;
}

ClassifierSpec ClassifierSpec::normalized() const {
    ClassifierSpec out = *this;
    if (auto* range = std::get_if<JRange>(&out.J)) {
        if (uses_copula(method)) range->min = std::max<std::size_t>(range->min, 2);
        range->min = std::max<std::size_t>(range->min, 1);
        if (range->min > range->max) {
            throw ParameterError("J range " + std::to_string(range->min) + ":" + std::to_string(range->max) + " is empty");
        }
    } else if (std::get<std::size_t>(out.J) == 0) {
        throw ParameterError("J must be positive");
    }
    if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
    return out;
}

// ---------------------------------------------------------------------------

Vector copula_quantile_table(const CopulaModel& copula, std::size_t n) {
    if (copula.family() == CopulaFamily::Independence) return {};
    Vector table(static_cast<Eigen::Index>(n + 1));
    for (std::size_t c = 0; c <= n; ++c) {
        const double u = clamp_pseudo_obs(static_cast<double>(c) / static_cast<double>(n + 1), n);
        table(static_cast<Eigen::Index>(c)) = copula.family() == CopulaFamily::Gaussian
                                                  ? normal_quantile(u)
                                                  : student_t_quantile(u, *copula.tail_index());
    }
    return table;
}

double GroupModel::copula_term(const Eigen::Ref<const Vector>& scores) const {
    if (copula.family() == CopulaFamily::Independence) return 0.0;
    const auto J = static_cast<Eigen::Index>(marginals.size());
    Vector q(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        q(j) = quantile_table(static_cast<Eigen::Index>(marginals[static_cast<std::size_t>(j)].count_le(scores(j))));
    }
    return copula.family() == CopulaFamily::Gaussian ? copula.gaussian_log_density_from_normal_scores(q)
                                                     : copula.t_log_density_from_t_scores(q);
}

double GroupModel::log_joint(const Eigen::Ref<const Vector>& scores) const {
    if (scores.size() != static_cast<Eigen::Index>(marginals.size())) throw DimensionError("group model: score dimension mismatch");
    double marg = 0.0;
    for (std::size_t j = 0; j < marginals.size(); ++j) marg += marginals[j].log_density(scores(static_cast<Eigen::Index>(j)));
    return std::log(prior) + marg + copula_term(scores);
}

Vector LdaModel::discriminants(const Eigen::Ref<const Vector>& scores) const {
    const Vector projected = pooled_inverse * scores;
    Vector out(means.rows());
    for (Eigen::Index k = 0; k < means.rows(); ++k) {
        const Vector mk = means.row(k).transpose();
        out(k) = projected.dot(mk) - 0.5 * mk.dot(pooled_inverse * mk) + std::log(priors[static_cast<std::size_t>(k)]);
    }
    return out;
}

Vector LogisticModel::linear_predictors(const Eigen::Ref<const Vector>& scores) const {
    const Vector z = (scores - score_mean).cwiseQuotient(score_scale);
    Vector out = Vector::Zero(coefficients.rows() + 1);
    for (Eigen::Index c = 0; c < coefficients.rows(); ++c) {
        out(c + 1) = coefficients(c, 0) + coefficients.row(c).tail(z.size()).dot(z);
    }
    return out;
}

const BasisSystem& TrainedModel::basis() const {
    return std::visit([](const auto& m) -> const BasisSystem& { return m.basis; }, model);
}

int decide(Method method, const Eigen::Ref<const Vector>& group_scores) {
    if (method == Method::CEN) return group_scores(1) >= group_scores(0) ? 1 : 0;
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < group_scores.size(); ++k) {
        if (group_scores(k) > group_scores(best)) best = k;
    }
    return static_cast<int>(best);
}

double centroid_score(const CentroidModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid) {
    const double proj = inner_product(curve, model.direction, grid);
    const double d1 = proj - model.projected_means(1);
    const double d0 = proj - model.projected_means(0);
    return d1 * d1 - d0 * d0;
}

// ---------------------------------------------------------------------------

LdaModel lda_fit(const Matrix& scores, const std::vector<int>& labels, std::size_t num_groups) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index J = scores.cols();
    const auto K = static_cast<Eigen::Index>(num_groups);
    if (static_cast<std::size_t>(n) != labels.size()) throw DimensionError("lda_fit: labels do not match scores");
    if (n <= K) throw ParameterError("lda_fit: need more observations than groups");
    LdaModel model;
    model.means = Matrix::Zero(K, J);
    model.priors.assign(num_groups, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
        model.means.row(k) += scores.row(i);
        model.priors[static_cast<std::size_t>(k)] += 1.0;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
        if (model.priors[static_cast<std::size_t>(k)] == 0.0) throw DataError("lda_fit: empty group");
        model.means.row(k) /= model.priors[static_cast<std::size_t>(k)];
    }
    Matrix pooled = Matrix::Zero(J, J);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vector d = (scores.row(i) - model.means.row(labels[static_cast<std::size_t>(i)])).transpose();
        pooled.noalias() += d * d.transpose();
    }
    pooled /= static_cast<double>(n - K);
    for (double& p : model.priors) p /= static_cast<double>(n);

    const double trace = pooled.trace();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(pooled, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 1e-12 * std::max(trace, 1e-300))) {
        pooled.diagonal().array() += 1e-8 * std::max(trace, 1e-300) / static_cast<double>(J);
        model.ridge_added = true;
    }
    Eigen::LDLT<Matrix> ldlt(pooled);
    model.pooled_inverse = ldlt.solve(Matrix::Identity(J, J));
    if (!model.pooled_inverse.allFinite()) throw NumericalError("lda_fit: pooled covariance could not be inverted");
    return model;
}

LogisticModel logistic_fit(const Matrix& scores, const std::vector<int>& labels, std::size_t num_groups,
                           const LogisticOptions& options) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index J = scores.cols();
    const auto C = static_cast<Eigen::Index>(num_groups) - 1;  // non-baseline classes
    if (C < 1) throw ParameterError("logistic_fit: need at least two groups");
    if (static_cast<std::size_t>(n) != labels.size()) throw DimensionError("logistic_fit: labels do not match scores");
    const Eigen::Index P = J + 1;
    Matrix design(n, P);
    design.col(0).setOnes();
    design.rightCols(J) = scores;

    LogisticModel model;
    model.score_mean = Vector::Zero(J);
    model.score_scale = Vector::Ones(J);
    Vector beta = Vector::Zero(C * P);
    model.converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        model.iterations = it;
        Vector grad = Vector::Zero(C * P);
        Matrix hess = Matrix::Zero(C * P, C * P);
        Vector prob(C);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector x = design.row(i).transpose();
            double max_eta = 0.0;
            for (Eigen::Index c = 0; c < C; ++c) {
                prob(c) = beta.segment(c * P, P).dot(x);
                max_eta = std::max(max_eta, prob(c));
            }
            double denom = std::exp(-max_eta);
            for (Eigen::Index c = 0; c < C; ++c) {
                prob(c) = std::exp(prob(c) - max_eta);
                denom += prob(c);
            }
            prob /= denom;
            const int y = labels[static_cast<std::size_t>(i)];
            const Matrix xx = x * x.transpose();
            for (Eigen::Index c = 0; c < C; ++c) {
                const double target = (y == c + 1) ? 1.0 : 0.0;
                grad.segment(c * P, P) += (target - prob(c)) * x;
                for (Eigen::Index d = 0; d < C; ++d) {
                    const double w = (c == d ? prob(c) : 0.0) - prob(c) * prob(d);
                    hess.block(c * P, d * P, P, P) += w * xx;
                }
            }
        }
        Eigen::LDLT<Matrix> ldlt(hess);
        Vector step = ldlt.solve(grad);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            hess.diagonal().array() += 1e-10 * std::max(hess.trace(), 1e-300);
            step = Eigen::LDLT<Matrix>(hess).solve(grad);
        }
        if (!step.allFinite()) break;  // divergence: keep the last finite iterate
        beta += step;
        if (beta.cwiseAbs().maxCoeff() > options.coefficient_cap) {
            beta = beta.cwiseMax(-options.coefficient_cap).cwiseMin(options.coefficient_cap);
            model.capped = true;
            break;
        }
        if (step.cwiseAbs().maxCoeff() < options.tolerance) {
            model.converged = true;
            break;
        }
    }
    model.coefficients.resize(C, P);
    for (Eigen::Index c = 0; c < C; ++c) model.coefficients.row(c) = beta.segment(c * P, P).transpose();
    return model;
}

// ---------------------------------------------------------------------------

namespace {

Matrix rows_of(const Matrix& m, const std::vector<std::size_t>& rows, Eigen::Index cols) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(rows[r])).head(cols);
    return out;
}

Vector group_scores_for(const TrainedModel& model, const Eigen::Ref<const Vector>& scores,
                        const Eigen::Ref<const Vector>& curve, const Grid& grid) {
    return std::visit(
        [&](const auto& m) -> Vector {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TrainedBayesModel>) {
                Vector out(static_cast<Eigen::Index>(m.groups.size()));
                for (std::size_t k = 0; k < m.groups.size(); ++k) out(static_cast<Eigen::Index>(k)) = m.groups[k].log_joint(scores);
                return out;
            } else if constexpr (std::is_same_v<T, CentroidModel>) {
                const double proj = inner_product(curve, m.direction, grid);
                Vector out(2);
                for (Eigen::Index k = 0; k < 2; ++k) {
                    const double d = proj - m.projected_means(k);
                    out(k) = -d * d;
                }
                return out;
            } else if constexpr (std::is_same_v<T, LdaModel>) {
                return m.discriminants(scores);
            } else {
                return m.linear_predictors(scores);
            }
        },
        model.model);
}

}  // namespace

ModelPath::ModelPath(Method method, RankMethod rank_method, const FunctionalDataset& train, std::size_t j_max)
    : method_(method), rank_method_(rank_method), num_groups_(train.num_groups()), priors_(train.priors()),
      labels_(train.labels()), basis_(BasisSystem{.grid = train.grid()}) {
    if (j_max == 0) throw ParameterError("J must be positive");
    if (method == Method::CEN && num_groups_ != 2) {
        throw ParameterError("the functional centroid classifier (cen) is binary only; data has " +
                             std::to_string(num_groups_) + " groups");
    }
    if (rank_method == RankMethod::SpearmanRho && copula_family(method) == CopulaFamily::StudentT) {
        throw ParameterError("t-copula methods require Kendall's tau (Spearman's rho does not determine the t correlation)");
    }
    const std::size_t n = train.size();
    if (basis_kind(method) == BasisKind::PC) {
        basis_ = fpca(train, std::min({j_max, n - 1, train.grid_size()}));
    } else {
        basis_ = fpls(train, std::min(j_max, n - 1));
    }
    scores_ = project(train, basis_);
    max_feasible_ = basis_.size();
    if (basis_.kind == BasisKind::PC && basis_.size() > 0) {
        // Components with vanishing variance carry no usable direction.
        const double top = basis_.eigenvalues(0);
        std::size_t usable = 0;
        while (usable < basis_.size() && basis_.eigenvalues(static_cast<Eigen::Index>(usable)) > 1e-12 * top) ++usable;
        max_feasible_ = std::min(max_feasible_, usable);
    }

    if (!is_bayes(method)) return;
    const CopulaFamily family = copula_family(method);
    marginals_.resize(num_groups_);
    for (std::size_t k = 0; k < num_groups_; ++k) {
        const auto rows = train.group_indices(static_cast<int>(k));
        if (family != CopulaFamily::Independence) max_feasible_ = std::min(max_feasible_, rows.size() - 1);
        for (std::size_t j = 0; j < max_feasible_; ++j) {
            std::vector<double> sample(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) sample[r] = scores_(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(j));
            try {
                marginals_[k].emplace_back(std::move(sample));
            } catch (const NumericalError&) {
                max_feasible_ = j;
                break;
            }
        }
    }
    for (auto& m : marginals_) {
        if (m.size() > max_feasible_) m.erase(m.begin() + static_cast<std::ptrdiff_t>(max_feasible_), m.end());
    }
    if (family == CopulaFamily::Independence || max_feasible_ == 0) return;
    const auto jf = static_cast<Eigen::Index>(max_feasible_);
    for (std::size_t k = 0; k < num_groups_; ++k) {
        const Matrix group = rows_of(scores_, train.group_indices(static_cast<int>(k)), jf);
        rank_corr_.push_back(rank_method == RankMethod::KendallTau ? kendall_tau_matrix(group) : spearman_rho_matrix(group));
        if (family == CopulaFamily::StudentT) {
            tail_.emplace_back(std::in_place, pseudo_observations(group));
        } else {
            tail_.emplace_back(std::nullopt);
        }
    }
}

TrainedBayesModel ModelPath::bayes_model(std::size_t J) const {
    TrainedBayesModel out{.method = method_, .basis = basis_.truncate(J)};
    const CopulaFamily family = copula_family(method_);
    const auto jj = static_cast<Eigen::Index>(J);
    for (std::size_t k = 0; k < num_groups_; ++k) {
        GroupModel g;
        g.prior = priors_[k];
        g.marginals.assign(marginals_[k].begin(), marginals_[k].begin() + static_cast<std::ptrdiff_t>(J));
        if (family == CopulaFamily::Independence) {
            g.copula = CopulaModel::independence(J);
        } else {
            const Matrix block = rank_corr_[k].topLeftCorner(jj, jj);
            g.copula = copula_from_rank_correlation(block, family, rank_method_, tail_[k] ? &*tail_[k] : nullptr);
        }
        g.quantile_table = copula_quantile_table(g.copula, g.sample_size());
        out.groups.push_back(std::move(g));
    }
    return out;
}

TrainedModel ModelPath::model(std::size_t J) const {
    if (!feasible(J)) {
        std::string why = "J=" + std::to_string(J) + " is not feasible for " + std::string(method_key(method_)) +
                          " on this data (largest feasible J is " + std::to_string(max_feasible_) + ")";
        if (uses_copula(method_)) why += "; copula fits need every group to have at least J+1 curves, choose a smaller J";
        throw ParameterError(why);
    }
    TrainedModel out{.method = method_, .rank_method = rank_method_, .J = J, .num_groups = num_groups_};
    const auto jj = static_cast<Eigen::Index>(J);
    switch (method_) {
        case Method::BC:
        case Method::BCG:
        case Method::BCG_PLS:
        case Method::BCt:
        case Method::BCt_PLS:
            out.model = bayes_model(J);
            break;
        case Method::CEN: {
            CentroidModel cen{.basis = basis_.truncate(J)};
            Vector mean0 = Vector::Zero(jj), mean1 = Vector::Zero(jj);
            double n0 = 0.0, n1 = 0.0;
            for (std::size_t i = 0; i < labels_.size(); ++i) {
                if (labels_[i] == 0) {
                    mean0 += scores_.row(static_cast<Eigen::Index>(i)).head(jj).transpose();
                    n0 += 1.0;
                } else {
                    mean1 += scores_.row(static_cast<Eigen::Index>(i)).head(jj).transpose();
                    n1 += 1.0;
                }
            }
            mean0 /= n0;
            mean1 /= n1;
            const Vector coef = (mean1 - mean0).cwiseQuotient(cen.basis.eigenvalues);
            cen.direction = cen.basis.functions.transpose() * coef;
            // <mu_k, psi> with mu_k = pooled mean + sum_j (group score mean)_j phi_j.
            const double base = inner_product(basis_.mean, cen.direction, basis_.grid);
            cen.projected_means.resize(2);
            cen.projected_means(0) = base + coef.dot(mean0);
            cen.projected_means(1) = base + coef.dot(mean1);
            out.model = std::move(cen);
            break;
        }
        case Method::PLSDA: {
            LdaModel lda = lda_fit(scores_.leftCols(jj), labels_, num_groups_);
            lda.basis = basis_.truncate(J);
            out.model = std::move(lda);
            break;
        }
        case Method::Logistic: {
            const Matrix s = scores_.leftCols(jj);
            const Vector mean = s.colwise().mean().transpose();
            Vector scale = ((s.rowwise() - mean.transpose()).colwise().squaredNorm() / static_cast<double>(s.rows() - 1))
                               .cwiseSqrt()
                               .transpose();
            for (Eigen::Index j = 0; j < scale.size(); ++j) {
                if (!(scale(j) > 0.0)) scale(j) = 1.0;
            }
            const Matrix z = (s.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
            LogisticModel logit = logistic_fit(z, labels_, num_groups_);
            logit.basis = basis_.truncate(J);
            logit.score_mean = mean;
            logit.score_scale = scale;
            out.model = std::move(logit);
            break;
        }
    }
    return out;
}

std::vector<std::vector<int>> ModelPath::classify_each(const Matrix& curves, const std::vector<std::size_t>& Js) const {
    const Matrix scores = project(curves, basis_.grid, basis_);
    const Eigen::Index n = curves.rows();
    std::vector<std::vector<int>> out;
    out.reserve(Js.size());
    if (!is_bayes(method_)) {
        for (std::size_t J : Js) {
            const TrainedModel m = model(J);
            std::vector<int> pred(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const Vector s = scores.row(i).head(static_cast<Eigen::Index>(J)).transpose();
                pred[static_cast<std::size_t>(i)] = decide(method_, group_scores_for(m, s, curves.row(i).transpose(), basis_.grid));
            }
            out.push_back(std::move(pred));
        }
        return out;
    }
    // Marginal log-densities do not depend on J: evaluate once, accumulate prefixes.
    std::size_t j_top = 0;
    for (std::size_t J : Js) j_top = std::max(j_top, J);
    std::vector<Matrix> log_f(num_groups_);
    for (std::size_t k = 0; k < num_groups_; ++k) {
        log_f[k].resize(n, static_cast<Eigen::Index>(j_top));
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < j_top; ++j) {
                log_f[k](i, static_cast<Eigen::Index>(j)) = marginals_[k][j].log_density(scores(i, static_cast<Eigen::Index>(j)));
            }
        }
    }
    for (std::size_t J : Js) {
        if (!feasible(J)) throw ParameterError("classify_each: infeasible J");
        const TrainedBayesModel m = bayes_model(J);
        std::vector<int> pred(static_cast<std::size_t>(n));
        Vector group_scores(static_cast<Eigen::Index>(num_groups_));
        for (Eigen::Index i = 0; i < n; ++i) {
            const Vector s = scores.row(i).head(static_cast<Eigen::Index>(J)).transpose();
            for (std::size_t k = 0; k < num_groups_; ++k) {
                double marg = 0.0;
                for (std::size_t j = 0; j < J; ++j) marg += log_f[k](i, static_cast<Eigen::Index>(j));
                group_scores(static_cast<Eigen::Index>(k)) = std::log(m.groups[k].prior) + marg + m.groups[k].copula_term(s);
            }
            pred[static_cast<std::size_t>(i)] = decide(method_, group_scores);
        }
        out.push_back(std::move(pred));
    }
    return out;
}

TrainedModel train(const ClassifierSpec& spec, const FunctionalDataset& data) {
    const ClassifierSpec s = spec.normalized();
    if (s.has_range()) throw ParameterError("train: spec carries a J range; use train_with_cv");
    const std::size_t J = std::get<std::size_t>(s.J);
    return ModelPath(s.method, s.rank_method, data, J).model(J);
}

Matrix log_posterior_ratios(const TrainedModel& model, const Matrix& curves, const Grid& grid) {
    const BasisSystem& basis = model.basis();
    if (!grid.matches(basis.grid)) {
        throw DimensionError("data grid (" + std::to_string(grid.size()) + " points) does not match the model grid (" +
                             std::to_string(basis.grid.size()) + " points)");
    }
    Matrix x = curves;
    if (model.presmooth_bandwidth) x = LocalLinearSmoother(grid, *model.presmooth_bandwidth).apply_rows(curves);
    const Matrix scores = project(x, grid, basis);
    Matrix out(curves.rows(), static_cast<Eigen::Index>(model.num_groups));
    for (Eigen::Index i = 0; i < curves.rows(); ++i) {
        out.row(i) = group_scores_for(model, scores.row(i).transpose(), x.row(i).transpose(), grid).transpose();
    }
    return out;
}

Vector log_posterior_ratios(const TrainedModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid) {
    const Matrix one = curve.transpose();
    return log_posterior_ratios(model, one, grid).row(0).transpose();
}

std::vector<int> classify(const TrainedModel& model, const Matrix& curves, const Grid& grid) {
    const Matrix scores = log_posterior_ratios(model, curves, grid);
    std::vector<int> out(static_cast<std::size_t>(curves.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) out[static_cast<std::size_t>(i)] = decide(model.method, scores.row(i).transpose());
    return out;
}

int classify(const TrainedModel& model, const Eigen::Ref<const Vector>& curve, const Grid& grid) {
    return decide(model.method, log_posterior_ratios(model, curve, grid));
}

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw DimensionError("error_rate: size mismatch");
    if (truth.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i] ? 1 : 0;
    return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace fbc
