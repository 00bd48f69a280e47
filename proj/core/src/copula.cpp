#include "fbc/copula.hpp"

#include "fbc/density.hpp"
#include "fbc/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace fbc {

namespace {

void require_open_unit(const Eigen::Ref<const Vector>& u) {
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (!(u(j) > 0.0 && u(j) < 1.0)) {
            throw DomainError("copula argument u[" + std::to_string(j) + "] = " + std::to_string(u(j)) +
                              " is not strictly inside (0, 1)");
        }
    }
}

double log_t_normalizer(double nu, double dim) {
    return std::lgamma(0.5 * (nu + dim)) - std::lgamma(0.5 * nu) - 0.5 * dim * std::log(nu * std::numbers::pi);
}

}  // namespace

CopulaModel::CopulaModel(CopulaFamily family, Matrix corr, std::optional<double> tail_index, bool boundary)
    : family_(family), corr_(std::move(corr)), tail_index_(tail_index), tail_at_boundary_(boundary) {
    const auto J = corr_.rows();
    if (corr_.cols() != J) throw DimensionError("copula correlation matrix must be square");
    if (!corr_.allFinite()) throw NumericalError("copula correlation matrix has non-finite entries");
    for (Eigen::Index a = 0; a < J; ++a) {
        if (std::abs(corr_(a, a) - 1.0) > 1e-10) throw NumericalError("copula correlation matrix needs a unit diagonal");
        for (Eigen::Index b = 0; b < a; ++b) {
            if (std::abs(corr_(a, b) - corr_(b, a)) > 1e-10) throw NumericalError("copula correlation matrix must be symmetric");
        }
    }
    if (family_ == CopulaFamily::StudentT) {
        if (!tail_index_ || !(*tail_index_ > 0.0)) throw ParameterError("t copula needs a positive tail index");
    }
    Eigen::LLT<Matrix> llt(corr_);
    if (llt.info() != Eigen::Success) throw NumericalError("copula correlation matrix is not positive definite");
    corr_inverse_ = llt.solve(Matrix::Identity(J, J));
    corr_inverse_ = 0.5 * (corr_inverse_ + corr_inverse_.transpose()).eval();
    const Matrix L = llt.matrixL();
    log_det_ = 2.0 * L.diagonal().array().log().sum();
    if (J > 0 && ((corr_inverse_ * corr_) - Matrix::Identity(J, J)).cwiseAbs().maxCoeff() > 1e-8) {
        throw NumericalError("copula correlation matrix is too ill-conditioned to invert accurately");
    }
    precision_minus_identity_ = corr_inverse_ - Matrix::Identity(J, J);
}

CopulaModel CopulaModel::independence(std::size_t dim) {
    const auto J = static_cast<Eigen::Index>(dim);
    return CopulaModel(CopulaFamily::Independence, Matrix::Identity(J, J), std::nullopt, false);
}

CopulaModel CopulaModel::gaussian(Matrix corr) {
    return CopulaModel(CopulaFamily::Gaussian, std::move(corr), std::nullopt, false);
}

CopulaModel CopulaModel::student_t(Matrix corr, double tail_index, bool tail_at_boundary) {
    return CopulaModel(CopulaFamily::StudentT, std::move(corr), tail_index, tail_at_boundary);
}

double CopulaModel::gaussian_log_density_from_normal_scores(const Eigen::Ref<const Vector>& z) const {
    if (z.size() != corr_.rows()) throw DimensionError("copula: argument dimension does not match the model");
    return -0.5 * log_det_ - 0.5 * z.dot(precision_minus_identity_ * z);
}

double CopulaModel::t_log_density_from_t_scores(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != corr_.rows()) throw DimensionError("copula: argument dimension does not match the model");
    const double nu = *tail_index_;
    const auto dim = static_cast<double>(x.size());
    const double q = x.dot(corr_inverse_ * x);
    double joint = log_t_normalizer(nu, dim) - 0.5 * log_det_ - 0.5 * (nu + dim) * std::log1p(q / nu);
    double marginals = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) marginals += student_t_log_density(x(j), nu);
    return joint - marginals;
}

double normal_quantile(double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("normal_quantile: argument must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

double student_t_quantile(double u, double nu) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("student_t_quantile: argument must lie in (0, 1)");
    return boost::math::quantile(boost::math::students_t_distribution<double>(nu), u);
}

double student_t_log_density(double x, double nu) {
    return log_t_normalizer(nu, 1.0) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double gaussian_copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model) {
    if (model.family() != CopulaFamily::Gaussian) throw ParameterError("gaussian_copula_logdensity: model is not Gaussian");
    require_open_unit(u);
    Vector z(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) z(j) = normal_quantile(u(j));
    return model.gaussian_log_density_from_normal_scores(z);
}

double t_copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model) {
    if (model.family() != CopulaFamily::StudentT) throw ParameterError("t_copula_logdensity: model is not a t copula");
    require_open_unit(u);
    const double nu = *model.tail_index();
    Vector x(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) x(j) = student_t_quantile(u(j), nu);
    return model.t_log_density_from_t_scores(x);
}

double copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model) {
    switch (model.family()) {
        case CopulaFamily::Independence:
            if (u.size() != static_cast<Eigen::Index>(model.dim())) throw DimensionError("copula: dimension mismatch");
            require_open_unit(u);
            return 0.0;
        case CopulaFamily::Gaussian:
            return gaussian_copula_logdensity(u, model);
        case CopulaFamily::StudentT:
            return t_copula_logdensity(u, model);
    }
    return 0.0;
}

Matrix kendall_tau_matrix(const Matrix& scores) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index J = scores.cols();
    if (n < 2) throw ParameterError("kendall_tau_matrix: need at least 2 observations");
    // Accumulate S^T S over blocks of pair-sign rows; entries are exact small integers.
    constexpr Eigen::Index kBlock = 4096;
    Matrix signs(kBlock, J);
    Matrix acc = Matrix::Zero(J, J);
    Eigen::Index filled = 0;
    const auto flush = [&]() {
        if (filled == 0) return;
        acc.noalias() += signs.topRows(filled).transpose() * signs.topRows(filled);
        filled = 0;
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = i + 1; k < n; ++k) {
            for (Eigen::Index j = 0; j < J; ++j) {
                const double d = scores(i, j) - scores(k, j);
                signs(filled, j) = static_cast<double>((d > 0.0) - (d < 0.0));
            }
            if (++filled == kBlock) flush();
        }
    }
    flush();
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    Matrix tau = acc / pairs;
    tau.diagonal().setOnes();
    return tau;
}

namespace {

Vector average_ranks(const Eigen::Ref<const Vector>& x) {
    const Eigen::Index n = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a) < x(b); });
    Vector ranks(n);
    Eigen::Index i = 0;
    while (i < n) {
        Eigen::Index k = i;
        while (k + 1 < n && x(order[static_cast<std::size_t>(k + 1)]) == x(order[static_cast<std::size_t>(i)])) ++k;
        const double avg = 0.5 * static_cast<double>(i + k) + 1.0;
        for (Eigen::Index r = i; r <= k; ++r) ranks(order[static_cast<std::size_t>(r)]) = avg;
        i = k + 1;
    }
    return ranks;
}

}  // namespace

Matrix spearman_rho_matrix(const Matrix& scores) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index J = scores.cols();
    if (n < 2) throw ParameterError("spearman_rho_matrix: need at least 2 observations");
    Matrix ranks(n, J);
    for (Eigen::Index j = 0; j < J; ++j) {
        ranks.col(j) = average_ranks(scores.col(j));
        ranks.col(j).array() -= ranks.col(j).mean();
        const double norm = ranks.col(j).norm();
        if (!(norm > 0.0)) throw DataError("spearman_rho_matrix: column " + std::to_string(j) + " is constant");
        ranks.col(j) /= norm;
    }
    Matrix rho = ranks.transpose() * ranks;
    rho.diagonal().setOnes();
    return rho.cwiseMax(-1.0).cwiseMin(1.0);
}

Matrix rank_to_correlation(const Matrix& rank_corr, RankMethod method, CopulaFamily target) {
    if (method == RankMethod::SpearmanRho && target == CopulaFamily::StudentT) {
        throw ParameterError("Spearman's rho does not determine a t-copula correlation; use Kendall's tau");
    }
    if (rank_corr.rows() != rank_corr.cols()) throw DimensionError("rank_to_correlation: matrix must be square");
    if ((rank_corr.array().abs() > 1.0 + 1e-12).any()) throw DomainError("rank correlations must lie in [-1, 1]");
    Matrix out(rank_corr.rows(), rank_corr.cols());
    for (Eigen::Index a = 0; a < out.rows(); ++a) {
        for (Eigen::Index b = 0; b < out.cols(); ++b) {
            const double r = rank_corr(a, b);
            out(a, b) = method == RankMethod::KendallTau ? std::sin(0.5 * std::numbers::pi * r)
                                                         : 2.0 * std::sin(std::numbers::pi / 6.0 * r);
        }
    }
    out.diagonal().setOnes();
    return out;
}

Matrix nearest_pd_repair(const Matrix& corr) {
    if (corr.rows() != corr.cols()) throw DimensionError("nearest_pd_repair: matrix must be square");
    if (corr.rows() == 0) return corr;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(corr);
    if (solver.info() != Eigen::Success) throw NumericalError("nearest_pd_repair: eigen-decomposition failed");
    if (solver.eigenvalues().minCoeff() >= kMinCorrEigenvalue) return corr;

    Matrix a = corr;
    double floor = kMinCorrEigenvalue;
    for (int iter = 0; iter < 60; ++iter) {
        const Vector clipped = solver.eigenvalues().cwiseMax(floor);
        a = solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
        const Vector inv_sqrt_d = a.diagonal().cwiseSqrt().cwiseInverse();
        a = inv_sqrt_d.asDiagonal() * a * inv_sqrt_d.asDiagonal();
        a = 0.5 * (a + a.transpose()).eval();
        a.diagonal().setOnes();
        solver.compute(a);
        if (solver.info() != Eigen::Success) throw NumericalError("nearest_pd_repair: eigen-decomposition failed");
        if (solver.eigenvalues().minCoeff() >= kMinCorrEigenvalue) return a;
        floor *= 2.0;
    }
    throw NumericalError("nearest_pd_repair: could not reach the eigenvalue floor");
}

TailLikelihood::TailLikelihood(const Matrix& pseudo_obs) {
    const Eigen::Index n = pseudo_obs.rows();
    const Eigen::Index J = pseudo_obs.cols();
    if (n < 1 || J < 1) throw ParameterError("TailLikelihood: empty pseudo-observation matrix");
    require_open_unit(pseudo_obs.reshaped());
    std::vector<double> values(pseudo_obs.data(), pseudo_obs.data() + pseudo_obs.size());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    unique_u_ = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    index_.resize(n, J);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            index_(i, j) = static_cast<int>(std::lower_bound(values.begin(), values.end(), pseudo_obs(i, j)) - values.begin());
        }
    }
}

const Vector& TailLikelihood::quantiles(double nu) const {
    auto it = cache_.find(nu);
    if (it != cache_.end()) return it->second;
    // Column 0: quantile, column 1 (stored after): log univariate density.
    Vector packed(2 * unique_u_.size());
    const boost::math::students_t_distribution<double> dist(nu);
    for (Eigen::Index r = 0; r < unique_u_.size(); ++r) {
        const double x = boost::math::quantile(dist, unique_u_(r));
        packed(r) = x;
        packed(unique_u_.size() + r) = student_t_log_density(x, nu);
    }
    return cache_.emplace(nu, std::move(packed)).first->second;
}

double TailLikelihood::operator()(double nu, const Eigen::LLT<Matrix>& chol) const {
    const Eigen::Index J = chol.matrixLLT().rows();
    if (J > index_.cols()) throw DimensionError("TailLikelihood: correlation larger than the pseudo-observations");
    const Eigen::Index n = index_.rows();
    const Vector& packed = quantiles(nu);
    const Eigen::Index u_count = unique_u_.size();
    Matrix x(J, n);
    double marginals = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < J; ++j) {
            const int r = index_(i, j);
            x(j, i) = packed(r);
            marginals += packed(u_count + r);
        }
    }
    chol.matrixL().solveInPlace(x);
    const auto dim = static_cast<double>(J);
    const double log_det = 2.0 * chol.matrixLLT().diagonal().array().log().sum();
    double joint = static_cast<double>(n) * (log_t_normalizer(nu, dim) - 0.5 * log_det);
    for (Eigen::Index i = 0; i < n; ++i) joint -= 0.5 * (nu + dim) * std::log1p(x.col(i).squaredNorm() / nu);
    return joint - marginals;
}

TailFit fit_t_tail(const TailLikelihood& likelihood, const Matrix& corr) {
    Eigen::LLT<Matrix> chol(corr);
    if (chol.info() != Eigen::Success) throw NumericalError("fit_t_tail: correlation matrix is not positive definite");
    const auto eval = [&](double nu) {
        const double v = likelihood(nu, chol);
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };
    constexpr int kScan = 16;
    const double log_lo = std::log(kMinTailIndex);
    const double log_hi = std::log(kMaxTailIndex);
    std::array<double, kScan> log_nu{};
    std::array<double, kScan> value{};
    int best = 0;
    for (int g = 0; g < kScan; ++g) {
        log_nu[g] = g == kScan - 1 ? log_hi : log_lo + (log_hi - log_lo) * g / (kScan - 1);
        value[g] = eval(std::exp(log_nu[g]));
        if (value[g] > value[best]) best = g;
    }
    // Golden-section in log(nu) inside the bracket around the best scan point.
    double a = log_nu[std::max(best - 1, 0)];
    double b = log_nu[std::min(best + 1, kScan - 1)];
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eval(std::exp(c));
    double fd = eval(std::exp(d));
    while (b - a > 1e-3) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(std::exp(d));
        }
    }
    TailFit fit;
    const double mid = 0.5 * (a + b);
    const double f_mid = eval(std::exp(mid));
    if (f_mid >= value[best]) {
        fit.nu = std::exp(mid);
        fit.log_likelihood = f_mid;
    } else {
        fit.nu = std::exp(log_nu[best]);
        fit.log_likelihood = value[best];
    }
    fit.nu = std::clamp(fit.nu, kMinTailIndex, kMaxTailIndex);
    const double log_fit = std::log(fit.nu);
    fit.at_boundary = (log_fit - log_lo) < 1e-3 || (log_hi - log_fit) < 1e-3;
    if (!std::isfinite(fit.log_likelihood)) throw NumericalError("fit_t_tail: pseudo log-likelihood is not finite");
    return fit;
}

TailFit fit_t_tail(const Matrix& pseudo_obs, const Matrix& corr) {
    if (pseudo_obs.cols() != corr.rows()) throw DimensionError("fit_t_tail: pseudo-observations and correlation disagree");
    return fit_t_tail(TailLikelihood(pseudo_obs), corr);
}

Matrix pseudo_observations(const Matrix& scores) {
    const Eigen::Index n = scores.rows();
    Matrix u(n, scores.cols());
    std::vector<double> sorted(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = scores(i, j);
        std::sort(sorted.begin(), sorted.end());
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto count = std::upper_bound(sorted.begin(), sorted.end(), scores(i, j)) - sorted.begin();
            u(i, j) = clamp_pseudo_obs(static_cast<double>(count) / static_cast<double>(n + 1), static_cast<std::size_t>(n));
        }
    }
    return u;
}

CopulaModel copula_from_rank_correlation(const Matrix& rank_corr, CopulaFamily family, RankMethod method,
                                         const TailLikelihood* tail) {
    const auto J = static_cast<std::size_t>(rank_corr.rows());
    if (family == CopulaFamily::Independence) return CopulaModel::independence(J);
    Matrix corr = nearest_pd_repair(rank_to_correlation(rank_corr, method, family));
    if (family == CopulaFamily::Gaussian) return CopulaModel::gaussian(std::move(corr));
    if (tail == nullptr) throw ParameterError("t copula fit needs pseudo-observations");
    const TailFit fit = fit_t_tail(*tail, corr);
    return CopulaModel::student_t(std::move(corr), fit.nu, fit.at_boundary);
}

CopulaModel fit_copula(const Matrix& scores, CopulaFamily family, RankMethod method) {
    if (scores.rows() < 2) throw ParameterError("fit_copula: need at least 2 observations");
    if (family == CopulaFamily::Independence) return CopulaModel::independence(static_cast<std::size_t>(scores.cols()));
    if (method == RankMethod::SpearmanRho && family == CopulaFamily::StudentT) {
        throw ParameterError("Spearman's rho does not determine a t-copula correlation; use Kendall's tau");
    }
    const Matrix rank = method == RankMethod::KendallTau ? kendall_tau_matrix(scores) : spearman_rho_matrix(scores);
    if (family == CopulaFamily::StudentT) {
        const TailLikelihood tail(pseudo_observations(scores));
        return copula_from_rank_correlation(rank, family, method, &tail);
    }
    return copula_from_rank_correlation(rank, family, method, nullptr);
}

}  // namespace fbc
