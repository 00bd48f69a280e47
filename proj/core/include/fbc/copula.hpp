#pragma once

#include "fbc/fd.hpp"

#include <Eigen/Cholesky>

#include <map>
#include <optional>
#include <vector>

namespace fbc {

enum class CopulaFamily { Independence, Gaussian, StudentT };
enum class RankMethod { KendallTau, SpearmanRho };

inline constexpr double kMinTailIndex = 2.0;
inline constexpr double kMaxTailIndex = 300.0;
inline constexpr double kMinCorrEigenvalue = 1e-6;

/// Parametric copula over J score dimensions.
///
/// The inverse correlation matrix, its Cholesky factor and log-determinant are
/// computed once at construction.
class CopulaModel {
public:
    static CopulaModel independence(std::size_t dim);
    /// Throws NumericalError if `corr` is not a positive-definite correlation matrix.
    static CopulaModel gaussian(Matrix corr);
    static CopulaModel student_t(Matrix corr, double tail_index, bool tail_at_boundary = false);

    [[nodiscard]] CopulaFamily family() const noexcept { return family_; }
    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(corr_.rows()); }
    [[nodiscard]] const Matrix& corr() const noexcept { return corr_; }
    [[nodiscard]] const Matrix& corr_inverse() const noexcept { return corr_inverse_; }
    [[nodiscard]] double log_det() const noexcept { return log_det_; }
    [[nodiscard]] std::optional<double> tail_index() const noexcept { return tail_index_; }
    /// The tail-index search ended on an end of its interval.
    [[nodiscard]] bool tail_at_boundary() const noexcept { return tail_at_boundary_; }

    /// Gaussian copula log-density given normal scores z_j = Phi^{-1}(u_j).
    [[nodiscard]] double gaussian_log_density_from_normal_scores(const Eigen::Ref<const Vector>& z) const;
    /// t-copula log-density given t scores x_j = T_nu^{-1}(u_j).
    [[nodiscard]] double t_log_density_from_t_scores(const Eigen::Ref<const Vector>& x) const;

private:
    CopulaModel(CopulaFamily family, Matrix corr, std::optional<double> tail_index, bool boundary);

    CopulaFamily family_;
    Matrix corr_;
    Matrix corr_inverse_;
    Matrix precision_minus_identity_;
    double log_det_ = 0.0;
    std::optional<double> tail_index_;
    bool tail_at_boundary_ = false;
};

/// Pairwise Kendall tau of the score columns; ties contribute 0. Diagonal is 1.
Matrix kendall_tau_matrix(const Matrix& scores);

/// Pearson correlation of average ranks. Throws DataError for a constant column.
Matrix spearman_rho_matrix(const Matrix& scores);

/// Elementwise map from rank correlation to copula correlation:
/// sin(pi/2 tau) or 2 sin(pi/6 rho). Spearman is rejected for the t family.
Matrix rank_to_correlation(const Matrix& rank_corr, RankMethod method, CopulaFamily target = CopulaFamily::Gaussian);

/// Clips eigenvalues below 1e-6 and rescales to unit diagonal; PD input is returned unchanged.
Matrix nearest_pd_repair(const Matrix& corr);

/// Standard normal quantile and Student-t quantile / log-density helpers.
double normal_quantile(double u);
double student_t_quantile(double u, double nu);
double student_t_log_density(double x, double nu);

double gaussian_copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model);
double t_copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model);
/// Dispatches on the family; the independence copula contributes 0.
double copula_logdensity(const Eigen::Ref<const Vector>& u, const CopulaModel& model);

/// Pseudo log-likelihood of the t copula in its tail index for a fixed set of
/// pseudo-observations. Quantile vectors are cached per tail index so repeated
/// searches over nested correlation matrices (leading J x J blocks) share work.
class TailLikelihood {
public:
    /// `pseudo_obs` is n x Jmax with entries strictly inside (0, 1).
    explicit TailLikelihood(const Matrix& pseudo_obs);

    /// Sum over observations of log c_t using the first chol.rows() columns.
    [[nodiscard]] double operator()(double nu, const Eigen::LLT<Matrix>& chol) const;

    [[nodiscard]] std::size_t max_dim() const noexcept { return static_cast<std::size_t>(index_.cols()); }

private:
    const Vector& quantiles(double nu) const;

    Vector unique_u_;
    Eigen::MatrixXi index_;  // n x Jmax positions into unique_u_
    mutable std::map<double, Vector> cache_;
};

struct TailFit {
    double nu = kMaxTailIndex;
    double log_likelihood = 0.0;
    bool at_boundary = false;
};

/// Maximises the t-copula pseudo log-likelihood over nu in [2, 300]: a 16-point
/// log-spaced scan followed by golden-section refinement (relative tolerance 1e-3).
TailFit fit_t_tail(const Matrix& pseudo_obs, const Matrix& corr);
TailFit fit_t_tail(const TailLikelihood& likelihood, const Matrix& corr);

/// Rank pseudo-observations #{x <= x_ij}/(n+1) per column, clamped off the boundary.
Matrix pseudo_observations(const Matrix& scores);

/// Rank correlation -> copula correlation -> PD repair -> optional tail fit.
CopulaModel fit_copula(const Matrix& scores, CopulaFamily family, RankMethod method = RankMethod::KendallTau);

/// Same as fit_copula but starting from an already computed rank-correlation matrix.
/// `tail` is required for the t family.
CopulaModel copula_from_rank_correlation(const Matrix& rank_corr, CopulaFamily family, RankMethod method,
                                         const TailLikelihood* tail = nullptr);

}  // namespace fbc
