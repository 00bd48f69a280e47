#pragma once

#include "fbc/fd.hpp"
#include "fbc/rng.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace fbc {

enum class EigenfunctionFactor { Same, Rotated, MultiRotated };
enum class MeanFactor { Same, Different };
enum class EigenvalueFactor { Same, Different };
enum class ScoreFactor { N, T, V };

/// One cell of the factorial simulation design.
///
/// Binary labels are four letters: eigenfunctions (S/R), means (S/D),
/// eigenvalues (S/D), scores (N/T/V), e.g. "RSDN". Three-class labels replace
/// the first letter with M, e.g. "MDSN".
struct ScenarioConfig {
    EigenfunctionFactor eigenfunction_factor = EigenfunctionFactor::Same;
    MeanFactor mean_factor = MeanFactor::Same;
    EigenvalueFactor eigenvalue_factor = EigenvalueFactor::Same;
    ScoreFactor score_factor = ScoreFactor::N;
    std::size_t n_classes = 2;
    std::size_t n_train = 100;
    std::size_t n_test = 150;
    std::size_t grid_points = 51;
    std::size_t J_gen = 201;
    double noise_sd = 0.5;
    std::uint64_t seed = 0;

    /// Throws ParameterError listing the valid codes.
    static ScenarioConfig from_label(std::string_view label);
    [[nodiscard]] std::string label() const;
    /// Throws ParameterError on inconsistent settings.
    void validate() const;
};

/// All 24 binary labels, or the 12 three-class labels.
std::vector<std::string> scenario_labels(std::size_t n_classes = 2);

/// Rows are phi_1 = 1, then sqrt(2) cos(j pi t) for even j and sqrt(2) sin((j-1) pi t) for odd j.
Matrix fourier_basis(const Grid& grid, std::size_t J);

/// J x J orthogonal matrix Q such that Q * basis applies the Givens rotations
/// for the pairs (j, j'), j < j', in lexicographic order with angle
/// angle_scale * (lambda_j + lambda_j').
Matrix givens_rotation(const Vector& eigenvalues, double angle_scale);
Matrix rotate_basis(const Matrix& basis, const Vector& eigenvalues, double angle_scale);

/// n x J standardized scores for `group`. Row i is drawn from rng.split(i).
Matrix sample_scores(ScoreFactor factor, int group, std::size_t n_classes, std::size_t n, std::size_t J, CounterRng rng);

/// Generating ingredients of every group on a given grid.
struct ScenarioModel {
    std::vector<Vector> means;        ///< mu_k on the grid
    std::vector<Vector> eigenvalues;  ///< lambda_jk, length J_gen
    std::vector<Matrix> bases;        ///< phi_jk, J_gen x m
};
ScenarioModel scenario_model(const ScenarioConfig& config, const Grid& grid);

struct GeneratedData {
    FunctionalDataset train;
    FunctionalDataset test;
};

/// Balanced labels in shuffled order; curve i gets its own score and noise streams.
FunctionalDataset generate_sample(const ScenarioConfig& config, const ScenarioModel& model, const Grid& grid,
                                  std::size_t n, CounterRng rng);
/// Train and test sets; a pure function of the config (including its seed).
GeneratedData generate(const ScenarioConfig& config);

struct TheoryDiagnostics {
    double mean_divergence = 0.0;      ///< ||R_0^{-1/2} mu||^2
    double variance_divergence = 0.0;  ///< sum_j (Delta_j - 1)^2
    Vector delta_spectrum;             ///< ascending
    std::vector<Matrix> score_cov;     ///< R_0, R_1
    Vector mu_vec;
};

/// Gaussian-case quantities on the first J joint eigenfunctions (eigenfunctions
/// of the pooled covariance), computed from the generating model by quadrature
/// on a `fine_points` grid. Binary N-score configs only.
TheoryDiagnostics theory_diagnostics(const ScenarioConfig& config, std::size_t J, std::size_t fine_points = 2001);

/// Exact Gaussian quadratic Bayes rule on the first J joint-eigenfunction scores
/// of the observed (noisy, discretised) curves.
class GaussianOracle {
public:
    GaussianOracle(const ScenarioConfig& config, std::size_t J, std::size_t fine_points = 2001);
    /// log of the group-1 to group-0 density ratio (equal priors).
    [[nodiscard]] double log_ratio(const Eigen::Ref<const Vector>& curve) const;
    [[nodiscard]] int classify(const Eigen::Ref<const Vector>& curve) const { return log_ratio(curve) > 0.0 ? 1 : 0; }
    [[nodiscard]] const Matrix& directions() const noexcept { return directions_; }

private:
    Grid grid_;
    Matrix directions_;  // J x m, joint eigenfunctions on the observation grid
    Vector mean_[2];
    Matrix precision_[2];
    double log_det_[2] = {0.0, 0.0};
};

}  // namespace fbc
