#include "fbc/simgen.hpp"

#include "fbc/basis.hpp"
#include "fbc/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

namespace fbc {

namespace {

constexpr char kEigenfunctionCodes[] = {'S', 'R', 'M'};
constexpr char kMeanCodes[] = {'S', 'D'};
constexpr char kEigenvalueCodes[] = {'S', 'D'};
constexpr char kScoreCodes[] = {'N', 'T', 'V'};

[[noreturn]] void bad_label(std::string_view label) {
    throw ParameterError("unknown scenario label '" + std::string(label) +
                         "'; binary labels are [S|R][S|D][S|D][N|T|V] (e.g. RSDN), three-class labels "
                         "M[S|D][S|D][N|T|V] (e.g. MDSN)");
}

int code_index(char c, std::string_view codes) {
    const auto pos = codes.find(c);
    return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

// Portable samplers over the counter generator, so streams do not depend on
// the standard library's distribution implementations.
class Sampler {
public:
    explicit Sampler(CounterRng rng) : rng_(rng) {}

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - rng_.uniform();  // (0, 1]
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }
    double exponential(double rate) { return -std::log1p(-rng_.uniform()) / rate; }
    double chi_square(int df) {
        double s = 0.0;
        for (int i = 0; i < df; ++i) {
            const double z = normal();
            s += z * z;
        }
        return s;
    }

private:
    CounterRng rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class ScoreLaw { Normal, Skewed, CenteredExp };

ScoreLaw score_law(ScoreFactor factor, int group, std::size_t n_classes) {
    switch (factor) {
        case ScoreFactor::N: return ScoreLaw::Normal;
        case ScoreFactor::T: return ScoreLaw::Skewed;
        case ScoreFactor::V:
            if (n_classes == 2) return group == 1 ? ScoreLaw::Normal : ScoreLaw::CenteredExp;
            return group == 0 ? ScoreLaw::Normal : (group == 1 ? ScoreLaw::CenteredExp : ScoreLaw::Skewed);
    }
    return ScoreLaw::Normal;
}

Vector eigenvalue_sequence(double scale, double power, std::size_t J) {
    Vector out(static_cast<Eigen::Index>(J));
    for (std::size_t j = 1; j <= J; ++j) out(static_cast<Eigen::Index>(j - 1)) = scale / std::pow(static_cast<double>(j), power);
    return out;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_label(std::string_view label) {
    if (label.size() != 4) bad_label(label);
    std::string up;
    for (char c : label) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    const int e = code_index(up[0], {kEigenfunctionCodes, 3});
    const int m = code_index(up[1], {kMeanCodes, 2});
    const int v = code_index(up[2], {kEigenvalueCodes, 2});
    const int s = code_index(up[3], {kScoreCodes, 3});
    if (e < 0 || m < 0 || v < 0 || s < 0) bad_label(label);
    ScenarioConfig c;
    c.eigenfunction_factor = static_cast<EigenfunctionFactor>(e);
    c.mean_factor = static_cast<MeanFactor>(m);
    c.eigenvalue_factor = static_cast<EigenvalueFactor>(v);
    c.score_factor = static_cast<ScoreFactor>(s);
    c.n_classes = c.eigenfunction_factor == EigenfunctionFactor::MultiRotated ? 3 : 2;
    return c;
}

std::string ScenarioConfig::label() const {
    std::string out;
    out.push_back(kEigenfunctionCodes[static_cast<int>(eigenfunction_factor)]);
    out.push_back(kMeanCodes[static_cast<int>(mean_factor)]);
    out.push_back(kEigenvalueCodes[static_cast<int>(eigenvalue_factor)]);
    out.push_back(kScoreCodes[static_cast<int>(score_factor)]);
    return out;
}

void ScenarioConfig::validate() const {
    const bool multi = eigenfunction_factor == EigenfunctionFactor::MultiRotated;
    if (multi != (n_classes == 3) || (n_classes != 2 && n_classes != 3)) {
        throw ParameterError("scenario " + label() + ": n_classes must be 3 exactly for M scenarios and 2 otherwise");
    }
    if (grid_points < 3) throw ParameterError("grid_points must be at least 3");
    if (J_gen < 1) throw ParameterError("J_gen must be positive");
    if (multi && mean_factor == MeanFactor::Different && J_gen < 10) {
        throw ParameterError("three-class mean difference needs J_gen >= 10");
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) throw ParameterError("noise_sd must be a nonnegative number");
    if (n_train < 2 * n_classes) throw ParameterError("n_train must give every group at least two curves");
    if (n_test < 1) throw ParameterError("n_test must be positive");
}

std::vector<std::string> scenario_labels(std::size_t n_classes) {
    std::vector<std::string> out;
    const std::string first = n_classes == 3 ? "M" : "RS";
    for (char e : first) {
        for (char m : {'S', 'D'}) {
            for (char v : {'S', 'D'}) {
                for (char s : {'N', 'T', 'V'}) out.push_back(std::string{e, m, v, s});
            }
        }
    }
    return out;
}

Matrix fourier_basis(const Grid& grid, std::size_t J) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    Matrix out(static_cast<Eigen::Index>(J), m);
    const double r2 = std::numbers::sqrt2;
    for (std::size_t j = 1; j <= J; ++j) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = grid[static_cast<std::size_t>(i)];
            double v = 1.0;
            if (j > 1) {
                v = (j % 2 == 0) ? r2 * std::cos(static_cast<double>(j) * std::numbers::pi * t)
                                 : r2 * std::sin(static_cast<double>(j - 1) * std::numbers::pi * t);
            }
            out(static_cast<Eigen::Index>(j - 1), i) = v;
        }
    }
    return out;
}

Matrix givens_rotation(const Vector& eigenvalues, double angle_scale) {
    const Eigen::Index J = eigenvalues.size();
    Matrix q = Matrix::Identity(J, J);
    for (Eigen::Index j = 0; j + 1 < J; ++j) {
        for (Eigen::Index k = j + 1; k < J; ++k) {
            const double theta = angle_scale * (eigenvalues(j) + eigenvalues(k));
            const double c = std::cos(theta), s = std::sin(theta);
            const Vector a = q.row(j).transpose();
            const Vector b = q.row(k).transpose();
            q.row(j) = (c * a - s * b).transpose();
            q.row(k) = (s * a + c * b).transpose();
        }
    }
    return q;
}

Matrix rotate_basis(const Matrix& basis, const Vector& eigenvalues, double angle_scale) {
    if (eigenvalues.size() != basis.rows()) throw DimensionError("rotate_basis: one eigenvalue per basis function required");
    return givens_rotation(eigenvalues, angle_scale) * basis;
}

Matrix sample_scores(ScoreFactor factor, int group, std::size_t n_classes, std::size_t n, std::size_t J, CounterRng rng) {
    const ScoreLaw law = score_law(factor, group, n_classes);
    const double rate = 5.0 * std::sqrt(3.0) / 3.0;
    const double shift = 1.0 / rate;
    Matrix out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J));
    for (std::size_t i = 0; i < n; ++i) {
        Sampler s(rng.split(i));
        const auto r = static_cast<Eigen::Index>(i);
        switch (law) {
            case ScoreLaw::Normal:
                for (Eigen::Index j = 0; j < out.cols(); ++j) out(r, j) = s.normal();
                break;
            case ScoreLaw::CenteredExp:
                for (Eigen::Index j = 0; j < out.cols(); ++j) out(r, j) = s.exponential(1.0) - 1.0;
                break;
            case ScoreLaw::Skewed: {
                const double eta = s.chi_square(5) / 5.0;
                for (Eigen::Index j = 0; j < out.cols(); ++j) out(r, j) = (s.exponential(rate) - shift) / eta;
                break;
            }
        }
    }
    return out;
}

ScenarioModel scenario_model(const ScenarioConfig& config, const Grid& grid) {
    config.validate();
    const std::size_t K = config.n_classes;
    const std::size_t J = config.J_gen;
    const bool multi = K == 3;
    const Matrix fourier = fourier_basis(grid, J);
    ScenarioModel model;

    const double base = multi ? 10.0 : 1.0;
    const Vector lambda0 = eigenvalue_sequence(base, 2.0, J);
    for (std::size_t k = 0; k < K; ++k) {
        if (config.eigenvalue_factor == EigenvalueFactor::Same || k == 0) {
            model.eigenvalues.push_back(lambda0);
        } else {
            model.eigenvalues.push_back(eigenvalue_sequence(base, k == 1 ? 3.0 : 1.0, J));
        }
    }
    for (std::size_t k = 0; k < K; ++k) {
        if (config.eigenfunction_factor == EigenfunctionFactor::Same || k == 0) {
            model.bases.push_back(fourier);
        } else {
            const double scale = (k == 1 ? 1.0 / 3.0 : 1.0 / 4.0) * std::numbers::pi;
            model.bases.push_back(rotate_basis(fourier, lambda0, scale));
        }
    }
    const auto m = static_cast<Eigen::Index>(grid.size());
    for (std::size_t k = 0; k < K; ++k) {
        Vector mu = Vector::Zero(m);
        if (config.mean_factor == MeanFactor::Different) {
            if (k == 1) {
                for (Eigen::Index i = 0; i < m; ++i) mu(i) = grid[static_cast<std::size_t>(i)];
            } else if (k == 2) {
                // Weight on the last ten generating functions (192..201 for J_gen = 201).
                mu = fourier.bottomRows(10).colwise().sum().transpose();
            }
        }
        model.means.push_back(std::move(mu));
    }
    return model;
}

FunctionalDataset generate_sample(const ScenarioConfig& config, const ScenarioModel& model, const Grid& grid,
                                  std::size_t n, CounterRng rng) {
    const std::size_t K = config.n_classes;
    std::vector<int> labels;
    labels.reserve(n);
    for (std::size_t k = 0; k < K; ++k) {
        const std::size_t nk = n / K + (k < n % K ? 1 : 0);
        labels.insert(labels.end(), nk, static_cast<int>(k));
    }
    CounterRng shuffle = rng.split(stream::labels);
    for (std::size_t i = n; i > 1; --i) std::swap(labels[i - 1], labels[static_cast<std::size_t>(shuffle() % i)]);

    const auto m = static_cast<Eigen::Index>(grid.size());
    Matrix curves(static_cast<Eigen::Index>(n), m);
    std::vector<Matrix> weighted(K);
    for (std::size_t k = 0; k < K; ++k) weighted[k] = model.eigenvalues[k].cwiseSqrt().asDiagonal() * model.bases[k];
    for (std::size_t i = 0; i < n; ++i) {
        const int k = labels[i];
        const CounterRng curve = rng.split(i);
        const Matrix xi = sample_scores(config.score_factor, k, K, 1, config.J_gen, curve.split(stream::scores));
        Vector x = model.means[static_cast<std::size_t>(k)] + (xi.row(0) * weighted[static_cast<std::size_t>(k)]).transpose();
        if (config.noise_sd > 0.0) {
            Sampler noise(curve.split(stream::noise));
            for (Eigen::Index t = 0; t < m; ++t) x(t) += config.noise_sd * noise.normal();
        }
        curves.row(static_cast<Eigen::Index>(i)) = x.transpose();
    }
    return FunctionalDataset(grid, std::move(curves), std::move(labels));
}

GeneratedData generate(const ScenarioConfig& config) {
    const Grid grid = Grid::uniform(0.0, 1.0, config.grid_points);
    const ScenarioModel model = scenario_model(config, grid);
    const CounterRng root(config.seed);
    return GeneratedData{generate_sample(config, model, grid, config.n_train, root.split(stream::train)),
                         generate_sample(config, model, grid, config.n_test, root.split(stream::test))};
}

// ---------------------------------------------------------------------------

namespace {

// Joint eigenfunctions of the pooled covariance
//   sum_k pi_k G_k + sum_k pi_k (mu_k - mu_bar)(mu_k - mu_bar)^T
// from the low-rank factor B with G_pooled = B^T B: eigenvectors of B W B^T
// map to eigenfunctions B^T v / sqrt(lambda).
struct JointEigen {
    Matrix coef;  // rows: coefficients over the rows of B, already divided by sqrt(lambda)
};

Matrix pooled_factor(const ScenarioModel& model, std::size_t K) {
    const double pi = 1.0 / static_cast<double>(K);
    const Eigen::Index J = model.bases.front().rows();
    const Eigen::Index m = model.bases.front().cols();
    Matrix B(static_cast<Eigen::Index>(K) * (J + 1), m);
    Vector mu_bar = Vector::Zero(m);
    for (const auto& mu : model.means) mu_bar += pi * mu;
    for (std::size_t k = 0; k < K; ++k) {
        const auto off = static_cast<Eigen::Index>(k) * (J + 1);
        B.middleRows(off, J) = (pi * model.eigenvalues[k]).cwiseSqrt().asDiagonal() * model.bases[k];
        B.row(off + J) = std::sqrt(pi) * (model.means[k] - mu_bar).transpose();
    }
    return B;
}

JointEigen joint_eigen(const Matrix& B, const Grid& grid, std::size_t J) {
    const Matrix gram = B * grid.weights().asDiagonal() * B.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericalError("joint eigen-decomposition failed");
    const Eigen::Index top = gram.rows() - 1;
    JointEigen out;
    out.coef.resize(static_cast<Eigen::Index>(J), gram.rows());
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(J); ++j) {
        const double lam = solver.eigenvalues()(top - j);
        if (!(lam > 0.0)) throw NumericalError("pooled covariance has fewer than J positive eigenvalues");
        out.coef.row(j) = solver.eigenvectors().col(top - j).transpose() / std::sqrt(lam);
    }
    // Fix signs by the fine-grid functions so the coarse-grid evaluation agrees.
    const Matrix psi = out.coef * B;
    for (Eigen::Index j = 0; j < psi.rows(); ++j) {
        Eigen::Index best = 0;
        psi.row(j).cwiseAbs().maxCoeff(&best);
        if (psi(j, best) < 0.0) out.coef.row(j) *= -1.0;
    }
    return out;
}

void require_binary_gaussian(const ScenarioConfig& config) {
    config.validate();
    if (config.n_classes != 2) throw ParameterError("Gaussian theory diagnostics are defined for two groups only");
    if (config.score_factor != ScoreFactor::N) {
        throw ParameterError("Gaussian theory diagnostics need normal scores (N); scenario is " + config.label());
    }
}

Matrix score_covariance(const ScenarioModel& model, std::size_t k, const Matrix& psi, const Grid& grid) {
    const Matrix A = model.bases[k] * grid.weights().asDiagonal() * psi.transpose();  // J_gen x J
    return A.transpose() * model.eigenvalues[k].asDiagonal() * A;
}

}  // namespace

TheoryDiagnostics theory_diagnostics(const ScenarioConfig& config, std::size_t J, std::size_t fine_points) {
    require_binary_gaussian(config);
    if (J == 0) throw ParameterError("theory_diagnostics: J must be positive");
    const Grid fine = Grid::uniform(0.0, 1.0, fine_points);
    const ScenarioModel model = scenario_model(config, fine);
    const Matrix B = pooled_factor(model, 2);
    const Matrix psi = joint_eigen(B, fine, J).coef * B;

    TheoryDiagnostics out;
    out.score_cov = {score_covariance(model, 0, psi, fine), score_covariance(model, 1, psi, fine)};
    out.mu_vec = psi * fine.weights().asDiagonal() * (model.means[1] - model.means[0]);

    Eigen::SelfAdjointEigenSolver<Matrix> r0(out.score_cov[0]);
    if (r0.info() != Eigen::Success || !(r0.eigenvalues().minCoeff() > 0.0)) {
        throw NumericalError("group-0 score covariance is not positive definite");
    }
    const Matrix r0_half = r0.operatorSqrt();
    Eigen::LLT<Matrix> r1(out.score_cov[1]);
    if (r1.info() != Eigen::Success) throw NumericalError("group-1 score covariance is not positive definite");
    Matrix M = r0_half * r1.solve(r0_half);
    M = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> delta(M, Eigen::EigenvaluesOnly);
    out.delta_spectrum = delta.eigenvalues();
    out.variance_divergence = (out.delta_spectrum.array() - 1.0).square().sum();
    out.mean_divergence = out.mu_vec.dot(r0.eigenvectors() * r0.eigenvalues().cwiseInverse().asDiagonal() *
                                         r0.eigenvectors().transpose() * out.mu_vec);
    return out;
}

GaussianOracle::GaussianOracle(const ScenarioConfig& config, std::size_t J, std::size_t fine_points)
    : grid_(Grid::uniform(0.0, 1.0, config.grid_points)) {
    require_binary_gaussian(config);
    if (J == 0) throw ParameterError("GaussianOracle: J must be positive");
    const Grid fine = Grid::uniform(0.0, 1.0, fine_points);
    const JointEigen eig = joint_eigen(pooled_factor(scenario_model(config, fine), 2), fine, J);
    const ScenarioModel coarse = scenario_model(config, grid_);
    directions_ = eig.coef * pooled_factor(coarse, 2);

    const Vector& w = grid_.weights();
    const Matrix noise = config.noise_sd * config.noise_sd * directions_ * w.cwiseAbs2().asDiagonal() * directions_.transpose();
    for (std::size_t k = 0; k < 2; ++k) {
        mean_[k] = directions_ * w.asDiagonal() * coarse.means[k];
        const Matrix cov = score_covariance(coarse, k, directions_, grid_) + noise;
        Eigen::LLT<Matrix> llt(cov);
        if (llt.info() != Eigen::Success) throw NumericalError("oracle score covariance is not positive definite");
        precision_[k] = llt.solve(Matrix::Identity(cov.rows(), cov.cols()));
        log_det_[k] = 2.0 * Eigen::Matrix<double, Eigen::Dynamic, 1>(llt.matrixLLT().diagonal()).array().log().sum();
    }
}

double GaussianOracle::log_ratio(const Eigen::Ref<const Vector>& curve) const {
    const Vector x = directions_ * grid_.weights().asDiagonal() * curve;
    double q[2];
    for (int k = 0; k < 2; ++k) {
        const Vector d = x - mean_[k];
        q[k] = -0.5 * d.dot(precision_[k] * d) - 0.5 * log_det_[k];
    }
    return q[1] - q[0];
}

}  // namespace fbc
