#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fbc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform observation grid shared by every curve of a dataset.
///
/// Holds the trapezoidal quadrature weights used for all L2 inner products.
class Grid {
public:
    /// Empty placeholder; not usable for quadrature.
    Grid() = default;
    /// Throws DataError unless points are finite, strictly increasing, at least
    /// three, and equally spaced to within 1e-9 relative.
    explicit Grid(std::vector<double> points);

    /// `count` equally spaced points on [lo, hi].
    static Grid uniform(double lo, double hi, std::size_t count);

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] double spacing() const noexcept { return spacing_; }
    [[nodiscard]] double front() const noexcept { return points_.front(); }
    [[nodiscard]] double back() const noexcept { return points_.back(); }
    [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] const Vector& weights() const noexcept { return weights_; }

    /// Same length and each point equal within 1e-9 of the spacing.
    [[nodiscard]] bool matches(const Grid& other) const noexcept;

private:
    std::vector<double> points_;
    double spacing_ = 0.0;
    Vector weights_;
};

/// Trapezoidal approximation of the integral of f*g over the grid.
double inner_product(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& g, const Grid& grid);

/// L2 norm under the grid quadrature.
double l2_norm(const Eigen::Ref<const Vector>& f, const Grid& grid);

/// Labelled curves observed on a common grid.
///
/// Rows of `curves` are observations. Labels take values 0..K-1 where K is the
/// number of priors; every group must have at least two members.
class FunctionalDataset {
public:
    /// Priors default to the empirical frequencies n_k / n, with K = max label + 1.
    FunctionalDataset(Grid grid, Matrix curves, std::vector<int> labels);
    FunctionalDataset(Grid grid, Matrix curves, std::vector<int> labels, std::vector<double> priors);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] const Matrix& curves() const noexcept { return curves_; }
    [[nodiscard]] const std::vector<int>& labels() const noexcept { return labels_; }
    [[nodiscard]] const std::vector<double>& priors() const noexcept { return priors_; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }
    [[nodiscard]] std::size_t num_groups() const noexcept { return priors_.size(); }
    [[nodiscard]] std::size_t grid_size() const noexcept { return grid_.size(); }

    [[nodiscard]] std::vector<std::size_t> group_counts() const;
    [[nodiscard]] std::vector<std::size_t> group_indices(int group) const;

    /// Rows `rows`, keeping K; priors are re-estimated from the subset's labels.
    [[nodiscard]] FunctionalDataset subset(std::span<const std::size_t> rows) const;

    /// Same labels and priors with a replacement curve matrix.
    [[nodiscard]] FunctionalDataset with_curves(Matrix curves) const;

private:
    void validate() const;

    Grid grid_;
    Matrix curves_;
    std::vector<int> labels_;
    std::vector<double> priors_;
};

/// Gaussian-kernel local-linear smoother evaluated at the grid points.
///
/// The smoother is linear, so it is stored as an m x m matrix S with
/// smoothed = S * raw.
class LocalLinearSmoother {
public:
    /// `bandwidth` is in the units of the grid coordinates.
    LocalLinearSmoother(const Grid& grid, double bandwidth);

    [[nodiscard]] Vector apply(const Eigen::Ref<const Vector>& curve) const;
    /// Smooths every row of `curves`.
    [[nodiscard]] Matrix apply_rows(const Matrix& curves) const;

    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }
    /// Grid points where the local design was singular and the raw value was kept.
    [[nodiscard]] std::size_t fallback_points() const noexcept { return fallback_points_; }
    [[nodiscard]] const Matrix& weights() const noexcept { return weights_; }

private:
    double bandwidth_;
    Matrix weights_;
    std::size_t fallback_points_ = 0;
};

struct PresmoothResult {
    FunctionalDataset data;
    /// Number of grid points that fell back to the nearest raw value.
    std::size_t fallback_points = 0;
};

/// Default pre-smoothing bandwidth: five grid spacings.
double default_presmooth_bandwidth(const Grid& grid);

PresmoothResult presmooth(const FunctionalDataset& data, double bandwidth);

struct CenteredData {
    FunctionalDataset data;
    /// K x m matrix; row k is the pointwise mean of group k.
    Matrix group_means;
};

CenteredData center_by_group(const FunctionalDataset& data);

/// Pointwise mean of all rows.
Vector pooled_mean(const Matrix& curves);

}  // namespace fbc
