#include "fbc/fd.hpp"

#include "fbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fbc {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
    const std::size_t m = points_.size();
    if (m < 3) throw DataError("grid needs at least 3 points, got " + std::to_string(m));
    for (double p : points_) {
        if (!std::isfinite(p)) throw DataError("grid contains a non-finite point");
    }
    spacing_ = (points_.back() - points_.front()) / static_cast<double>(m - 1);
    if (!(spacing_ > 0.0)) throw DataError("grid points must be strictly increasing");
    for (std::size_t i = 1; i < m; ++i) {
        const double step = points_[i] - points_[i - 1];
        if (!(step > 0.0)) throw DataError("grid points must be strictly increasing");
        if (std::abs(step - spacing_) > 1e-9 * spacing_) {
            throw DataError("grid must be uniform; step " + std::to_string(i) + " deviates from spacing " +
                            std::to_string(spacing_));
        }
    }
    weights_ = Vector::Constant(static_cast<Eigen::Index>(m), spacing_);
    weights_(0) *= 0.5;
    weights_(static_cast<Eigen::Index>(m - 1)) *= 0.5;
}

Grid Grid::uniform(double lo, double hi, std::size_t count) {
    if (count < 3) throw DataError("grid needs at least 3 points");
    std::vector<double> pts(count);
    const auto last = static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) pts[i] = lo + (hi - lo) * (static_cast<double>(i) / last);
    return Grid(std::move(pts));
}

bool Grid::matches(const Grid& other) const noexcept {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
        if (std::abs(points_[i] - other.points_[i]) > 1e-9 * spacing_) return false;
    }
    return true;
}

double inner_product(const Eigen::Ref<const Vector>& f, const Eigen::Ref<const Vector>& g, const Grid& grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    if (f.size() != m || g.size() != m) {
        throw DimensionError("inner_product: vectors of length " + std::to_string(f.size()) + " and " +
                             std::to_string(g.size()) + " on a grid of " + std::to_string(m) + " points");
    }
    return (f.array() * g.array() * grid.weights().array()).sum();
}

double l2_norm(const Eigen::Ref<const Vector>& f, const Grid& grid) { return std::sqrt(inner_product(f, f, grid)); }

namespace {

std::vector<double> empirical_priors(const std::vector<int>& labels) {
    int k_max = -1;
    for (int l : labels) k_max = std::max(k_max, l);
    if (k_max < 0) throw DataError("dataset has no labelled curves");
    std::vector<double> priors(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int l : labels) {
        if (l < 0) throw DataError("labels must be nonnegative, got " + std::to_string(l));
        priors[static_cast<std::size_t>(l)] += 1.0;
    }
    for (double& p : priors) p /= static_cast<double>(labels.size());
    return priors;
}

}  // namespace

FunctionalDataset::FunctionalDataset(Grid grid, Matrix curves, std::vector<int> labels)
    : grid_(std::move(grid)), curves_(std::move(curves)), labels_(std::move(labels)) {
    priors_ = empirical_priors(labels_);
    validate();
}

FunctionalDataset::FunctionalDataset(Grid grid, Matrix curves, std::vector<int> labels, std::vector<double> priors)
    : grid_(std::move(grid)), curves_(std::move(curves)), labels_(std::move(labels)), priors_(std::move(priors)) {
    validate();
}

void FunctionalDataset::validate() const {
    if (static_cast<std::size_t>(curves_.cols()) != grid_.size()) {
        throw DimensionError("curve matrix has " + std::to_string(curves_.cols()) + " columns but the grid has " +
                             std::to_string(grid_.size()) + " points");
    }
    if (static_cast<std::size_t>(curves_.rows()) != labels_.size()) {
        throw DimensionError("curve matrix has " + std::to_string(curves_.rows()) + " rows but " +
                             std::to_string(labels_.size()) + " labels were given");
    }
    if (!curves_.allFinite()) throw DataError("curve matrix contains non-finite values");
    if (priors_.empty()) throw DataError("dataset needs at least one group");
    double total = 0.0;
    for (double p : priors_) {
        if (!(p > 0.0)) throw DataError("group priors must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DataError("group priors must sum to 1");
    std::vector<std::size_t> counts(priors_.size(), 0);
    for (int l : labels_) {
        if (l < 0 || static_cast<std::size_t>(l) >= priors_.size()) {
            throw DataError("label " + std::to_string(l) + " outside 0.." + std::to_string(priors_.size() - 1));
        }
        ++counts[static_cast<std::size_t>(l)];
    }
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 2) {
            throw DataError("group " + std::to_string(k) + " has " + std::to_string(counts[k]) +
                            " member(s); at least 2 are required");
        }
    }
}

std::vector<std::size_t> FunctionalDataset::group_counts() const {
    std::vector<std::size_t> counts(priors_.size(), 0);
    for (int l : labels_) ++counts[static_cast<std::size_t>(l)];
    return counts;
}

std::vector<std::size_t> FunctionalDataset::group_indices(int group) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == group) idx.push_back(i);
    }
    return idx;
}

FunctionalDataset FunctionalDataset::subset(std::span<const std::size_t> rows) const {
    Matrix sub(static_cast<Eigen::Index>(rows.size()), curves_.cols());
    std::vector<int> labels(rows.size());
    std::vector<double> priors(priors_.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= labels_.size()) throw DimensionError("subset row index out of range");
        sub.row(static_cast<Eigen::Index>(r)) = curves_.row(static_cast<Eigen::Index>(rows[r]));
        labels[r] = labels_[rows[r]];
        priors[static_cast<std::size_t>(labels[r])] += 1.0;
    }
    for (double& p : priors) p /= static_cast<double>(rows.size());
    return FunctionalDataset(grid_, std::move(sub), std::move(labels), std::move(priors));
}

FunctionalDataset FunctionalDataset::with_curves(Matrix curves) const {
    return FunctionalDataset(grid_, std::move(curves), labels_, priors_);
}

LocalLinearSmoother::LocalLinearSmoother(const Grid& grid, double bandwidth) : bandwidth_(bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ParameterError("smoothing bandwidth must be positive");
    const auto m = static_cast<Eigen::Index>(grid.size());
    weights_ = Matrix::Zero(m, m);
    Vector kernel(m);
    Vector offset(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double t0 = grid[static_cast<std::size_t>(a)];
        for (Eigen::Index i = 0; i < m; ++i) {
            offset(i) = grid[static_cast<std::size_t>(i)] - t0;
            const double u = offset(i) / bandwidth;
            kernel(i) = std::exp(-0.5 * u * u);
        }
        const double s0 = kernel.sum();
        const double s1 = kernel.dot(offset);
        const double s2 = (kernel.array() * offset.array().square()).sum();
        const double det = s0 * s2 - s1 * s1;
        if (!(det > 1e-12 * s0 * s2) || !std::isfinite(det)) {
            weights_(a, a) = 1.0;
            ++fallback_points_;
            continue;
        }
        for (Eigen::Index i = 0; i < m; ++i) weights_(a, i) = kernel(i) * (s2 - s1 * offset(i)) / det;
    }
}

Vector LocalLinearSmoother::apply(const Eigen::Ref<const Vector>& curve) const {
    if (curve.size() != weights_.cols()) throw DimensionError("smoother: curve length does not match grid");
    return weights_ * curve;
}

Matrix LocalLinearSmoother::apply_rows(const Matrix& curves) const {
    if (curves.cols() != weights_.cols()) throw DimensionError("smoother: curve length does not match grid");
    return curves * weights_.transpose();
}

double default_presmooth_bandwidth(const Grid& grid) { return 5.0 * grid.spacing(); }

PresmoothResult presmooth(const FunctionalDataset& data, double bandwidth) {
    const LocalLinearSmoother smoother(data.grid(), bandwidth);
    return {data.with_curves(smoother.apply_rows(data.curves())), smoother.fallback_points()};
}

Vector pooled_mean(const Matrix& curves) { return curves.colwise().mean().transpose(); }

CenteredData center_by_group(const FunctionalDataset& data) {
    const auto k_groups = static_cast<Eigen::Index>(data.num_groups());
    Matrix means = Matrix::Zero(k_groups, data.curves().cols());
    std::vector<double> counts(data.num_groups(), 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(data.labels()[i]);
        means.row(k) += data.curves().row(static_cast<Eigen::Index>(i));
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    for (Eigen::Index k = 0; k < k_groups; ++k) means.row(k) /= counts[static_cast<std::size_t>(k)];
    Matrix centered = data.curves();
    for (std::size_t i = 0; i < data.size(); ++i) {
        centered.row(static_cast<Eigen::Index>(i)) -= means.row(static_cast<Eigen::Index>(data.labels()[i]));
    }
    return {data.with_curves(std::move(centered)), std::move(means)};
}

}  // namespace fbc
