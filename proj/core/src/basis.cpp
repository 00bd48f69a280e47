#include "fbc/basis.hpp"

#include "fbc/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>
#include <string>

namespace fbc {

BasisSystem BasisSystem::truncate(std::size_t j) const {
    if (j > size()) throw ParameterError("cannot truncate a basis of size " + std::to_string(size()) + " to " + std::to_string(j));
    BasisSystem out = *this;
    const auto jj = static_cast<Eigen::Index>(j);
    out.functions = functions.topRows(jj);
    if (eigenvalues.size() > 0) out.eigenvalues = eigenvalues.head(jj);
    if (loadings.rows() > 0) out.loadings = loadings.topRows(jj);
    if (dcoef.size() > 0) out.dcoef = dcoef.head(jj);
    return out;
}

void normalize_signs(Matrix& functions) {
    for (Eigen::Index j = 0; j < functions.rows(); ++j) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index i = 0; i < functions.cols(); ++i) {
            const double a = std::abs(functions(j, i));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        if (functions(j, best) < 0.0) functions.row(j) *= -1.0;
    }
}

BasisSystem fpca(const Grid& grid, const Matrix& curves, std::size_t J) {
    const auto n = static_cast<std::size_t>(curves.rows());
    const std::size_t m = grid.size();
    if (static_cast<std::size_t>(curves.cols()) != m) throw DimensionError("fpca: curves do not match the grid");
    if (J == 0 || n < 2 || J > std::min(n - 1, m)) {
        throw ParameterError("fpca: J=" + std::to_string(J) + " must lie in 1..min(n-1, m) = " +
                             std::to_string(n < 2 ? 0 : std::min(n - 1, m)));
    }
    Vector mean = pooled_mean(curves);
    const Matrix centered = curves.rowwise() - mean.transpose();
    const Vector sqrt_w = grid.weights().array().sqrt();
    // Ramsay-Silverman discretisation: eigen-decompose W^{1/2} C W^{1/2}.
    const Matrix scaled = centered * sqrt_w.asDiagonal();
    const Matrix op = (scaled.transpose() * scaled) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(op);
    if (solver.info() != Eigen::Success || !solver.eigenvalues().allFinite()) {
        std::ostringstream msg;
        msg << "fpca: eigen-decomposition failed (trace " << op.trace() << ", max |entry| "
            << op.cwiseAbs().maxCoeff() << ")";
        throw NumericalError(msg.str());
    }
    BasisSystem basis{.kind = BasisKind::PC, .grid = grid, .mean = std::move(mean)};
    basis.functions.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(m));
    basis.eigenvalues.resize(static_cast<Eigen::Index>(J));
    const auto top = static_cast<Eigen::Index>(m) - 1;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(J); ++j) {
        basis.eigenvalues(j) = std::max(0.0, solver.eigenvalues()(top - j));
        basis.functions.row(j) = solver.eigenvectors().col(top - j).cwiseQuotient(sqrt_w).transpose();
    }
    normalize_signs(basis.functions);
    return basis;
}

BasisSystem fpca(const FunctionalDataset& data, std::size_t J) { return fpca(data.grid(), data.curves(), J); }

FplsDecomposition fpls_decompose(const FunctionalDataset& data, std::size_t J) {
    const Grid& grid = data.grid();
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto m = static_cast<Eigen::Index>(grid.size());
    if (J == 0 || J > static_cast<std::size_t>(n - 1)) {
        throw ParameterError("fpls: J=" + std::to_string(J) + " must lie in 1..n-1 = " + std::to_string(n - 1));
    }
    Vector mean = pooled_mean(data.curves());
    Matrix x = data.curves().rowwise() - mean.transpose();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = static_cast<double>(data.labels()[static_cast<std::size_t>(i)]);
    const double y_mean = y.mean();
    y.array() -= y_mean;

    const Vector& w = grid.weights();
    const double scale = std::sqrt(x.squaredNorm() * y.squaredNorm()) + 1e-300;

    BasisSystem basis{.kind = BasisKind::PLS, .grid = grid, .mean = std::move(mean), .response_mean = y_mean};
    std::vector<Vector> weights, loadings, scores;
    std::vector<double> dcoef;
    for (std::size_t j = 0; j < J; ++j) {
        Vector direction = x.transpose() * y;  // sum_i Y_i X_i(t)
        const double norm = std::sqrt((direction.array().square() * w.array()).sum());
        if (!(norm > 1e-12 * scale)) {
            basis.truncated = true;
            break;
        }
        direction /= norm;
        Vector s = x * w.cwiseProduct(direction);  // <X_i^{j-1}, w_j>
        const double ss = s.squaredNorm();
        if (!(ss > 0.0)) {
            basis.truncated = true;
            break;
        }
        Vector p = x.transpose() * s / ss;
        const double d = s.dot(y) / ss;
        x -= s * p.transpose();
        y -= d * s;
        weights.push_back(std::move(direction));
        loadings.push_back(std::move(p));
        scores.push_back(std::move(s));
        dcoef.push_back(d);
    }
    const auto found = static_cast<Eigen::Index>(weights.size());
    basis.functions.resize(found, m);
    basis.loadings.resize(found, m);
    basis.dcoef.resize(found);
    Matrix s_mat(n, found);
    for (Eigen::Index j = 0; j < found; ++j) {
        basis.functions.row(j) = weights[static_cast<std::size_t>(j)].transpose();
        basis.loadings.row(j) = loadings[static_cast<std::size_t>(j)].transpose();
        basis.dcoef(j) = dcoef[static_cast<std::size_t>(j)];
        s_mat.col(j) = scores[static_cast<std::size_t>(j)];
    }
    return {std::move(basis), std::move(s_mat), std::move(x)};
}

BasisSystem fpls(const FunctionalDataset& data, std::size_t J) { return fpls_decompose(data, J).basis; }

Matrix project(const Matrix& curves, const Grid& grid, const BasisSystem& basis) {
    if (!grid.matches(basis.grid) || curves.cols() != basis.functions.cols()) {
        throw DimensionError("project: curves are not on the basis grid (" + std::to_string(curves.cols()) + " vs " +
                             std::to_string(basis.functions.cols()) + " points)");
    }
    const Vector& w = grid.weights();
    Matrix x = curves.rowwise() - basis.mean.transpose();
    if (basis.kind == BasisKind::PC) {
        return x * (basis.functions * w.asDiagonal()).transpose();
    }
    const auto J = basis.functions.rows();
    Matrix scores(curves.rows(), J);
    for (Eigen::Index j = 0; j < J; ++j) {
        const Vector s = x * w.cwiseProduct(basis.functions.row(j).transpose());
        x -= s * basis.loadings.row(j);
        scores.col(j) = s;
    }
    return scores;
}

Matrix project(const FunctionalDataset& data, const BasisSystem& basis) {
    return project(data.curves(), data.grid(), basis);
}

std::vector<BasisSystem> group_eigenstructure(const FunctionalDataset& data, std::size_t J) {
    std::vector<BasisSystem> out;
    out.reserve(data.num_groups());
    for (std::size_t k = 0; k < data.num_groups(); ++k) {
        const auto rows = data.group_indices(static_cast<int>(k));
        if (rows.size() < 2 || J > rows.size() - 1) {
            throw ParameterError("group_eigenstructure: group " + std::to_string(k) + " has " +
                                 std::to_string(rows.size()) + " curves, too few for J=" + std::to_string(J));
        }
        Matrix sub(static_cast<Eigen::Index>(rows.size()), data.curves().cols());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            sub.row(static_cast<Eigen::Index>(r)) = data.curves().row(static_cast<Eigen::Index>(rows[r]));
        }
        out.push_back(fpca(data.grid(), sub, J));
    }
    return out;
}

}  // namespace fbc
