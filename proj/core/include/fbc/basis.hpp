#pragma once

#include "fbc/fd.hpp"

#include <vector>

namespace fbc {

enum class BasisKind { PC, PLS };

/// J projection functions on a grid, with the metadata needed to project new curves.
///
/// For PC, `functions` holds L2-orthonormal eigenfunctions of the pooled
/// covariance and `eigenvalues` their eigenvalues (descending). For PLS,
/// `functions` holds the weight functions w_j, `loadings` the loading
/// functions P_j and `dcoef` the response coefficients; new curves are
/// projected by replaying the deflation sequence.
struct BasisSystem {
    BasisKind kind = BasisKind::PC;
    Grid grid;
    Vector mean;        ///< pooled training mean subtracted before projection
    Matrix functions;   ///< J x m
    Vector eigenvalues; ///< PC only
    Matrix loadings;    ///< PLS only, J x m
    Vector dcoef;       ///< PLS only
    double response_mean = 0.0; ///< PLS only
    /// PLS stopped before the requested J because the covariance direction vanished.
    bool truncated = false;

    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(functions.rows()); }
    /// First `j` components. Projections with the truncated basis equal the
    /// first `j` columns of projections with the full one.
    [[nodiscard]] BasisSystem truncate(std::size_t j) const;
};

/// Top-J eigenfunctions of the pooled sample covariance (curves centred at the pooled mean).
BasisSystem fpca(const FunctionalDataset& data, std::size_t J);
BasisSystem fpca(const Grid& grid, const Matrix& curves, std::size_t J);

struct FplsDecomposition {
    BasisSystem basis;
    Matrix scores;    ///< n x J training scores S_j
    Matrix residuals; ///< n x m residual curves E_i
};

/// Functional PLS by iterative deflation against the (centred) integer labels.
BasisSystem fpls(const FunctionalDataset& data, std::size_t J);
FplsDecomposition fpls_decompose(const FunctionalDataset& data, std::size_t J);

/// n x J score matrix of `curves` (rows) against `basis`.
Matrix project(const Matrix& curves, const Grid& grid, const BasisSystem& basis);
Matrix project(const FunctionalDataset& data, const BasisSystem& basis);

/// Separate FPCA of each group's curves.
std::vector<BasisSystem> group_eigenstructure(const FunctionalDataset& data, std::size_t J);

/// Flips each row so its largest-magnitude entry is positive (earliest index wins ties).
void normalize_signs(Matrix& functions);

}  // namespace fbc
