#pragma once

// Independent reference computations shared by the unit tests and the acceptance runner.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_logpdf(double z) { return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi); }

inline double mvn_logpdf(const Eigen::VectorXd& z, const Eigen::MatrixXd& R) {
    const Eigen::LLT<Eigen::MatrixXd> llt(R);
    const Eigen::VectorXd y = llt.matrixL().solve(z);
    const Eigen::MatrixXd L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    return -0.5 * y.squaredNorm() - 0.5 * log_det - 0.5 * static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi);
}

// Gaussian copula density as a ratio of the joint normal density to the product of its margins.
inline double gaussian_copula_ratio(const Eigen::VectorXd& z, const Eigen::MatrixXd& R) {
    double margins = 0.0;
    for (Eigen::Index j = 0; j < z.size(); ++j) margins += normal_logpdf(z(j));
    return mvn_logpdf(z, R) - margins;
}

// Tau-a with ties counted as neither concordant nor discordant.
inline double kendall_brute(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    long long s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double a = x[i] - x[k];
            const double b = y[i] - y[k];
            s += ((a > 0) - (a < 0)) * ((b > 0) - (b < 0));
        }
    }
    return static_cast<double>(s) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

inline double trapezoid(const std::vector<double>& f, double h) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) s += 0.5 * (f[i] + f[i + 1]) * h;
    return s;
}

// Random correlation matrix from a Gram matrix of random directions; larger `extra` gives better conditioning.
template <class Rng>
Eigen::MatrixXd random_correlation(int dim, Rng& next_normal, int extra = 2) {
    Eigen::MatrixXd a(dim, dim + extra);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim + extra; ++j) a(i, j) = next_normal();
    Eigen::MatrixXd c = a * a.transpose();
    const Eigen::VectorXd d = c.diagonal().array().rsqrt();
    return d.asDiagonal() * c * d.asDiagonal();
}

}  // namespace oracle
