#include "fbc/density.hpp"

#include "fbc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace fbc {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double p) {
    // Type-7 quantile (linear interpolation between order statistics).
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double robust_scale(std::span<const double> sample) {
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = sample_sd(sample);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    return iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
}

// psi_r = n^-2 g^-(r+1) sum_i sum_j phi^(r)((x_i - x_j) / g), diagonal included.
double psi_functional(std::span<const double> x, int order, double g) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const auto hermite = [order](double u) {
        const double u2 = u * u;
        if (order == 4) return (u2 * u2 - 6.0 * u2 + 3.0);
        return ((u2 - 15.0) * u2 + 45.0) * u2 - 15.0;  // order 6
    };
    const std::size_t n = x.size();
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double u = (x[i] - x[j]) / g;
            off += hermite(u) * std::exp(-0.5 * u * u);
        }
    }
    const double total = (2.0 * off + static_cast<double>(n) * hermite(0.0)) * inv_sqrt_2pi;
    return total / (static_cast<double>(n) * static_cast<double>(n) * std::pow(g, order + 1));
}

}  // namespace

double sample_sd(std::span<const double> sample) {
    const auto n = static_cast<double>(sample.size());
    if (sample.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : sample) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / (n - 1.0));
}

double silverman_bandwidth(std::span<const double> sample) {
    if (sample.size() < 2) throw ParameterError("silverman_bandwidth: need at least two values");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double sd = sample_sd(sample);
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    if (!(spread > 0.0)) throw NumericalError("silverman_bandwidth: degenerate (zero-variance) score dimension");
    return 0.9 * spread * std::pow(static_cast<double>(sample.size()), -0.2);
}

Bandwidth plugin_bandwidth(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 2 || !(sample_sd(sample) > 0.0)) {
        throw NumericalError("plugin_bandwidth: degenerate (zero-variance) score dimension");
    }
    if (n < 5) return {silverman_bandwidth(sample), BandwidthRule::Silverman};

    const double scale = robust_scale(sample);
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (sample[i] - mean) / scale;

    const double nn = static_cast<double>(n);
    // Stage 1: pilot for psi6 from the normal-reference psi8.
    const double g6 = std::pow(2.0 * std::pow(std::numbers::sqrt2, 9) / (7.0 * nn), 1.0 / 9.0);
    const double psi6 = psi_functional(z, 6, g6);
    // Stage 2: pilot for psi4 from the estimated psi6.
    const double g4_base = -3.0 * std::sqrt(2.0 / std::numbers::pi) / (psi6 * nn);
    if (!(psi6 < 0.0) || !(g4_base > 0.0)) return {silverman_bandwidth(sample), BandwidthRule::Silverman};
    const double psi4 = psi_functional(z, 4, std::pow(g4_base, 1.0 / 7.0));
    if (!(psi4 > 0.0) || !std::isfinite(psi4)) return {silverman_bandwidth(sample), BandwidthRule::Silverman};

    const double r_k = 1.0 / (2.0 * std::sqrt(std::numbers::pi));  // roughness of the Gaussian kernel
    const double h = scale * std::pow(r_k / (psi4 * nn), 0.2);
    if (!(h > 0.0) || !std::isfinite(h)) return {silverman_bandwidth(sample), BandwidthRule::Silverman};
    return {h, BandwidthRule::PluginSJ};
}

MarginalEstimate::MarginalEstimate(std::vector<double> sample) : sample_(std::move(sample)) {
    if (sample_.size() < 2) throw ParameterError("MarginalEstimate: sample needs at least 2 values");
    const Bandwidth bw = plugin_bandwidth(sample_);
    bandwidth_ = bw.value;
    rule_ = bw.rule;
    validate();
}

MarginalEstimate::MarginalEstimate(std::vector<double> sample, double bandwidth, BandwidthRule rule)
    : sample_(std::move(sample)), bandwidth_(bandwidth), rule_(rule) {
    validate();
}

void MarginalEstimate::validate() {
    if (sample_.size() < 2) throw ParameterError("MarginalEstimate: sample needs at least 2 values");
    for (double v : sample_) {
        if (!std::isfinite(v)) throw DataError("MarginalEstimate: non-finite sample value");
    }
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_)) throw ParameterError("MarginalEstimate: bandwidth must be positive");
    std::sort(sample_.begin(), sample_.end());
    sd_ = sample_sd(sample_);
    if (!(sd_ > 0.0)) throw NumericalError("MarginalEstimate: degenerate (zero-variance) sample");
}

double MarginalEstimate::log_density(double x) const {
    // log-sum-exp over kernels, anchored at the nearest sample point.
    const auto it = std::lower_bound(sample_.begin(), sample_.end(), x);
    double nearest = std::numeric_limits<double>::infinity();
    if (it != sample_.end()) nearest = std::abs(*it - x);
    if (it != sample_.begin()) nearest = std::min(nearest, std::abs(*std::prev(it) - x));
    const double inv_h = 1.0 / bandwidth_;
    const double anchor = -0.5 * (nearest * inv_h) * (nearest * inv_h);
    double acc = 0.0;
    for (double s : sample_) {
        const double u = (x - s) * inv_h;
        acc += std::exp(-0.5 * u * u - anchor);
    }
    const double log_norm = std::log(static_cast<double>(sample_.size()) * bandwidth_) +
                            0.5 * std::log(2.0 * std::numbers::pi);
    const double value = anchor + std::log(acc) - log_norm;
    return std::isfinite(value) ? std::max(value, kLogDensityFloor) : kLogDensityFloor;
}

std::size_t MarginalEstimate::count_le(double x) const {
    return static_cast<std::size_t>(std::upper_bound(sample_.begin(), sample_.end(), x) - sample_.begin());
}

double kde_logdensity(const MarginalEstimate& est, double x) { return est.log_density(x); }

double ecdf(std::span<const double> sample, double x) {
    if (sample.empty()) throw ParameterError("ecdf: empty sample");
    std::size_t count = 0;
    for (double v : sample) count += (v <= x) ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(sample.size() + 1);
}

double clamp_pseudo_obs(double u, std::size_t n) {
    const double edge = 1.0 / (2.0 * static_cast<double>(n + 1));
    return std::clamp(u, edge, 1.0 - edge);
}

}  // namespace fbc
