#pragma once

#include <span>
#include <vector>

namespace fbc {

/// Log-densities are never reported below this value.
inline constexpr double kLogDensityFloor = -690.77552789821368;  // log(1e-300)

enum class BandwidthRule { PluginSJ, Silverman };

struct Bandwidth {
    double value = 0.0;
    /// Silverman when the sample was too small or the plug-in stage equations failed.
    BandwidthRule rule = BandwidthRule::PluginSJ;
};

/// Two-stage direct plug-in bandwidth for the Gaussian kernel (Sheather-Jones
/// style, normal-reference start). Throws NumericalError for a constant sample.
Bandwidth plugin_bandwidth(std::span<const double> sample);

/// 0.9 * min(sd, IQR/1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> sample);

/// Gaussian-kernel density estimate of one score dimension in one group.
class MarginalEstimate {
public:
    /// Bandwidth chosen by plugin_bandwidth().
    explicit MarginalEstimate(std::vector<double> sample);
    MarginalEstimate(std::vector<double> sample, double bandwidth, BandwidthRule rule = BandwidthRule::PluginSJ);

    [[nodiscard]] const std::vector<double>& sample() const noexcept { return sample_; }
    [[nodiscard]] double bandwidth() const noexcept { return bandwidth_; }
    [[nodiscard]] double sd() const noexcept { return sd_; }
    [[nodiscard]] BandwidthRule rule() const noexcept { return rule_; }

    [[nodiscard]] double log_density(double x) const;
    /// Number of sample values <= x.
    [[nodiscard]] std::size_t count_le(double x) const;

private:
    void validate();

    std::vector<double> sample_;  // sorted
    double bandwidth_ = 0.0;
    double sd_ = 0.0;
    BandwidthRule rule_ = BandwidthRule::PluginSJ;
};

double kde_logdensity(const MarginalEstimate& est, double x);

/// #{sample <= x} / (n + 1). `sample` need not be sorted.
double ecdf(std::span<const double> sample, double x);

/// Clamps a pseudo-observation into [1/(2(n+1)), 1 - 1/(2(n+1))].
double clamp_pseudo_obs(double u, std::size_t n);

/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> sample);

}  // namespace fbc
