#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace kroneig {

/// Standard normal CDF via erfc.
double normal_cdf(double z);

/// Per-entry posterior probability that the activation is positive:
/// Phi(mean / sqrt(variance)); step(mean) where the variance is zero, and
/// 0.5 where mean and variance are both zero. Throws PreconditionError on a
/// negative variance, DimensionError on a shape mismatch.
Eigen::MatrixXd positivity(const Eigen::MatrixXd& mean, const Eigen::MatrixXd& variance);

enum class ThresholdScope { Global, PerTimeSlice };

/// Boolean mask (as 0/1 matrix) selecting the ceil(fraction * N) entries of
/// largest |mean|; ties go to the lower column-major linear index. With
/// PerTimeSlice the selection is made independently in every column.
Eigen::MatrixXd threshold_top_fraction(const Eigen::MatrixXd& mean, double fraction,
                                       ThresholdScope scope = ThresholdScope::Global);

/// Number of entries threshold_top_fraction() keeps out of `n`.
Eigen::Index top_fraction_count(Eigen::Index n, double fraction);

enum class Polarity { Signed, Absolute };

struct Peak {
    double latency = 0.0;
    double amplitude = 0.0;  // signed value, or |value| for Absolute
    Eigen::Index index = 0;
};

/// Largest sample (per polarity) with t_a <= t <= t_b; first one wins ties.
Peak peak_extract(std::span<const double> series, std::span<const double> times, double t_a, double t_b,
                  Polarity polarity = Polarity::Signed);

struct GrandAverage {
    Eigen::VectorXd mean;
    Eigen::VectorXd sem;  // sample standard deviation / sqrt(N)
};

/// Pointwise mean and standard error across subjects. When `reference_peaks`
/// is given, subject k's series is first divided by reference_peaks[k].
GrandAverage grand_average(const std::vector<Eigen::VectorXd>& series,
                           std::optional<std::span<const double>> reference_peaks = std::nullopt);

}  // namespace kroneig
