#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace kroneig {

/// Rows are unit 3-vectors on the sphere.
using PointSet = Eigen::MatrixX3d;

/// Linear forward model B = G J + E over n_m sources, n_n sensors and n_t
/// time points. Amplitudes are unitless reals; time is in seconds.
///
/// After temporal whitening the data matrix has r_t <= n_t columns and
/// `temporal_transform` holds the r_t x n_t operator W_t so that the
/// observation model is vec(B) = (W_t (x) G) vec(J) + vec(E).
struct ForwardProblem {
    Eigen::MatrixXd lead_field;         // G, n_n x n_m
    Eigen::MatrixXd sensor_data;        // B, n_n x n_t
    Eigen::MatrixXd noise_cov_spatial;  // Sigma_x, n_n x n_n
    std::optional<Eigen::MatrixXd> noise_cov_temporal;  // Sigma_t, n_t x n_t
    PointSet source_points;             // n_m x 3
    Eigen::VectorXd time_points;        // n_t, strictly increasing
    bool whitened = false;
    std::optional<Eigen::MatrixXd> temporal_transform;  // W_t, r_t x n_t

    [[nodiscard]] Eigen::Index n_sensors() const { return lead_field.rows(); }
    [[nodiscard]] Eigen::Index n_sources() const { return lead_field.cols(); }
    [[nodiscard]] Eigen::Index n_times() const { return time_points.size(); }
    /// Number of data columns: n_t, or r_t once temporally whitened.
    [[nodiscard]] Eigen::Index n_data_columns() const { return sensor_data.cols(); }
};

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kUnitNormTolerance = 1e-9;

/// Every invariant violation of `problem`, one human-readable line each.
/// Empty means the problem is well formed.
std::vector<std::string> validate(const ForwardProblem& problem);

/// Throws DimensionError listing the violations when validate() is non-empty.
void require_valid(const ForwardProblem& problem);

}  // namespace kroneig
