#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "kroneig/model.hpp"

namespace kroneig {

enum class NoiseKind { None, Identity, RandomSpd, File };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::RandomSpd;
    double condition_number = 100.0;  // RandomSpd only, >= 1
    std::string path;                 // File only: KRONMAT1 n_n x n_n covariance
};

/// Two-patch synthetic experiment. Defaults are desk-scale choices; the
/// patch size maps 9.2 cm^2 of cortex onto a sphere of radius 10 cm.
struct SimConfig {
    std::uint64_t seed = 1;
    Eigen::Index n_sensors = 50;
    Eigen::Index n_sources = 1000;
    Eigen::Index n_times = 200;
    double sample_interval = 0.005;  // seconds between time points, starting at 0

    int patch_count = 2;
    double patch_area_cm2 = 9.2;   // total over all patches
    double cortex_radius_cm = 10.0;
    double patch_radius = 0.0;     // angular radius in radians; 0 derives it from the area
    double amplitude = 40e-10;

    double bump_center = 0.5;  // seconds
    double bump_width = 0.05;  // seconds

    double sensor_radius = 1.2;
    double lead_field_falloff = 0.25;

    NoiseSpec noise;
    double snr = 1.0;  // ||G J||_F / ||E||_F

    /// Angular patch radius actually used.
    [[nodiscard]] double effective_patch_radius() const;
};

/// Throws ConfigError on out-of-range fields.
void validate(const SimConfig& config);

/// Fibonacci lattice of n points on the unit sphere (deterministic).
PointSet make_mesh(Eigen::Index n, std::uint64_t seed = 0);

/// Synthetic smooth gain: sensors on a Fibonacci lattice of radius
/// `sensor_radius`, G(k, j) = gain_k * exp(-|s_k - x_j| / falloff) with
/// gain_k uniform in [0.5, 1.5].
Eigen::MatrixXd make_lead_field(Eigen::Index n_sensors, const PointSet& mesh, std::uint64_t seed,
                                double sensor_radius = 1.2, double falloff = 0.25);

/// Patch centres (unit vectors) and signs used by make_sources().
struct Patches {
    PointSet centres;
    Eigen::VectorXd signs;
};
Patches make_patches(const SimConfig& config);

/// Ground truth J (n_m x n_t): truncated Gaussian patches times a temporal
/// Gaussian bump; zero outside every patch.
Eigen::MatrixXd make_sources(const SimConfig& config, const PointSet& mesh, const Eigen::VectorXd& times);

struct NoiseDraw {
    Eigen::MatrixXd noise;       // E, n_n x n_t, columns i.i.d. N(0, cov)
    Eigen::MatrixXd covariance;  // Sigma_x
};

/// Unit-scale noise; simulate() rescales it to the configured SNR.
NoiseDraw make_noise(const SimConfig& config, Eigen::Index n_sensors, Eigen::Index n_times, std::uint64_t seed);

struct Simulation {
    ForwardProblem problem;  // unwhitened, B = G J + E
    Eigen::MatrixXd truth;   // J
};

Simulation simulate(const SimConfig& config);

struct Score {
    double overlap = 0.0;          // |top(recon) & support(J)| / |top(recon)|
    double rmse = 0.0;             // over support(J)
    double sign_agreement = 0.0;   // over the overlap
    double support_fraction = 0.0; // |support(J)| / N, the random-guess overlap
};

Score score(const Eigen::MatrixXd& reconstruction, const Eigen::MatrixXd& truth, double fraction = 0.025);

}  // namespace kroneig
