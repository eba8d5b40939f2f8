#include "kroneig/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "kroneig/error.hpp"
#include "kroneig/matrix_file.hpp"
#include "kroneig/sphere.hpp"
#include "kroneig/summarize.hpp"

namespace kroneig {
namespace {

// Independent streams per generator so changing one stage never shifts another.
enum class Stream : std::uint64_t { LeadField = 1, Patches = 2, Noise = 3 };

std::mt19937_64 rng_for(std::uint64_t seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::Vector3d v;
    do {
        v = {n01(rng), n01(rng), n01(rng)};
    } while (v.norm() < 1e-8);
    return v.normalized();
}

}  // namespace

double SimConfig::effective_patch_radius() const {
    if (patch_radius > 0.0) return patch_radius;
    // Solid angle of one patch, then the cap radius with that solid angle.
    const double omega = patch_area_cm2 / (static_cast<double>(patch_count) * cortex_radius_cm * cortex_radius_cm);
    return std::acos(1.0 - omega / (2.0 * std::numbers::pi));
}

void validate(const SimConfig& c) {
    if (c.n_sensors <= 0 || c.n_sources < 4 || c.n_times <= 0) throw ConfigError("simulation dimensions must be positive, n_sources >= 4");
    if (c.n_sensors >= c.n_sources) throw ConfigError("simulation must be underdetermined (n_sensors < n_sources)");
    if (!(c.sample_interval > 0.0)) throw ConfigError("sample_interval must be > 0");
    if (c.patch_count < 1) throw ConfigError("patch_count must be >= 1");
    if (c.patch_radius < 0.0 || !(c.patch_area_cm2 > 0.0) || !(c.cortex_radius_cm > 0.0)) {
        throw ConfigError("patch size parameters must be positive");
    }
    const double r = c.effective_patch_radius();
    if (!(r > 0.0 && r < std::numbers::pi / 2.0)) throw ConfigError("patch radius must lie in (0, pi/2)");
    if (!(c.bump_width > 0.0)) throw ConfigError("bump_width must be > 0");
    if (!(c.sensor_radius > 1.0)) throw ConfigError("sensor_radius must exceed the source sphere radius 1");
    if (!(c.lead_field_falloff > 0.0)) throw ConfigError("lead_field_falloff must be > 0");
    if (c.noise.kind == NoiseKind::RandomSpd && !(c.noise.condition_number >= 1.0)) {
        throw ConfigError("noise condition_number must be >= 1");
    }
    if (c.noise.kind == NoiseKind::File && c.noise.path.empty()) throw ConfigError("noise file path missing");
    if (!(c.snr > 0.0) || !std::isfinite(c.snr)) throw ConfigError("snr must be finite and > 0");
}

PointSet make_mesh(Eigen::Index n, std::uint64_t /*seed*/) {
    if (n < 4) throw PreconditionError("mesh needs at least 4 points");
    PointSet p(n, 3);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden_angle * static_cast<double>(i);
        p.row(i) = Eigen::RowVector3d(r * std::cos(phi), r * std::sin(phi), z).normalized();
    }
    return p;
}

Eigen::MatrixXd make_lead_field(Eigen::Index n_sensors, const PointSet& mesh, std::uint64_t seed, double sensor_radius,
                                double falloff) {
    if (n_sensors < 4) throw PreconditionError("lead field needs at least 4 sensors");
    if (n_sensors >= mesh.rows()) throw PreconditionError("lead field must be underdetermined (n_sensors < n_sources)");
    auto rng = rng_for(seed, Stream::LeadField);
    std::uniform_real_distribution<double> gain_dist(0.5, 1.5);
    const PointSet sensors = make_mesh(n_sensors) * sensor_radius;
    Eigen::MatrixXd g(n_sensors, mesh.rows());
    for (Eigen::Index k = 0; k < n_sensors; ++k) {
        const double gain = gain_dist(rng);
        for (Eigen::Index j = 0; j < mesh.rows(); ++j) {
            g(k, j) = gain * std::exp(-(sensors.row(k) - mesh.row(j)).norm() / falloff);
        }
    }
    return g;
}

Patches make_patches(const SimConfig& config) {
    auto rng = rng_for(config.seed, Stream::Patches);
    Patches p;
    p.centres.resize(config.patch_count, 3);
    p.signs.resize(config.patch_count);
    for (int k = 0; k < config.patch_count; ++k) {
        // Patches come in antipodal pairs on opposite hemispheres with opposite signs.
        const Eigen::Vector3d c = k % 2 == 0 ? random_unit(rng) : Eigen::Vector3d(-p.centres.row(k - 1).transpose());
        p.centres.row(k) = c.transpose();
        p.signs[k] = k % 2 == 0 ? 1.0 : -1.0;
    }
    return p;
}

Eigen::MatrixXd make_sources(const SimConfig& config, const PointSet& mesh, const Eigen::VectorXd& times) {
    validate(config);
    const Patches patches = make_patches(config);
    const double r = config.effective_patch_radius();
    Eigen::VectorXd spatial = Eigen::VectorXd::Zero(mesh.rows());
    for (Eigen::Index j = 0; j < mesh.rows(); ++j) {
        for (Eigen::Index k = 0; k < patches.centres.rows(); ++k) {
            const double d = sphere::geodesic_distance(mesh.row(j).transpose(), patches.centres.row(k).transpose());
            if (d <= r) spatial[j] += patches.signs[k] * std::exp(-d * d / (2.0 * r * r));
        }
    }
    Eigen::VectorXd temporal(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) {
        const double z = (times[i] - config.bump_center) / config.bump_width;
        temporal[i] = std::exp(-0.5 * z * z);
    }
    return config.amplitude * spatial * temporal.transpose();
}

NoiseDraw make_noise(const SimConfig& config, Eigen::Index n_sensors, Eigen::Index n_times, std::uint64_t seed) {
    NoiseDraw out;
    const Eigen::Index n = n_sensors;
    auto rng = rng_for(seed, Stream::Noise);
    std::normal_distribution<double> n01;

    switch (config.noise.kind) {
        case NoiseKind::None:
            out.covariance = Eigen::MatrixXd::Identity(n, n);
            out.noise = Eigen::MatrixXd::Zero(n, n_times);
            return out;
        case NoiseKind::Identity:
            out.covariance = Eigen::MatrixXd::Identity(n, n);
            break;
        case NoiseKind::File:
            out.covariance = read_matrix(config.noise.path);
            if (out.covariance.rows() != n || out.covariance.cols() != n) {
                throw DimensionError("noise covariance file has the wrong shape");
            }
            break;
        case NoiseKind::RandomSpd: {
            const double kappa = config.noise.condition_number;
            if (kappa == 1.0) {
                out.covariance = Eigen::MatrixXd::Identity(n, n);
                break;
            }
            Eigen::MatrixXd z(n, n);
            for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = n01(rng);
            const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ();
            // Log-uniform spectrum pinned at 1 and 1/kappa so the condition number is exact.
            std::uniform_real_distribution<double> u01;
            Eigen::VectorXd d(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double e = i == 0 ? 0.0 : (i == n - 1 ? 1.0 : u01(rng));
                d[i] = std::pow(kappa, -e);
            }
            const Eigen::MatrixXd s = q * d.asDiagonal() * q.transpose();
            out.covariance = 0.5 * (s + s.transpose());
            break;
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(out.covariance);
    if (llt.info() != Eigen::Success) throw NumericalError("noise covariance is not positive definite");
    Eigen::MatrixXd w(n, n_times);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n01(rng);
    out.noise = llt.matrixL() * w;
    return out;
}

Simulation simulate(const SimConfig& config) {
    validate(config);
    Simulation sim;
    ForwardProblem& p = sim.problem;
    p.source_points = make_mesh(config.n_sources, config.seed);
    p.lead_field =
        make_lead_field(config.n_sensors, p.source_points, config.seed, config.sensor_radius, config.lead_field_falloff);
    p.time_points = Eigen::VectorXd::LinSpaced(config.n_times, 0.0, config.sample_interval * static_cast<double>(config.n_times - 1));
    if (config.n_times == 1) p.time_points.setZero();
    sim.truth = make_sources(config, p.source_points, p.time_points);

    const Eigen::MatrixXd signal = p.lead_field * sim.truth;
    NoiseDraw noise = make_noise(config, config.n_sensors, config.n_times, config.seed);
    const double signal_norm = signal.norm();
    const double noise_norm = noise.noise.norm();
    double c = 1.0;
    if (signal_norm > 0.0 && noise_norm > 0.0) c = signal_norm / (config.snr * noise_norm);
    p.sensor_data = signal + c * noise.noise;
    p.noise_cov_spatial = (c * c) * noise.covariance;
    p.whitened = false;
    return sim;
}

Score score(const Eigen::MatrixXd& reconstruction, const Eigen::MatrixXd& truth, double fraction) {
    if (reconstruction.rows() != truth.rows() || reconstruction.cols() != truth.cols()) {
        throw DimensionError("score: reconstruction and truth shapes differ");
    }
    const Eigen::MatrixXd top = threshold_top_fraction(reconstruction, fraction);
    Eigen::Index n_top = 0;
    Eigen::Index n_overlap = 0;
    Eigen::Index n_support = 0;
    Eigen::Index n_sign = 0;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
        const bool in_support = truth.data()[i] != 0.0;
        const bool selected = top.data()[i] != 0.0;
        n_top += selected ? 1 : 0;
        if (in_support) {
            ++n_support;
            const double e = reconstruction.data()[i] - truth.data()[i];
            sq += e * e;
        }
        if (in_support && selected) {
            ++n_overlap;
            if ((reconstruction.data()[i] > 0.0) == (truth.data()[i] > 0.0) && reconstruction.data()[i] != 0.0) ++n_sign;
        }
    }
    Score s;
    s.overlap = n_top > 0 ? static_cast<double>(n_overlap) / static_cast<double>(n_top) : 0.0;
    s.rmse = n_support > 0 ? std::sqrt(sq / static_cast<double>(n_support)) : 0.0;
    s.sign_agreement = n_overlap > 0 ? static_cast<double>(n_sign) / static_cast<double>(n_overlap) : 0.0;
    s.support_fraction = truth.size() > 0 ? static_cast<double>(n_support) / static_cast<double>(truth.size()) : 0.0;
    return s;
}

}  // namespace kroneig
