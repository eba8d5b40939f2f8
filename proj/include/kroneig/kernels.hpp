#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "kroneig/model.hpp"

namespace kroneig {

enum class KernelKind {
    Delta,
    Exponential,
    Matern32,
    RBF,
    RationalQuadratic,
    Harmony,
    Spline,
    TemporalDelta,
    TemporalExponential,
    Product,
};

enum class Metric { Chordal, Geodesic };

std::string_view to_string(KernelKind kind);
std::string_view to_string(Metric metric);
/// Accepts canonical names plus the short aliases MNE, EXP, MAT, RQ, HRM, SPL.
KernelKind parse_kernel_kind(std::string_view name);
Metric parse_metric(std::string_view name);

[[nodiscard]] bool is_spatial(KernelKind kind);
[[nodiscard]] bool is_temporal(KernelKind kind);
[[nodiscard]] bool has_length_scale(KernelKind kind);

/// Tagged covariance function description. Only the fields relevant to
/// `kind` are read. Temporal kinds have unit variance; the magnitude
/// gamma2 lives on the spatial kernel, or once on a Product.
struct KernelSpec {
    KernelKind kind = KernelKind::Delta;
    double gamma2 = 1.0;
    std::optional<double> length_scale;
    double alpha = 1.5;       // RationalQuadratic decay
    double spectral_p = 0.9;  // Harmony spectral weight
    int l_max = 10;           // Harmony cutoff, n_b = (l_max + 1)^2
    double spline_h = 0.8;    // Abel-Poisson scale
    int spline_level = 2;     // icosphere level of spline centres, n_b = 10 * 4^level + 2
    Metric metric = Metric::Chordal;
    std::shared_ptr<const KernelSpec> spatial_factor;   // Product only
    std::shared_ptr<const KernelSpec> temporal_factor;  // Product only

    static KernelSpec delta(double gamma2);
    static KernelSpec exponential(double gamma2, double length_scale, Metric metric = Metric::Chordal);
    static KernelSpec matern32(double gamma2, double length_scale, Metric metric = Metric::Chordal);
    static KernelSpec rbf(double gamma2, double length_scale);
    static KernelSpec rational_quadratic(double gamma2, double length_scale, double alpha = 1.5);
    static KernelSpec harmony(double gamma2, int l_max = 10, double spectral_p = 0.9);
    static KernelSpec spline(double gamma2, double h = 0.8, int level = 2);
    static KernelSpec temporal_delta();
    static KernelSpec temporal_exponential(double length_scale);
    /// gamma2 is carried by the product; both factors must have unit magnitude.
    static KernelSpec product(double gamma2, KernelSpec spatial, KernelSpec temporal);
};

/// Throws ConfigError when a parameter is missing or out of range for the kind.
void validate(const KernelSpec& spec);

/// Copy of `spec` with its magnitude replaced.
KernelSpec with_gamma2(KernelSpec spec, double gamma2);

/// Spatial and temporal halves of a separable kernel, with the magnitude on
/// the spatial half.
struct SeparableKernel {
    KernelSpec spatial;
    KernelSpec temporal;

    [[nodiscard]] double gamma2() const { return spatial.gamma2; }
};

SeparableKernel make_separable(const KernelSpec& spatial, const KernelSpec& temporal);
SeparableKernel make_separable(const KernelSpec& product);

double eval_spatial(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y);
double eval_harmony(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y);
double eval_spline(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y);
double eval_temporal(const KernelSpec& spec, double t, double s);
/// kappa_x(x, y) * kappa_t(t, s) for a Product spec.
double eval_product(const KernelSpec& spec, const Eigen::Vector3d& x, double t, const Eigen::Vector3d& y, double s);

/// Symmetric n x n matrix of kernel values; both triangles come from the
/// same evaluation so the result is exactly symmetric. No jitter is added.
Eigen::MatrixXd gram_spatial(const KernelSpec& spec, const PointSet& points);
Eigen::MatrixXd gram_temporal(const KernelSpec& spec, const Eigen::VectorXd& times);

/// Kernel values against every point; equals the matching gram row bit for
/// bit when the query is one of the points.
Eigen::VectorXd cross_spatial(const KernelSpec& spec, const Eigen::Vector3d& query, const PointSet& points);
Eigen::VectorXd cross_temporal(const KernelSpec& spec, double query, const Eigen::VectorXd& times);

/// K + eps I with eps = 1e-10 * trace(K) / n, for callers that factorize K itself.
Eigen::MatrixXd add_jitter(const Eigen::MatrixXd& k);

/// Number of basis functions of a degenerate kernel (Harmony, Spline); 0 otherwise.
Eigen::Index basis_size(const KernelSpec& spec);

}  // namespace kroneig
