#include "kroneig/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "kroneig/error.hpp"
#include "kroneig/sphere.hpp"

namespace kroneig {
namespace {

constexpr double kDeltaTolerance = 1e-12;
constexpr int kMaxHarmonicDegree = 60;

struct KindName {
    KernelKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 10> kKindNames = {{
    {KernelKind::Delta, "Delta"},
    {KernelKind::Exponential, "Exponential"},
    {KernelKind::Matern32, "Matern32"},
    {KernelKind::RBF, "RBF"},
    {KernelKind::RationalQuadratic, "RationalQuadratic"},
    {KernelKind::Harmony, "Harmony"},
    {KernelKind::Spline, "Spline"},
    {KernelKind::TemporalDelta, "TemporalDelta"},
    {KernelKind::TemporalExponential, "TemporalExponential"},
    {KernelKind::Product, "Product"},
}};

constexpr std::array<KindName, 6> kKindAliases = {{
    {KernelKind::Delta, "MNE"},
    {KernelKind::Exponential, "EXP"},
    {KernelKind::Matern32, "MAT"},
    {KernelKind::RationalQuadratic, "RQ"},
    {KernelKind::Harmony, "HRM"},
    {KernelKind::Spline, "SPL"},
}};

void require_unit_points(const PointSet& points) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (!(std::abs(points.row(i).norm() - 1.0) <= kUnitNormTolerance)) {
            throw PreconditionError("point " + std::to_string(i) + " is not on the unit sphere");
        }
    }
}

void require_unit(const Eigen::Vector3d& x) {
    if (!(std::abs(x.norm() - 1.0) <= kUnitNormTolerance)) throw PreconditionError("point is not on the unit sphere");
}

void require_spatial(const KernelSpec& spec) {
    if (!is_spatial(spec.kind)) {
        throw PreconditionError(std::string("expected a spatial kernel, got ") + std::string(to_string(spec.kind)));
    }
}

void require_temporal(const KernelSpec& spec) {
    if (!is_temporal(spec.kind)) {
        throw PreconditionError(std::string("expected a temporal kernel, got ") + std::string(to_string(spec.kind)));
    }
}

// Symmetric in its arguments bit for bit: (a-b)^2 == (b-a)^2 and the dot
// product sums products that commute.
double distance(Metric metric, const double* a, const double* b) {
    if (metric == Metric::Geodesic) {
        const double dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        return std::acos(std::clamp(dot, -1.0, 1.0));
    }
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double stationary_value(const KernelSpec& spec, double d) {
    const double g2 = spec.gamma2;
    switch (spec.kind) {
        case KernelKind::Delta:
            return d < kDeltaTolerance ? g2 : 0.0;
        case KernelKind::Exponential:
            return g2 * std::exp(-d / *spec.length_scale);
        case KernelKind::Matern32: {
            const double r = std::sqrt(3.0) * d / *spec.length_scale;
            return g2 * (1.0 + r) * std::exp(-r);
        }
        case KernelKind::RBF: {
            const double ell = *spec.length_scale;
            return g2 * std::exp(-d * d / (2.0 * ell * ell));
        }
        case KernelKind::RationalQuadratic: {
            const double ell = *spec.length_scale;
            return g2 * std::pow(1.0 + d * d / (2.0 * spec.alpha * ell * ell), -spec.alpha);
        }
        default:
            throw PreconditionError("not a stationary spatial kernel");
    }
}

bool is_feature_kernel(KernelKind kind) { return kind == KernelKind::Harmony || kind == KernelKind::Spline; }

// Basis functions phi_b(x) of a degenerate kernel.
Eigen::VectorXd features(const KernelSpec& spec, const Eigen::Vector3d& x) {
    if (spec.kind == KernelKind::Harmony) {
        return sphere::real_spherical_harmonics(spec.l_max, sphere::to_spherical(x));
    }
    const auto& centres = sphere::cached_icosphere_nodes(spec.spline_level).nodes;
    Eigen::VectorXd phi(centres.rows());
    for (Eigen::Index j = 0; j < centres.rows(); ++j) {
        phi[j] = sphere::abel_poisson(x, centres.row(j).transpose(), spec.spline_h);
    }
    return phi;
}

// Spectral weight of each basis function.
Eigen::VectorXd feature_weights(const KernelSpec& spec) {
    if (spec.kind == KernelKind::Spline) return Eigen::VectorXd::Ones(basis_size(spec));
    Eigen::VectorXd w(basis_size(spec));
    for (int l = 0; l <= spec.l_max; ++l) {
        // l^p is taken as 0 at l = 0 so the constant harmonic has weight 1.
        const double lp = l == 0 ? 0.0 : std::pow(static_cast<double>(l), spec.spectral_p);
        for (int m = -l; m <= l; ++m) w[l * l + l + m] = 1.0 / (1.0 + lp);
    }
    return w;
}

double feature_value(double gamma2, const Eigen::VectorXd& w, const double* fa, const double* fb) {
    double acc = 0.0;
    for (Eigen::Index b = 0; b < w.size(); ++b) acc += w[b] * (fa[b] * fb[b]);
    return gamma2 * acc;
}

// n x n_b, one row of basis values per point.
Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> feature_rows(const KernelSpec& spec,
                                                                                    const PointSet& points) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi(points.rows(), basis_size(spec));
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < points.rows(); ++i) phi.row(i) = features(spec, points.row(i).transpose()).transpose();
    return phi;
}

double temporal_value(const KernelSpec& spec, double t, double s) {
    if (spec.kind == KernelKind::TemporalDelta) return t == s ? 1.0 : 0.0;
    return std::exp(-std::abs(t - s) / *spec.length_scale);
}

}  // namespace

std::string_view to_string(KernelKind kind) {
    for (const auto& k : kKindNames) {
        if (k.kind == kind) return k.name;
    }
    return "?";
}

std::string_view to_string(Metric metric) { return metric == Metric::Chordal ? "chordal" : "geodesic"; }

KernelKind parse_kernel_kind(std::string_view name) {
    for (const auto& k : kKindNames) {
        if (k.name == name) return k.kind;
    }
    for (const auto& k : kKindAliases) {
        if (k.name == name) return k.kind;
    }
    throw ConfigError("unknown kernel kind '" + std::string(name) + "'");
}

Metric parse_metric(std::string_view name) {
    if (name == "chordal") return Metric::Chordal;
    if (name == "geodesic") return Metric::Geodesic;
    throw ConfigError("unknown metric '" + std::string(name) + "'");
}

bool is_spatial(KernelKind kind) {
    switch (kind) {
        case KernelKind::Delta:
        case KernelKind::Exponential:
        case KernelKind::Matern32:
        case KernelKind::RBF:
        case KernelKind::RationalQuadratic:
        case KernelKind::Harmony:
        case KernelKind::Spline:
            return true;
        default:
            return false;
    }
}

bool is_temporal(KernelKind kind) { return kind == KernelKind::TemporalDelta || kind == KernelKind::TemporalExponential; }

bool has_length_scale(KernelKind kind) {
    return kind == KernelKind::Exponential || kind == KernelKind::Matern32 || kind == KernelKind::RBF ||
           kind == KernelKind::RationalQuadratic || kind == KernelKind::TemporalExponential;
}

KernelSpec KernelSpec::delta(double gamma2) {
    KernelSpec s;
    s.kind = KernelKind::Delta;
    s.gamma2 = gamma2;
    return s;
}

KernelSpec KernelSpec::exponential(double gamma2, double length_scale, Metric metric) {
    KernelSpec s;
    s.kind = KernelKind::Exponential;
    s.gamma2 = gamma2;
    s.length_scale = length_scale;
    s.metric = metric;
    return s;
}

KernelSpec KernelSpec::matern32(double gamma2, double length_scale, Metric metric) {
    KernelSpec s = exponential(gamma2, length_scale, metric);
    s.kind = KernelKind::Matern32;
    return s;
}

KernelSpec KernelSpec::rbf(double gamma2, double length_scale) {
    KernelSpec s = exponential(gamma2, length_scale);
    s.kind = KernelKind::RBF;
    return s;
}

KernelSpec KernelSpec::rational_quadratic(double gamma2, double length_scale, double alpha) {
    KernelSpec s = exponential(gamma2, length_scale);
    s.kind = KernelKind::RationalQuadratic;
    s.alpha = alpha;
    return s;
}

KernelSpec KernelSpec::harmony(double gamma2, int l_max, double spectral_p) {
    KernelSpec s;
    s.kind = KernelKind::Harmony;
    s.gamma2 = gamma2;
    s.l_max = l_max;
    s.spectral_p = spectral_p;
    return s;
}

KernelSpec KernelSpec::spline(double gamma2, double h, int level) {
    KernelSpec s;
    s.kind = KernelKind::Spline;
    s.gamma2 = gamma2;
    s.spline_h = h;
    s.spline_level = level;
    return s;
}

KernelSpec KernelSpec::temporal_delta() {
    KernelSpec s;
    s.kind = KernelKind::TemporalDelta;
    return s;
}

KernelSpec KernelSpec::temporal_exponential(double length_scale) {
    KernelSpec s;
    s.kind = KernelKind::TemporalExponential;
    s.length_scale = length_scale;
    return s;
}

KernelSpec KernelSpec::product(double gamma2, KernelSpec spatial, KernelSpec temporal) {
    KernelSpec s;
    s.kind = KernelKind::Product;
    s.gamma2 = gamma2;
    s.spatial_factor = std::make_shared<const KernelSpec>(std::move(spatial));
    s.temporal_factor = std::make_shared<const KernelSpec>(std::move(temporal));
    return s;
}

void validate(const KernelSpec& spec) {
    const std::string name(to_string(spec.kind));
    if (!std::isfinite(spec.gamma2) || spec.gamma2 < 0.0) throw ConfigError(name + ": gamma2 must be finite and >= 0");
    if (has_length_scale(spec.kind)) {
        if (!spec.length_scale || !std::isfinite(*spec.length_scale) || !(*spec.length_scale > 0.0)) {
            throw ConfigError(name + ": length_scale must be given and > 0");
        }
    }
    if (is_temporal(spec.kind) && spec.gamma2 != 1.0) {
        throw ConfigError(name + ": temporal kernels have unit variance; put gamma2 on the spatial kernel");
    }
    if (spec.metric == Metric::Geodesic &&
        (spec.kind == KernelKind::RBF || spec.kind == KernelKind::RationalQuadratic)) {
        throw ConfigError(name + ": geodesic distance is only supported for Exponential and Matern32");
    }
    switch (spec.kind) {
        case KernelKind::RationalQuadratic:
            if (!std::isfinite(spec.alpha) || !(spec.alpha > 0.0)) throw ConfigError(name + ": alpha must be > 0");
            break;
        case KernelKind::Harmony:
            if (spec.l_max < 0 || spec.l_max > kMaxHarmonicDegree) {
                throw ConfigError(name + ": l_max must be in [0, " + std::to_string(kMaxHarmonicDegree) + "]");
            }
            if (!std::isfinite(spec.spectral_p) || spec.spectral_p < 0.0) {
                throw ConfigError(name + ": spectral_p must be >= 0");
            }
            break;
        case KernelKind::Spline:
            if (!(spec.spline_h > 0.0 && spec.spline_h < 1.0)) throw ConfigError(name + ": spline_h must be in (0, 1)");
            if (spec.spline_level < 0 || spec.spline_level > sphere::kMaxIcosphereLevel) {
                throw ConfigError(name + ": spline_level must be in [0, " + std::to_string(sphere::kMaxIcosphereLevel) +
                                  "]");
            }
            break;
        case KernelKind::Product:
            if (!spec.spatial_factor || !spec.temporal_factor) {
                throw ConfigError("Product: needs exactly one spatial and one temporal factor");
            }
            if (!is_spatial(spec.spatial_factor->kind) || !is_temporal(spec.temporal_factor->kind)) {
                throw ConfigError("Product: factors must be one spatial and one temporal kernel");
            }
            if (spec.spatial_factor->gamma2 != 1.0) {
                throw ConfigError("Product: gamma2 is carried by the product, the spatial factor must have gamma2 = 1");
            }
            validate(*spec.spatial_factor);
            validate(*spec.temporal_factor);
            break;
        default:
            break;
    }
}

KernelSpec with_gamma2(KernelSpec spec, double gamma2) {
    spec.gamma2 = gamma2;
    return spec;
}

SeparableKernel make_separable(const KernelSpec& spatial, const KernelSpec& temporal) {
    validate(spatial);
    validate(temporal);
    if (!is_spatial(spatial.kind)) throw ConfigError("first kernel of a separable pair must be spatial");
    if (!is_temporal(temporal.kind)) throw ConfigError("second kernel of a separable pair must be temporal");
    return {spatial, temporal};
}

SeparableKernel make_separable(const KernelSpec& product) {
    if (product.kind != KernelKind::Product) throw ConfigError("expected a Product kernel");
    validate(product);
    return {with_gamma2(*product.spatial_factor, product.gamma2), *product.temporal_factor};
}

double eval_spatial(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    require_spatial(spec);
    validate(spec);
    require_unit(x);
    require_unit(y);
    if (is_feature_kernel(spec.kind)) {
        const Eigen::VectorXd fx = features(spec, x);
        const Eigen::VectorXd fy = features(spec, y);
        return feature_value(spec.gamma2, feature_weights(spec), fx.data(), fy.data());
    }
    return stationary_value(spec, distance(spec.metric, x.data(), y.data()));
}

double eval_harmony(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    if (spec.kind != KernelKind::Harmony) throw PreconditionError("eval_harmony needs a Harmony kernel");
    return eval_spatial(spec, x, y);
}

double eval_spline(const KernelSpec& spec, const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    if (spec.kind != KernelKind::Spline) throw PreconditionError("eval_spline needs a Spline kernel");
    return eval_spatial(spec, x, y);
}

double eval_temporal(const KernelSpec& spec, double t, double s) {
    require_temporal(spec);
    validate(spec);
    return temporal_value(spec, t, s);
}

double eval_product(const KernelSpec& spec, const Eigen::Vector3d& x, double t, const Eigen::Vector3d& y, double s) {
    const SeparableKernel k = make_separable(spec);
    return eval_spatial(k.spatial, x, y) * eval_temporal(k.temporal, t, s);
}

Eigen::MatrixXd gram_spatial(const KernelSpec& spec, const PointSet& points) {
    require_spatial(spec);
    validate(spec);
    require_unit_points(points);
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd k(n, n);
    if (is_feature_kernel(spec.kind)) {
        const auto phi = feature_rows(spec, points);
        const Eigen::VectorXd w = feature_weights(spec);
#pragma omp parallel for schedule(dynamic, 16)
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i; j < n; ++j) {
                const double v = feature_value(spec.gamma2, w, phi.row(i).data(), phi.row(j).data());
                k(i, j) = v;
                k(j, i) = v;
            }
        }
        return k;
    }
    // Row-major copy so each point's coordinates are contiguous.
    const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> p = points;
#pragma omp parallel for schedule(dynamic, 16)
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = stationary_value(spec, distance(spec.metric, p.row(i).data(), p.row(j).data()));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Eigen::MatrixXd gram_temporal(const KernelSpec& spec, const Eigen::VectorXd& times) {
    require_temporal(spec);
    validate(spec);
    const Eigen::Index n = times.size();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = temporal_value(spec, times[i], times[j]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Eigen::VectorXd cross_spatial(const KernelSpec& spec, const Eigen::Vector3d& query, const PointSet& points) {
    require_spatial(spec);
    validate(spec);
    require_unit(query);
    require_unit_points(points);
    Eigen::VectorXd out(points.rows());
    if (is_feature_kernel(spec.kind)) {
        const auto phi = feature_rows(spec, points);
        const Eigen::VectorXd fq = features(spec, query);
        const Eigen::VectorXd w = feature_weights(spec);
        for (Eigen::Index j = 0; j < points.rows(); ++j) out[j] = feature_value(spec.gamma2, w, fq.data(), phi.row(j).data());
        return out;
    }
    const Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> p = points;
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        out[j] = stationary_value(spec, distance(spec.metric, query.data(), p.row(j).data()));
    }
    return out;
}

Eigen::VectorXd cross_temporal(const KernelSpec& spec, double query, const Eigen::VectorXd& times) {
    require_temporal(spec);
    validate(spec);
    Eigen::VectorXd out(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) out[i] = temporal_value(spec, query, times[i]);
    return out;
}

Eigen::MatrixXd add_jitter(const Eigen::MatrixXd& k) {
    if (k.rows() != k.cols()) throw DimensionError("add_jitter needs a square matrix");
    if (k.rows() == 0) return k;
    const double eps = 1e-10 * k.trace() / static_cast<double>(k.rows());
    Eigen::MatrixXd out = k;
    out.diagonal().array() += eps;
    return out;
}

Eigen::Index basis_size(const KernelSpec& spec) {
    if (spec.kind == KernelKind::Harmony) return static_cast<Eigen::Index>(spec.l_max + 1) * (spec.l_max + 1);
    if (spec.kind == KernelKind::Spline) return sphere::cached_icosphere_nodes(spec.spline_level).nodes.rows();
    return 0;
}

}  // namespace kroneig
