#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "kroneig/kernels.hpp"
#include "kroneig/model.hpp"
#include "kroneig/solver.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n01(rng);
    return m;
}

inline Eigen::Vector3d random_unit(Rng& rng) {
    Eigen::Vector3d v;
    do {
        v = gaussian(3, 1, rng);
    } while (v.norm() < 1e-6);
    return v.normalized();
}

inline kroneig::PointSet random_points(Eigen::Index n, Rng& rng) {
    kroneig::PointSet p(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) p.row(i) = random_unit(rng).transpose();
    return p;
}

/// Strictly increasing times with random spacing in [0.01, 0.05].
inline Eigen::VectorXd random_times(Eigen::Index n, Rng& rng) {
    std::uniform_real_distribution<double> step(0.01, 0.05);
    Eigen::VectorXd t(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        t[i] = acc;
        acc += step(rng);
    }
    return t;
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, double kappa, Rng& rng) {
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(n, n, rng)).householderQ();
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = std::pow(kappa, -static_cast<double>(i) / std::max<Eigen::Index>(1, n - 1));
    Eigen::MatrixXd s = q * d.asDiagonal() * q.transpose();
    return 0.5 * (s + s.transpose());
}

inline kroneig::ForwardProblem random_whitened(Eigen::Index nn, Eigen::Index nm, Eigen::Index nt, Rng& rng) {
    kroneig::ForwardProblem p;
    p.lead_field = gaussian(nn, nm, rng);
    p.sensor_data = gaussian(nn, nt, rng);
    p.noise_cov_spatial = Eigen::MatrixXd::Identity(nn, nn);
    p.source_points = random_points(nm, rng);
    p.time_points = random_times(nt, rng);
    p.whitened = true;
    return p;
}

/// One of each spatial family, sized for tiny problems.
inline std::vector<kroneig::KernelSpec> spatial_family(double gamma2) {
    using kroneig::KernelSpec;
    return {KernelSpec::delta(gamma2),
            KernelSpec::exponential(gamma2, 0.4),
            KernelSpec::matern32(gamma2, 0.3),
            KernelSpec::rbf(gamma2, 0.5),
            KernelSpec::rational_quadratic(gamma2, 0.262),
            KernelSpec::harmony(gamma2, 4),
            KernelSpec::spline(gamma2, 0.8, 1)};
}

inline std::vector<kroneig::KernelSpec> temporal_family() {
    using kroneig::KernelSpec;
    return {KernelSpec::temporal_delta(), KernelSpec::temporal_exponential(0.05)};
}

/// max |a - b| / max(|b|_max, floor).
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor = 1e-300) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// -log N(vec(B); 0, H K H^T + I) by Cholesky of the full covariance.
inline double dense_nll(const kroneig::ForwardProblem& p, const kroneig::KernelSpec& spatial,
                        const kroneig::KernelSpec& temporal) {
    const Eigen::Index nt = p.n_times();
    // (W_t (x) G)(K_t (x) K_x)(W_t (x) G)^T = (W_t K_t W_t^T) (x) (G K_x G^T).
    const Eigen::MatrixXd top = p.temporal_transform ? *p.temporal_transform : Eigen::MatrixXd::Identity(nt, nt);
    const Eigen::MatrixXd kt = top * kroneig::gram_temporal(temporal, p.time_points) * top.transpose();
    const Eigen::MatrixXd kx = p.lead_field * kroneig::gram_spatial(spatial, p.source_points) * p.lead_field.transpose();
    Eigen::MatrixXd s = kroneig::kron(kt, kx);
    s.diagonal().array() += 1.0;
    const Eigen::LLT<Eigen::MatrixXd> llt(s);
    const Eigen::VectorXd b = p.sensor_data.reshaped();
    const Eigen::VectorXd z = llt.matrixL().solve(b);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return 0.5 * logdet + 0.5 * z.squaredNorm() + 0.5 * static_cast<double>(b.size()) * std::log(2.0 * M_PI);
}

/// Gauss-Legendre nodes and weights on [-1, 1] from the Jacobi matrix.
struct Quadrature {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};

inline Quadrature gauss_legendre(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        j(k, k - 1) = b;
        j(k - 1, k) = b;
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Quadrature q;
    q.nodes = es.eigenvalues();
    q.weights = 2.0 * es.eigenvectors().row(0).transpose().array().square();
    return q;
}

/// Integrates f over the unit sphere: Gauss-Legendre in cos(theta) times
/// the trapezoid rule in phi, which is exact for trigonometric polynomials.
template <class F>
double sphere_integral(F&& f, int n_theta, int n_phi) {
    const Quadrature q = gauss_legendre(n_theta);
    double total = 0.0;
    for (int a = 0; a < n_theta; ++a) {
        const double u = q.nodes[a];
        const double s = std::sqrt(1.0 - u * u);
        for (int b = 0; b < n_phi; ++b) {
            const double phi = 2.0 * M_PI * b / n_phi;
            total += q.weights[a] * (2.0 * M_PI / n_phi) * f(Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), u));
        }
    }
    return total;
}

}  // namespace testing
