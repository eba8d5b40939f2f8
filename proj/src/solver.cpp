#include "kroneig/solver.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include <Eigen/Cholesky>

#include "kroneig/error.hpp"

namespace kroneig {
namespace {

using linalg::RowMatrix;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_whitened(const ForwardProblem& p) {
    if (!p.whitened) throw PreconditionError("the fast solver needs a whitened problem");
    if (p.noise_cov_temporal) throw PreconditionError("whitened problem still carries a temporal noise covariance");
    require_valid(p);
}

KernelSpec unit_spatial(const KernelSpec& spatial) { return with_gamma2(spatial, 1.0); }

double self_covariance(const KernelSpec& spatial_unit, const Eigen::Vector3d& x) {
    return eval_spatial(spatial_unit, x, x);
}

// Shared contraction used by every posterior evaluation. `g_unit` holds
// k_x*^T G^T per query location (unit magnitude) and `kt_rows` holds k_t*^T
// per query time. Each output entry depends only on its own row of both.
PosteriorGrid contract(const SolverState& s, const RowMatrix& g_unit, const Eigen::VectorXd& prior_x_unit,
                       const RowMatrix& kt_rows, const Eigen::VectorXd& prior_t) {
    const double g2 = s.gamma2();
    RowMatrix a = linalg::ordered_product(g_unit, s.spatial().vx);
    a *= g2;
    const RowMatrix b = linalg::ordered_product(kt_rows, s.temporal().basis);
    const RowMatrix cb = linalg::ordered_product(b, s.transformed_t());
    const RowMatrix bb = b.cwiseProduct(b);
    const RowMatrix wb = linalg::ordered_product(bb, s.pi_t());
    const RowMatrix aa = a.cwiseProduct(a);

    const RowMatrix mean = linalg::ordered_product(a, cb.transpose());
    const RowMatrix reduction = linalg::ordered_product(aa, wb.transpose());

    PosteriorGrid out;
    out.mean = mean;
    out.variance.resize(mean.rows(), mean.cols());
    for (Eigen::Index j = 0; j < mean.rows(); ++j) {
        for (Eigen::Index i = 0; i < mean.cols(); ++i) {
            const double prior = (g2 * prior_x_unit[j]) * prior_t[i];
            double v = prior - reduction(j, i);
            if (v < 0.0) {
                if (v < -1e-10 * prior) {
                    throw NumericalError("posterior variance " + std::to_string(v) + " is negative against prior " +
                                         std::to_string(prior));
                }
                v = 0.0;
            }
            out.variance(j, i) = v;
        }
    }
    return out;
}

Eigen::VectorXd temporal_self(const KernelSpec& temporal, const Eigen::VectorXd& times) {
    Eigen::VectorXd out(times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) out[i] = eval_temporal(temporal, times[i], times[i]);
    return out;
}

}  // namespace

SpatialFactor factor_spatial(const ForwardProblem& whitened, const KernelSpec& spatial) {
    require_whitened(whitened);
    validate(spatial);
    if (!is_spatial(spatial.kind)) throw ConfigError("factor_spatial needs a spatial kernel");

    SpatialFactor f;
    f.spec = unit_spatial(spatial);
    f.sources = whitened.source_points;
    f.lead_field_t = whitened.lead_field.transpose();

    auto start = Clock::now();
    const RowMatrix kx = gram_spatial(f.spec, f.sources);
    f.prior_diag.resize(f.sources.rows());
    for (Eigen::Index j = 0; j < f.sources.rows(); ++j) {
        f.prior_diag[j] = self_covariance(f.spec, f.sources.row(j).transpose());
    }
    f.gram_seconds = seconds_since(start);

    start = Clock::now();
    f.kx_gt = linalg::ordered_product(kx, f.lead_field_t);
    const Eigen::MatrixXd gkg = linalg::symmetrize(whitened.lead_field * f.kx_gt);
    f.project_seconds = seconds_since(start);

    start = Clock::now();
    auto eig = linalg::psd_eigen(gkg, "G K_x G^T", kNegativeEigenTolerance);
    f.vx = eig.vectors;
    f.lambda = std::move(eig.values);
    f.eigen_seconds = seconds_since(start);
    return f;
}

TemporalFactor factor_temporal(const ForwardProblem& whitened, const KernelSpec& temporal) {
    require_whitened(whitened);
    validate(temporal);
    if (!is_temporal(temporal.kind)) throw ConfigError("factor_temporal needs a temporal kernel");

    TemporalFactor f;
    f.spec = temporal;
    f.times = whitened.time_points;
    f.transform = whitened.temporal_transform;

    auto start = Clock::now();
    Eigen::MatrixXd kt = gram_temporal(temporal, f.times);
    if (f.transform) kt = linalg::symmetrize((*f.transform) * kt * f.transform->transpose());
    f.gram_seconds = seconds_since(start);

    start = Clock::now();
    auto eig = linalg::psd_eigen(kt, "K_t", kNegativeEigenTolerance);
    f.vt = std::move(eig.vectors);
    f.lambda = std::move(eig.values);
    f.basis = f.transform ? RowMatrix(f.transform->transpose() * f.vt) : RowMatrix(f.vt);
    f.eigen_seconds = seconds_since(start);
    return f;
}

SolverState::SolverState(std::shared_ptr<const SpatialFactor> spatial, std::shared_ptr<const TemporalFactor> temporal,
                         double gamma2, Eigen::MatrixXd data)
    : spatial_(std::move(spatial)), temporal_(std::move(temporal)), gamma2_(gamma2), data_(std::move(data)) {
    if (!spatial_ || !temporal_) throw PreconditionError("solver state needs both factors");
    if (!std::isfinite(gamma2_) || gamma2_ < 0.0) throw PreconditionError("gamma2 must be finite and >= 0");
    const Eigen::Index nn = spatial_->vx.rows();
    const Eigen::Index nr = temporal_->vt.rows();
    if (data_.rows() != nn || data_.cols() != nr) {
        throw DimensionError("data is " + std::to_string(data_.rows()) + "x" + std::to_string(data_.cols()) +
                             ", expected " + std::to_string(nn) + "x" + std::to_string(nr));
    }
    pi_.resize(nn, nr);
    for (Eigen::Index i = 0; i < nr; ++i) {
        for (Eigen::Index j = 0; j < nn; ++j) pi_(j, i) = 1.0 / (gamma2_ * spatial_->lambda[j] * temporal_->lambda[i] + 1.0);
    }
    projected_ = spatial_->vx.transpose() * data_ * temporal_->vt;
    transformed_ = pi_.cwiseProduct(projected_);
    pi_t_ = pi_.transpose();
    transformed_t_ = transformed_.transpose();
}

SeparableKernel SolverState::kernel() const { return {kroneig::with_gamma2(spatial_->spec, gamma2_), temporal_->spec}; }

SolverState SolverState::with_gamma2(double gamma2) const { return SolverState(spatial_, temporal_, gamma2, data_); }

SolverState SolverState::with_data(Eigen::MatrixXd data) const {
    return SolverState(spatial_, temporal_, gamma2_, std::move(data));
}

SolverState precompute(const ForwardProblem& whitened, const KernelSpec& spatial, const KernelSpec& temporal) {
    const SeparableKernel k = make_separable(spatial, temporal);
    return precompute(whitened, k);
}

SolverState precompute(const ForwardProblem& whitened, const SeparableKernel& kernel) {
    auto spatial = std::make_shared<const SpatialFactor>(factor_spatial(whitened, kernel.spatial));
    auto temporal = std::make_shared<const TemporalFactor>(factor_temporal(whitened, kernel.temporal));
    return SolverState(std::move(spatial), std::move(temporal), kernel.gamma2(), whitened.sensor_data);
}

PosteriorPoint posterior_at(const SolverState& state, const Eigen::Vector3d& x, double t) {
    const auto& sp = state.spatial();
    const auto& tp = state.temporal();
    const RowMatrix kx = cross_spatial(sp.spec, x, sp.sources).transpose();
    const RowMatrix g = linalg::ordered_product(kx, sp.lead_field_t);
    const RowMatrix kt = cross_temporal(tp.spec, t, tp.times).transpose();
    const Eigen::VectorXd px = Eigen::VectorXd::Constant(1, self_covariance(sp.spec, x));
    const Eigen::VectorXd pt = Eigen::VectorXd::Constant(1, eval_temporal(tp.spec, t, t));
    const PosteriorGrid r = contract(state, g, px, kt, pt);
    return {r.mean(0, 0), r.variance(0, 0)};
}

PosteriorGrid posterior_grid(const SolverState& state) {
    const auto& sp = state.spatial();
    const auto& tp = state.temporal();
    const RowMatrix kt = gram_temporal(tp.spec, tp.times);
    return contract(state, sp.kx_gt, sp.prior_diag, kt, temporal_self(tp.spec, tp.times));
}

PosteriorGrid posterior_batch(const SolverState& state, const PointSet& points, const Eigen::VectorXd& times) {
    const auto& sp = state.spatial();
    const auto& tp = state.temporal();
    RowMatrix kx(points.rows(), sp.sources.rows());
    Eigen::VectorXd px(points.rows());
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
        const Eigen::Vector3d x = points.row(j).transpose();
        kx.row(j) = cross_spatial(sp.spec, x, sp.sources).transpose();
        px[j] = self_covariance(sp.spec, x);
    }
    RowMatrix kt(times.size(), tp.times.size());
    for (Eigen::Index i = 0; i < times.size(); ++i) kt.row(i) = cross_temporal(tp.spec, times[i], tp.times).transpose();
    const RowMatrix g = linalg::ordered_product(kx, sp.lead_field_t);
    return contract(state, g, px, kt, temporal_self(tp.spec, times));
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
    return out;
}

namespace {

void check_naive_guard(const ForwardProblem& problem) {
    const Eigen::Index nn = problem.n_sensors();
    const Eigen::Index nr = problem.n_data_columns();
    const Eigen::Index nm = problem.n_sources();
    const Eigen::Index nt = problem.n_times();
    if (nn * nr > kNaiveObservationGuard) {
        throw DimensionError("dense oracle refused: n_n * n_t = " + std::to_string(nn * nr) + " exceeds " +
                             std::to_string(kNaiveObservationGuard));
    }
    if (nm * nt > kNaiveSourceGuard) {
        throw DimensionError("dense oracle refused: n_m * n_t = " + std::to_string(nm * nt) + " exceeds " +
                             std::to_string(kNaiveSourceGuard));
    }
}

// The full (n_n n_t)-dimensional system H K H^T + noise, factorized once.
struct DenseSystem {
    Eigen::MatrixXd k;
    Eigen::MatrixXd h;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::VectorXd alpha;  // S^{-1} vec(B)
};

DenseSystem dense_system(const ForwardProblem& problem, const KernelSpec& spatial, const KernelSpec& temporal) {
    require_valid(problem);
    make_separable(spatial, temporal);
    check_naive_guard(problem);
    const Eigen::Index nn = problem.n_sensors();
    const Eigen::Index nt = problem.n_times();
    const Eigen::Index nr = problem.n_data_columns();

    DenseSystem d;
    d.k = kron(gram_temporal(temporal, problem.time_points), gram_spatial(spatial, problem.source_points));
    const Eigen::MatrixXd time_operator =
        problem.temporal_transform ? *problem.temporal_transform : Eigen::MatrixXd::Identity(nt, nt);
    d.h = kron(time_operator, problem.lead_field);

    Eigen::MatrixXd noise;
    if (problem.whitened) {
        noise = Eigen::MatrixXd::Identity(nn * nr, nn * nr);
    } else {
        const Eigen::MatrixXd st =
            problem.noise_cov_temporal ? *problem.noise_cov_temporal : Eigen::MatrixXd::Identity(nt, nt);
        noise = kron(st, problem.noise_cov_spatial);
    }
    const Eigen::MatrixXd s = d.h * d.k * d.h.transpose() + noise;
    d.ldlt.compute(s);
    if (d.ldlt.info() != Eigen::Success) throw NumericalError("dense oracle: factorization failed");
    const Eigen::VectorXd vec_b = problem.sensor_data.reshaped();
    d.alpha = d.ldlt.solve(vec_b);
    return d;
}

}  // namespace

PosteriorPoint naive_posterior_at(const ForwardProblem& problem, const KernelSpec& spatial, const KernelSpec& temporal,
                                  const Eigen::Vector3d& x, double t) {
    const DenseSystem d = dense_system(problem, spatial, temporal);
    const Eigen::VectorXd kxs = cross_spatial(spatial, x, problem.source_points);
    const Eigen::VectorXd kts = cross_temporal(temporal, t, problem.time_points);
    const Eigen::VectorXd hk = d.h * kron(kts, kxs);

    PosteriorPoint out;
    out.mean = hk.dot(d.alpha);
    out.variance = eval_spatial(spatial, x, x) * eval_temporal(temporal, t, t) - hk.dot(d.ldlt.solve(hk));
    return out;
}

PosteriorGrid naive_posterior_grid(const ForwardProblem& problem, const KernelSpec& spatial,
                                   const KernelSpec& temporal) {
    const DenseSystem d = dense_system(problem, spatial, temporal);
    const Eigen::MatrixXd hk = d.h * d.k;  // H K, columns indexed by vec position of (source, time)
    const Eigen::MatrixXd z = d.ldlt.solve(hk);
    const Eigen::Index nm = problem.n_sources();
    const Eigen::Index nt = problem.n_times();

    PosteriorGrid out;
    const Eigen::VectorXd mean = hk.transpose() * d.alpha;
    const Eigen::VectorXd reduction = hk.cwiseProduct(z).colwise().sum().transpose();
    out.mean = mean.reshaped(nm, nt);
    out.variance = (d.k.diagonal() - reduction).reshaped(nm, nt);
    return out;
}

Eigen::MatrixXd mne_closed_form(const ForwardProblem& whitened, double gamma2) {
    if (!(gamma2 > 0.0) || !std::isfinite(gamma2)) throw PreconditionError("MNE needs gamma2 > 0");
    require_whitened(whitened);
    if (whitened.temporal_transform) throw PreconditionError("MNE closed form assumes no temporal whitening");
    const auto& g = whitened.lead_field;
    Eigen::MatrixXd s = g * g.transpose();
    s.diagonal().array() += 1.0 / gamma2;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
    if (ldlt.info() != Eigen::Success) throw NumericalError("MNE: factorization failed");
    return g.transpose() * ldlt.solve(whitened.sensor_data);
}

}  // namespace kroneig
