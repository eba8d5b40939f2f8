#pragma once

#include <memory>
#include <optional>

#include <Eigen/Core>

#include "kroneig/kernels.hpp"
#include "kroneig/linalg.hpp"
#include "kroneig/model.hpp"

namespace kroneig {

/// Eigenvalues of G K_x G^T or K_t below -tol * max abort; smaller negatives clamp to 0.
inline constexpr double kNegativeEigenTolerance = 1e-10;
/// Largest n_n * n_t the dense oracle accepts.
inline constexpr Eigen::Index kNaiveObservationGuard = 5000;
/// Largest n_m * n_t the dense oracle accepts (its prior matrix is (n_m n_t)^2).
inline constexpr Eigen::Index kNaiveSourceGuard = 6000;

/// Spatial half of the precomputation, at unit magnitude.
struct SpatialFactor {
    KernelSpec spec;                  // gamma2 == 1
    PointSet sources;
    linalg::RowMatrix lead_field_t;   // G^T, n_m x n_n
    linalg::RowMatrix kx_gt;          // K_x G^T, n_m x n_n
    linalg::RowMatrix vx;             // eigenvectors of G K_x G^T, n_n x n_n
    Eigen::VectorXd lambda;           // matching eigenvalues, ascending
    Eigen::VectorXd prior_diag;       // kappa_x(x_j, x_j)
    double gram_seconds = 0.0;
    double project_seconds = 0.0;
    double eigen_seconds = 0.0;
};

/// Temporal half of the precomputation. With a temporal whitening operator
/// W_t the decomposed matrix is W_t K_t W_t^T and `basis` is W_t^T V_t.
struct TemporalFactor {
    KernelSpec spec;
    Eigen::VectorXd times;
    std::optional<Eigen::MatrixXd> transform;  // W_t, r_t x n_t
    Eigen::MatrixXd vt;                        // r_t x r_t
    Eigen::VectorXd lambda;                    // ascending
    linalg::RowMatrix basis;                   // n_t x r_t
    double gram_seconds = 0.0;
    double eigen_seconds = 0.0;
};

SpatialFactor factor_spatial(const ForwardProblem& whitened, const KernelSpec& spatial);
TemporalFactor factor_temporal(const ForwardProblem& whitened, const KernelSpec& temporal);

/// Everything the fast posterior needs: both eigendecompositions, Pi and
/// C = Pi o (V_x^T B V_t). Immutable; safe to share between threads.
///
/// The decompositions are stored at unit magnitude and the magnitude gamma2
/// is applied to lambda_x on the fly, so with_gamma2() costs O(n_n n_t).
class SolverState {
public:
    SolverState(std::shared_ptr<const SpatialFactor> spatial, std::shared_ptr<const TemporalFactor> temporal,
                double gamma2, Eigen::MatrixXd data);

    [[nodiscard]] double gamma2() const { return gamma2_; }
    [[nodiscard]] SeparableKernel kernel() const;
    [[nodiscard]] Eigen::VectorXd lambda_x() const { return gamma2_ * spatial_->lambda; }
    [[nodiscard]] const Eigen::VectorXd& lambda_x_unit() const { return spatial_->lambda; }
    [[nodiscard]] const Eigen::VectorXd& lambda_t() const { return temporal_->lambda; }
    [[nodiscard]] Eigen::MatrixXd vx() const { return spatial_->vx; }
    [[nodiscard]] const Eigen::MatrixXd& vt() const { return temporal_->vt; }
    [[nodiscard]] const Eigen::MatrixXd& pi() const { return pi_; }
    [[nodiscard]] const Eigen::MatrixXd& projected_data() const { return projected_; }
    [[nodiscard]] const Eigen::MatrixXd& transformed_data() const { return transformed_; }
    [[nodiscard]] const Eigen::MatrixXd& data() const { return data_; }
    [[nodiscard]] const SpatialFactor& spatial() const { return *spatial_; }
    [[nodiscard]] const TemporalFactor& temporal() const { return *temporal_; }
    [[nodiscard]] std::shared_ptr<const SpatialFactor> spatial_ptr() const { return spatial_; }
    [[nodiscard]] std::shared_ptr<const TemporalFactor> temporal_ptr() const { return temporal_; }
    [[nodiscard]] Eigen::Index n_sensors() const { return spatial_->vx.rows(); }
    [[nodiscard]] Eigen::Index n_sources() const { return spatial_->sources.rows(); }
    [[nodiscard]] Eigen::Index n_times() const { return temporal_->times.size(); }
    [[nodiscard]] Eigen::Index n_data_columns() const { return temporal_->vt.rows(); }

    /// Same decompositions, new magnitude.
    [[nodiscard]] SolverState with_gamma2(double gamma2) const;
    /// Same decompositions and magnitude, new whitened data.
    [[nodiscard]] SolverState with_data(Eigen::MatrixXd data) const;

    // Row-major copies of Pi^T and C^T used by the batched contractions.
    [[nodiscard]] const linalg::RowMatrix& pi_t() const { return pi_t_; }
    [[nodiscard]] const linalg::RowMatrix& transformed_t() const { return transformed_t_; }

private:
    std::shared_ptr<const SpatialFactor> spatial_;
    std::shared_ptr<const TemporalFactor> temporal_;
    double gamma2_;
    Eigen::MatrixXd data_;
    Eigen::MatrixXd pi_;
    Eigen::MatrixXd projected_;
    Eigen::MatrixXd transformed_;
    linalg::RowMatrix pi_t_;
    linalg::RowMatrix transformed_t_;
};

/// Eigendecomposes G K_x G^T and K_t for a whitened problem.
SolverState precompute(const ForwardProblem& whitened, const KernelSpec& spatial, const KernelSpec& temporal);
SolverState precompute(const ForwardProblem& whitened, const SeparableKernel& kernel);

struct PosteriorPoint {
    double mean = 0.0;
    double variance = 0.0;
};

struct PosteriorGrid {
    Eigen::MatrixXd mean;      // n_sources x n_times
    Eigen::MatrixXd variance;  // n_sources x n_times
};

/// Fast posterior at an arbitrary source location and time.
PosteriorPoint posterior_at(const SolverState& state, const Eigen::Vector3d& x, double t);

/// Fast posterior at every (source point, time point) of the problem. Each
/// entry is bit-identical to posterior_at() at that grid point.
PosteriorGrid posterior_grid(const SolverState& state);

/// Fast posterior at every combination of the given locations and times.
PosteriorGrid posterior_batch(const SolverState& state, const PointSet& points, const Eigen::VectorXd& times);

/// Dense reference: builds K = K_t (x) K_x and H explicitly and solves the
/// (n_n n_t)-dimensional system. For an unwhitened problem the noise
/// covariance is Sigma_t (x) Sigma_x (or I (x) Sigma_x); for a whitened one
/// it is the identity and H = W_t (x) G when a temporal transform exists.
PosteriorPoint naive_posterior_at(const ForwardProblem& problem, const KernelSpec& spatial, const KernelSpec& temporal,
                                  const Eigen::Vector3d& x, double t);

/// Dense reference at every (source point, time point); one factorization.
PosteriorGrid naive_posterior_grid(const ForwardProblem& problem, const KernelSpec& spatial,
                                   const KernelSpec& temporal);

/// Minimum-norm estimate G^T (G G^T + gamma^{-2} I)^{-1} B, column by column.
Eigen::MatrixXd mne_closed_form(const ForwardProblem& whitened, double gamma2);

/// Kronecker product A (x) B.
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace kroneig
