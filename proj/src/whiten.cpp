#include "kroneig/whiten.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "kroneig/error.hpp"

namespace kroneig {
namespace {

void require_unwhitened(const ForwardProblem& p) {
    if (p.whitened) throw PreconditionError("problem is already whitened");
    require_valid(p);
}

}  // namespace

Eigen::MatrixXd whitening_transform(const Eigen::MatrixXd& cov, const char* what) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) throw DimensionError(std::string(what) + " must be square and non-empty");
    const double scale = cov.cwiseAbs().maxCoeff();
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        throw PreconditionError(std::string(what) + " is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw NumericalError(std::string("eigendecomposition of ") + what + " failed");
    const Eigen::VectorXd& d = eig.eigenvalues();
    const double top = d.maxCoeff();
    if (!(top > 0.0)) throw NumericalError(std::string(what) + " has no positive eigenvalue");

    // Eigen sorts ascending; keep the largest first so rank-deficient inputs
    // line up with the dominant directions.
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) rank += d[i] > kWhitenRankThreshold * top ? 1 : 0;
    Eigen::MatrixXd w(rank, cov.rows());
    Eigen::Index row = 0;
    for (Eigen::Index i = d.size() - 1; i >= 0; --i) {
        if (!(d[i] > kWhitenRankThreshold * top)) continue;
        w.row(row++) = eig.eigenvectors().col(i).transpose() / std::sqrt(d[i]);
    }
    return w;
}

WhitenResult whiten_spatial(const ForwardProblem& problem) {
    require_unwhitened(problem);
    if (problem.noise_cov_temporal) {
        throw PreconditionError("problem has a temporal noise covariance; use whiten_spatiotemporal");
    }
    WhitenResult out;
    out.spatial_transform = whitening_transform(problem.noise_cov_spatial, "spatial noise covariance");
    out.spatial_rank = out.spatial_transform.rows();
    out.temporal_rank = problem.n_times();

    ForwardProblem& w = out.problem;
    w.lead_field = out.spatial_transform * problem.lead_field;
    w.sensor_data = out.spatial_transform * problem.sensor_data;
    w.noise_cov_spatial = Eigen::MatrixXd::Identity(out.spatial_rank, out.spatial_rank);
    w.source_points = problem.source_points;
    w.time_points = problem.time_points;
    w.whitened = true;
    return out;
}

WhitenResult whiten_spatiotemporal(const ForwardProblem& problem) {
    require_unwhitened(problem);
    if (!problem.noise_cov_temporal) throw PreconditionError("problem has no temporal noise covariance");

    ForwardProblem spatial_only = problem;
    spatial_only.noise_cov_temporal.reset();
    WhitenResult out = whiten_spatial(spatial_only);

    const Eigen::MatrixXd wt = whitening_transform(*problem.noise_cov_temporal, "temporal noise covariance");
    out.problem.sensor_data = out.problem.sensor_data * wt.transpose();
    out.problem.temporal_transform = wt;
    out.temporal_transform = wt;
    out.temporal_rank = wt.rows();
    return out;
}

WhitenResult whiten(const ForwardProblem& problem) {
    return problem.noise_cov_temporal ? whiten_spatiotemporal(problem) : whiten_spatial(problem);
}

}  // namespace kroneig
