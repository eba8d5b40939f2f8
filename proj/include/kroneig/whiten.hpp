#pragma once

#include <optional>

#include <Eigen/Core>

#include "kroneig/model.hpp"

namespace kroneig {

/// Eigenvalues at or below this fraction of the largest are dropped.
inline constexpr double kWhitenRankThreshold = 1e-12;

struct WhitenResult {
    ForwardProblem problem;                             // whitened == true
    Eigen::MatrixXd spatial_transform;                  // W_x = D_x^{-1/2} U_x^T, r_x x n_n
    std::optional<Eigen::MatrixXd> temporal_transform;  // W_t = D_t^{-1/2} U_t^T, r_t x n_t
    Eigen::Index spatial_rank = 0;
    Eigen::Index temporal_rank = 0;
};

/// W = D^{-1/2} U^T over the retained eigenpairs of a symmetric PSD
/// covariance, so that W cov W^T = I_r.
Eigen::MatrixXd whitening_transform(const Eigen::MatrixXd& cov, const char* what);

/// G <- W_x G, B <- W_x B, Sigma_x <- I_r. The problem must not carry a
/// temporal covariance; use whiten_spatiotemporal() for that.
WhitenResult whiten_spatial(const ForwardProblem& problem);

/// Additionally B <- B W_t^T and records W_t on the problem, so the
/// observation operator becomes W_t (x) G.
WhitenResult whiten_spatiotemporal(const ForwardProblem& problem);

/// whiten_spatiotemporal() when Sigma_t is present, else whiten_spatial().
WhitenResult whiten(const ForwardProblem& problem);

}  // namespace kroneig
