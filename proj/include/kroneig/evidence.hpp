#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "kroneig/kernels.hpp"
#include "kroneig/model.hpp"
#include "kroneig/solver.hpp"

namespace kroneig {

/// Negative log marginal likelihood of vec(B) and its three terms.
struct EvidenceResult {
    double nll = 0.0;
    double logdet = 0.0;     // 1/2 sum log(lambda_x lambda_t + 1)
    double quadratic = 0.0;  // 1/2 sum Pi o (V_x^T B V_t)^2
    double constant = 0.0;   // (n_n n_t / 2) log(2 pi)
    double gamma2 = 0.0;
};

/// Evidence at the state's own magnitude.
EvidenceResult nll(const SolverState& state, const Eigen::MatrixXd& data);

/// Evidence with lambda_x scaled to gamma2 * lambda_x_unit; reuses the
/// state's eigendecompositions.
EvidenceResult nll_gamma_scaled(const SolverState& state, double gamma2, const Eigen::MatrixXd& data);

/// d nll / d log(gamma2), from the eigenvalue form.
double nll_gradient_log_gamma2(const SolverState& state, double gamma2, const Eigen::MatrixXd& data);

/// The magnitude at which the prior's average signal power equals the
/// whitened noise power: n_n n_t / (sum lambda_x_unit * sum lambda_t).
double gamma2_reference(const SolverState& state);

/// Search interval for gamma2. With `relative` the limits multiply
/// gamma2_reference(), so the search follows the units of the data.
struct GammaBounds {
    double lower = 1e-8;
    double upper = 1e8;
    bool relative = true;
};

struct GammaOptimum {
    double gamma2 = 0.0;
    EvidenceResult evidence;
    int evaluations = 0;
    bool grid_fallback = false;  // golden section saw a non-unimodal objective
};

/// Minimizes nll over log(gamma2) inside `bounds` by bracket expansion and
/// golden-section search, falling back to a 64-point log grid when the
/// objective is not unimodal. The result is never worse than either bound.
GammaOptimum optimize_gamma(const SolverState& state, const Eigen::MatrixXd& data, GammaBounds bounds = {});

struct EvidenceRow {
    double length_x = 0.0;
    double length_t = 0.0;
    double gamma2_opt = 0.0;
    double nll = 0.0;
    double logdet = 0.0;
    double quadratic = 0.0;
};

/// Spatial length-scales tried by default: the empirical 0.1, the spline
/// equivalent 0.262 and the sensor-count cutoff 0.5.
inline const std::vector<double> kDefaultSpatialLengths = {0.1, 0.262, 0.5};
inline const std::vector<double> kDefaultTemporalLengths = {0.05};

/// For every (l_x, l_t) pair, rebuilds the decompositions and optimizes
/// gamma2. Rows come back sorted by nll ascending. Kernels without a
/// length-scale collapse their axis to one entry reported as 0.
std::vector<EvidenceRow> evidence_grid(const ForwardProblem& whitened, const KernelSpec& spatial,
                                       const KernelSpec& temporal, const std::vector<double>& spatial_lengths,
                                       const std::vector<double>& temporal_lengths, GammaBounds bounds = {});

/// `lx,lt,gamma2_opt,nll,logdet,quad` with a header row, LF line endings.
std::string evidence_csv(const std::vector<EvidenceRow>& rows);

}  // namespace kroneig
