#pragma once

#include <Eigen/Core>

namespace kroneig::linalg {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// weights * rows, where every output entry is accumulated over the inner
/// index in ascending order and nothing else. The result for a given output
/// row depends only on that weights row, so evaluating one row alone or
/// inside a large batch gives identical bits.
RowMatrix ordered_product(const RowMatrix& weights, const RowMatrix& rows);

struct SymmetricEigen {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns
    double clamped = 0.0;     // most negative eigenvalue that was set to zero
};

/// Eigendecomposition of a symmetric PSD matrix. Eigenvalues in
/// [-tol * max, 0) are clamped to zero; anything more negative throws
/// NumericalError naming `what`.
SymmetricEigen psd_eigen(const Eigen::MatrixXd& m, const char* what, double tol = 1e-10);

/// 0.5 (M + M^T).
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

}  // namespace kroneig::linalg
