#include "kroneig/linalg.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Eigenvalues>

#include "kroneig/error.hpp"

namespace kroneig::linalg {

RowMatrix ordered_product(const RowMatrix& weights, const RowMatrix& rows) {
    if (weights.cols() != rows.rows()) {
        throw DimensionError("ordered_product: inner dimensions " + std::to_string(weights.cols()) + " and " +
                             std::to_string(rows.rows()) + " differ");
    }
    const Eigen::Index n_out = weights.rows();
    const Eigen::Index n_inner = weights.cols();
    const Eigen::Index width = rows.cols();
    RowMatrix out = RowMatrix::Zero(n_out, width);
    constexpr Eigen::Index kBlock = 8;
    const Eigen::Index n_blocks = (n_out + kBlock - 1) / kBlock;

#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
        const Eigen::Index first = blk * kBlock;
        const Eigen::Index last = std::min(first + kBlock, n_out);
        for (Eigen::Index m = 0; m < n_inner; ++m) {
            const double* src = rows.data() + m * width;
            for (Eigen::Index r = first; r < last; ++r) {
                const double w = weights(r, m);
                if (w == 0.0) continue;
                double* dst = out.data() + r * width;
                for (Eigen::Index k = 0; k < width; ++k) dst[k] += w * src[k];
            }
        }
    }
    return out;
}

SymmetricEigen psd_eigen(const Eigen::MatrixXd& m, const char* what, double tol) {
    if (m.rows() != m.cols()) throw DimensionError(std::string(what) + " is not square");
    SymmetricEigen out;
    if (m.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    if (eig.info() != Eigen::Success) throw NumericalError(std::string("eigendecomposition of ") + what + " failed");
    out.values = eig.eigenvalues();
    out.vectors = eig.eigenvectors();
    const double top = std::max(out.values.maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < out.values.size(); ++i) {
        const double v = out.values[i];
        if (v >= 0.0) continue;
        if (v < -tol * top) {
            throw NumericalError(std::string(what) + " is indefinite: eigenvalue " + std::to_string(v) +
                                 " against largest " + std::to_string(top));
        }
        out.clamped = std::min(out.clamped, v);
        out.values[i] = 0.0;
    }
    return out;
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace kroneig::linalg
