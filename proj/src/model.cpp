#include "kroneig/model.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "kroneig/error.hpp"

namespace kroneig {
namespace {

std::string shape(const Eigen::MatrixXd& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void check_covariance(const Eigen::MatrixXd& cov, Eigen::Index n, const char* name, std::vector<std::string>& out) {
    if (cov.rows() != n || cov.cols() != n) {
        out.push_back(std::string(name) + " is " + shape(cov) + ", expected " + std::to_string(n) + "x" +
                      std::to_string(n));
        return;
    }
    if (!cov.allFinite()) {
        out.push_back(std::string(name) + " has non-finite entries");
        return;
    }
    if (n == 0) return;
    const double scale = cov.cwiseAbs().maxCoeff();
    const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTolerance * scale) {
        out.push_back(std::string(name) + " is not symmetric (max asymmetry " + std::to_string(asym) + ")");
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    if (!(top > 0.0)) {
        out.push_back(std::string(name) + " has no positive eigenvalue");
    } else if (eig.eigenvalues().minCoeff() < -1e-10 * top) {
        out.push_back(std::string(name) + " is not positive semidefinite");
    }
}

}  // namespace

std::vector<std::string> validate(const ForwardProblem& p) {
    std::vector<std::string> out;
    const Eigen::Index nn = p.lead_field.rows();
    const Eigen::Index nm = p.lead_field.cols();
    const Eigen::Index nt = p.time_points.size();

    if (p.source_points.rows() != nm) {
        out.push_back("lead field has " + std::to_string(nm) + " columns but there are " +
                      std::to_string(p.source_points.rows()) + " source points");
    }
    if (p.sensor_data.rows() != nn) {
        out.push_back("sensor data has " + std::to_string(p.sensor_data.rows()) + " rows but lead field has " +
                      std::to_string(nn));
    }
    if (p.temporal_transform) {
        const auto& wt = *p.temporal_transform;
        if (wt.cols() != nt) {
            out.push_back("temporal transform is " + shape(wt) + " but there are " + std::to_string(nt) +
                          " time points");
        }
        if (p.sensor_data.cols() != wt.rows()) {
            out.push_back("sensor data has " + std::to_string(p.sensor_data.cols()) +
                          " columns but temporal transform has " + std::to_string(wt.rows()) + " rows");
        }
    } else if (p.sensor_data.cols() != nt) {
        out.push_back("sensor data has " + std::to_string(p.sensor_data.cols()) + " columns but there are " +
                      std::to_string(nt) + " time points");
    }
    if (!p.lead_field.allFinite()) out.push_back("lead field has non-finite entries");
    if (!p.sensor_data.allFinite()) out.push_back("sensor data has non-finite entries");

    check_covariance(p.noise_cov_spatial, nn, "spatial noise covariance", out);
    if (p.noise_cov_temporal) check_covariance(*p.noise_cov_temporal, nt, "temporal noise covariance", out);

    for (Eigen::Index j = 0; j < p.source_points.rows(); ++j) {
        const double norm = p.source_points.row(j).norm();
        if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
            out.push_back("source point " + std::to_string(j) + " has norm " + std::to_string(norm));
        }
    }
    for (Eigen::Index i = 0; i < nt; ++i) {
        if (!std::isfinite(p.time_points[i])) {
            out.push_back("time point " + std::to_string(i) + " is not finite");
        } else if (i > 0 && !(p.time_points[i] > p.time_points[i - 1])) {
            out.push_back("time points not strictly increasing at index " + std::to_string(i));
        }
    }
    return out;
}

void require_valid(const ForwardProblem& problem) {
    const auto violations = validate(problem);
    if (violations.empty()) return;
    std::string msg = "invalid forward problem:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw DimensionError(msg);
}

}  // namespace kroneig
