#include <doctest.h>

#include "kroneig/error.hpp"
#include "kroneig/whiten.hpp"
#include "support.hpp"

using namespace kroneig;

namespace {

ForwardProblem raw_problem(Eigen::Index nn, Eigen::Index nm, Eigen::Index nt, testing::Rng& rng) {
    ForwardProblem p = testing::random_whitened(nn, nm, nt, rng);
    p.whitened = false;
    return p;
}

// Sample covariance of the columns of x against the identity, in units of
// the standard error of each entry.
double worst_z(const Eigen::MatrixXd& x) {
    const double n = static_cast<double>(x.cols());
    const Eigen::MatrixXd c = x * x.transpose() / n;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double se = std::sqrt((i == j ? 2.0 : 1.0) / n);
            worst = std::max(worst, std::abs(c(i, j) - (i == j ? 1.0 : 0.0)) / se);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("identity noise leaves norms unchanged") {
    testing::Rng rng(1);
    const ForwardProblem p = raw_problem(6, 15, 5, rng);
    const WhitenResult w = whiten_spatial(p);
    CHECK(w.problem.whitened);
    CHECK(w.spatial_rank == 6);
    CHECK(w.problem.sensor_data.norm() == doctest::Approx(p.sensor_data.norm()).epsilon(1e-13));
    CHECK(testing::rel_err(w.spatial_transform * w.spatial_transform.transpose(), Eigen::MatrixXd::Identity(6, 6)) < 1e-13);
    CHECK(w.problem.noise_cov_spatial == Eigen::MatrixXd::Identity(6, 6));
}

TEST_CASE("scalar noise 4I halves the data norm") {
    testing::Rng rng(2);
    ForwardProblem p = raw_problem(5, 12, 4, rng);
    p.noise_cov_spatial *= 4.0;
    const WhitenResult w = whiten_spatial(p);
    CHECK(w.problem.sensor_data.norm() == doctest::Approx(p.sensor_data.norm() / 2).epsilon(1e-13));
    CHECK(w.problem.lead_field.norm() == doctest::Approx(p.lead_field.norm() / 2).epsilon(1e-13));
}

TEST_CASE("the transform whitens the covariance it was built from") {
    testing::Rng rng(3);
    for (double kappa : {1.0, 1e3, 1e6}) {
        const Eigen::MatrixXd s = testing::random_spd(7, kappa, rng);
        const Eigen::MatrixXd w = whitening_transform(s, "test");
        CHECK(testing::rel_err(w * s * w.transpose(), Eigen::MatrixXd::Identity(7, 7)) < 1e-8);
    }
}

TEST_CASE("rank-deficient covariance drops the null directions") {
    testing::Rng rng(4);
    const Eigen::MatrixXd a = testing::gaussian(6, 4, rng);
    const Eigen::MatrixXd s = a * a.transpose();
    const Eigen::MatrixXd w = whitening_transform(s, "test");
    CHECK(w.rows() == 4);
    CHECK(testing::rel_err(w * s * w.transpose(), Eigen::MatrixXd::Identity(4, 4)) < 1e-10);
    ForwardProblem p = raw_problem(6, 10, 3, rng);
    p.noise_cov_spatial = s;
    const WhitenResult r = whiten(p);
    CHECK(r.spatial_rank == 4);
    CHECK(r.problem.n_sensors() == 4);
    CHECK(validate(r.problem).empty());
}

TEST_CASE("whitened synthetic noise has identity covariance") {
    testing::Rng rng(5);
    const Eigen::MatrixXd s = testing::random_spd(5, 1e4, rng);
    const Eigen::MatrixXd e = Eigen::LLT<Eigen::MatrixXd>(s).matrixL() * testing::gaussian(5, 20000, rng);
    const Eigen::MatrixXd w = whitening_transform(s, "test");
    CHECK(worst_z(w * e) < 4.0);
}

TEST_CASE("spatio-temporal whitening with identity covariances is orthogonal") {
    testing::Rng rng(6);
    ForwardProblem p = raw_problem(4, 10, 6, rng);
    p.noise_cov_temporal = Eigen::MatrixXd::Identity(6, 6);
    const WhitenResult w = whiten_spatiotemporal(p);
    REQUIRE(w.temporal_transform);
    CHECK(w.problem.sensor_data.norm() == doctest::Approx(p.sensor_data.norm()).epsilon(1e-13));
    CHECK(!w.problem.noise_cov_temporal);
    CHECK(w.problem.temporal_transform->rows() == 6);
    CHECK(validate(w.problem).empty());

    ForwardProblem q = p;
    q.noise_cov_temporal = 9.0 * Eigen::MatrixXd::Identity(6, 6);
    const WhitenResult v = whiten(q);
    CHECK(v.problem.sensor_data.norm() == doctest::Approx(p.sensor_data.norm() / 3).epsilon(1e-13));
}

TEST_CASE("Kronecker noise becomes white") {
    testing::Rng rng(7);
    const Eigen::MatrixXd sx = testing::random_spd(3, 100.0, rng);
    const Eigen::MatrixXd st = testing::random_spd(3, 10.0, rng);
    const Eigen::MatrixXd lx = Eigen::LLT<Eigen::MatrixXd>(sx).matrixL();
    const Eigen::MatrixXd lt = Eigen::LLT<Eigen::MatrixXd>(st).matrixL();
    const Eigen::MatrixXd wx = whitening_transform(sx, "x");
    const Eigen::MatrixXd wt = whitening_transform(st, "t");
    const int n = 20000;
    Eigen::MatrixXd samples(9, n);
    for (int k = 0; k < n; ++k) {
        const Eigen::MatrixXd e = lx * testing::gaussian(3, 3, rng) * lt.transpose();
        samples.col(k) = (wx * e * wt.transpose()).reshaped();
    }
    CHECK(worst_z(samples) < 4.5);
}

TEST_CASE("whitening preconditions") {
    testing::Rng rng(8);
    ForwardProblem p = testing::random_whitened(4, 9, 3, rng);
    CHECK_THROWS_AS(whiten(p), PreconditionError);
    p.whitened = false;
    p.noise_cov_temporal = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(whiten_spatial(p), PreconditionError);
    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(whitening_transform(asym, "asym"), PreconditionError);
    CHECK_THROWS_AS(whitening_transform(Eigen::MatrixXd::Zero(3, 3), "zero"), NumericalError);
}
