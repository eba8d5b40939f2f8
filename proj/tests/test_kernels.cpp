#include <cmath>
#include <numbers>

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "kroneig/error.hpp"
#include "kroneig/kernel_json.hpp"
#include "kroneig/kernels.hpp"
#include "kroneig/sphere.hpp"
#include "support.hpp"

using namespace kroneig;
using std::numbers::pi;

namespace {

const Eigen::Vector3d ex(1, 0, 0);
const Eigen::Vector3d ey(0, 1, 0);

double min_over_max_eigen(const Eigen::MatrixXd& k) {
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues();
    return ev.minCoeff() / ev.maxCoeff();
}

}  // namespace

TEST_CASE("closed-form spatial kernel values") {
    CHECK(eval_spatial(KernelSpec::exponential(1, 1), ex, ex) == 1.0);
    // Chordal distance between ex and ey is sqrt(2).
    CHECK(eval_spatial(KernelSpec::exponential(1, 0.5), ex, ey) == doctest::Approx(0.059105746561956225).epsilon(1e-14));
    CHECK(eval_spatial(KernelSpec::matern32(2, 0.7), ex, ex) == 2.0);
    CHECK(eval_spatial(KernelSpec::rational_quadratic(1, 0.262), ey, ey) == 1.0);
    const double d = std::sqrt(2.0);
    CHECK(eval_spatial(KernelSpec::matern32(1, 0.5), ex, ey) ==
          doctest::Approx((1 + std::sqrt(3.0) * d / 0.5) * std::exp(-std::sqrt(3.0) * d / 0.5)).epsilon(1e-14));
    CHECK(eval_spatial(KernelSpec::rbf(3, 0.5), ex, ey) == doctest::Approx(3 * std::exp(-2.0 / 0.5)).epsilon(1e-14));
    CHECK(eval_spatial(KernelSpec::rational_quadratic(1, 0.5, 2.0), ex, ey) ==
          doctest::Approx(std::pow(1 + 2.0 / (2 * 2.0 * 0.25), -2.0)).epsilon(1e-14));
    CHECK(eval_spatial(KernelSpec::exponential(1, 1, Metric::Geodesic), ex, ey) ==
          doctest::Approx(std::exp(-pi / 2)).epsilon(1e-14));
    CHECK(eval_spatial(KernelSpec::delta(5), ex, ex) == 5.0);
    CHECK(eval_spatial(KernelSpec::delta(5), ex, ey) == 0.0);
}

TEST_CASE("temporal kernel values") {
    CHECK(eval_temporal(KernelSpec::temporal_delta(), 0.3, 0.3) == 1.0);
    CHECK(eval_temporal(KernelSpec::temporal_delta(), 0.3, 0.31) == 0.0);
    CHECK(eval_temporal(KernelSpec::temporal_exponential(0.05), 0.1, 0.15) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-13));
    CHECK(eval_temporal(KernelSpec::temporal_exponential(0.05), 0.2, 0.2) == 1.0);
}

TEST_CASE("harmony kernel against the addition theorem") {
    testing::Rng rng(2);
    const Eigen::Vector3d x = testing::random_unit(rng);
    const Eigen::Vector3d y = testing::random_unit(rng);
    // l_max = 0 keeps only the constant harmonic with weight 1.
    CHECK(eval_harmony(KernelSpec::harmony(3.0, 0), x, y) == doctest::Approx(3.0 * 0.07957747154594767).epsilon(1e-14));
    CHECK(eval_harmony(KernelSpec::harmony(1.0, 1, 0.9), x, x) == doctest::Approx(0.1989436788648692).epsilon(1e-13));
    // Off the diagonal the same theorem gives (2l+1)/(4 pi) P_l(x.y).
    const double u = x.dot(y);
    double expected = 0.0;
    for (int l = 0; l <= 6; ++l) {
        const double w = l == 0 ? 1.0 : 1.0 / (1.0 + std::pow(l, 0.9));
        expected += w * (2 * l + 1) / (4 * pi) * sphere::associated_legendre(l, 0, u);
    }
    CHECK(eval_harmony(KernelSpec::harmony(1.0, 6), x, y) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(basis_size(KernelSpec::harmony(1.0)) == 121);
}

TEST_CASE("spline kernel is a symmetric sum of squares over the icosphere") {
    testing::Rng rng(4);
    const KernelSpec s = KernelSpec::spline(2.0, 0.8, 2);
    CHECK(basis_size(s) == 162);
    const auto& nodes = sphere::cached_icosphere_nodes(2).nodes;
    for (int i = 0; i < 20; ++i) {
        const Eigen::Vector3d x = testing::random_unit(rng);
        const Eigen::Vector3d y = testing::random_unit(rng);
        CHECK(eval_spline(s, x, y) == eval_spline(s, y, x));
        double sq = 0.0;
        for (Eigen::Index j = 0; j < nodes.rows(); ++j) {
            const double k = sphere::abel_poisson(x, nodes.row(j).transpose(), 0.8);
            sq += k * k;
        }
        CHECK(eval_spline(s, x, x) == doctest::Approx(2.0 * sq).epsilon(1e-12));
        CHECK(eval_spline(s, x, x) > 0.0);
    }
}

TEST_CASE("gram matrices are exactly symmetric and numerically PSD for every family") {
    testing::Rng rng(8);
    const PointSet pts = testing::random_points(10, rng);
    for (const KernelSpec& k : testing::spatial_family(1.7)) {
        CAPTURE(to_string(k.kind));
        const Eigen::MatrixXd g = gram_spatial(k, pts);
        CHECK(g == g.transpose());
        CHECK(min_over_max_eigen(g) >= -1e-10);
        for (Eigen::Index j = 0; j < pts.rows(); ++j) {
            const Eigen::VectorXd c = cross_spatial(k, pts.row(j).transpose(), pts);
            CHECK(c == g.row(j).transpose());
        }
    }
    const Eigen::VectorXd t = testing::random_times(12, rng);
    for (const KernelSpec& k : testing::temporal_family()) {
        const Eigen::MatrixXd g = gram_temporal(k, t);
        CHECK(g == g.transpose());
        CHECK(min_over_max_eigen(g) >= -1e-10);
        for (Eigen::Index i = 0; i < t.size(); ++i) CHECK(cross_temporal(k, t[i], t) == g.row(i).transpose());
    }
}

TEST_CASE("delta grams are scaled identities") {
    testing::Rng rng(9);
    const PointSet pts = testing::random_points(7, rng);
    CHECK(gram_spatial(KernelSpec::delta(2.5), pts) == 2.5 * Eigen::MatrixXd::Identity(7, 7));
    CHECK(gram_temporal(KernelSpec::temporal_delta(), testing::random_times(5, rng)) == Eigen::MatrixXd::Identity(5, 5));
    const Eigen::VectorXd e = cross_spatial(KernelSpec::delta(2.5), pts.row(3).transpose(), pts);
    CHECK(e == 2.5 * Eigen::VectorXd::Unit(7, 3));
}

TEST_CASE("temporal exponential gram decays monotonically away from the diagonal") {
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(15, 0.0, 0.14);
    const Eigen::MatrixXd g = gram_temporal(KernelSpec::temporal_exponential(0.05), t);
    for (Eigen::Index i = 0; i < 15; ++i) {
        for (Eigen::Index j = i + 1; j + 1 < 15; ++j) CHECK(g(i, j + 1) < g(i, j));
    }
}

TEST_CASE("stationary kernels peak at zero distance") {
    testing::Rng rng(12);
    const PointSet pts = testing::random_points(30, rng);
    for (const KernelSpec& k : {KernelSpec::exponential(1.3, 0.2), KernelSpec::matern32(1.3, 0.2), KernelSpec::rbf(1.3, 0.2)}) {
        for (int i = 0; i < 10; ++i) {
            CHECK(cross_spatial(k, testing::random_unit(rng), pts).maxCoeff() <= 1.3);
        }
    }
}

TEST_CASE("invalid specifications are configuration errors") {
    KernelSpec k = KernelSpec::delta(1);
    k.gamma2 = -1;
    CHECK_THROWS_AS(validate(k), ConfigError);
    k = KernelSpec::exponential(1, 0.1);
    k.length_scale.reset();
    CHECK_THROWS_AS(validate(k), ConfigError);
    k.length_scale = 0.0;
    CHECK_THROWS_AS(validate(k), ConfigError);
    k = KernelSpec::rbf(1, 0.3);
    k.metric = Metric::Geodesic;
    CHECK_THROWS_AS(validate(k), ConfigError);
    k = KernelSpec::temporal_exponential(0.05);
    k.gamma2 = 2.0;
    CHECK_THROWS_AS(validate(k), ConfigError);
    CHECK_THROWS_AS(validate(KernelSpec::rational_quadratic(1, 0.3, 0.0)), ConfigError);
    CHECK_THROWS_AS(validate(KernelSpec::spline(1, 1.0)), ConfigError);
    CHECK_THROWS_AS(validate(KernelSpec::harmony(1, 61)), ConfigError);
    CHECK_THROWS_AS(validate(KernelSpec::product(1, KernelSpec::exponential(2, 0.1), KernelSpec::temporal_delta())), ConfigError);
    CHECK_THROWS_AS(make_separable(KernelSpec::temporal_delta(), KernelSpec::temporal_delta()), ConfigError);
    CHECK_THROWS_AS(parse_kernel_kind("GAUSS"), ConfigError);
}

TEST_CASE("aliases resolve to their families") {
    CHECK(parse_kernel_kind("MNE") == KernelKind::Delta);
    CHECK(parse_kernel_kind("EXP") == KernelKind::Exponential);
    CHECK(parse_kernel_kind("MAT") == KernelKind::Matern32);
    CHECK(parse_kernel_kind("RQ") == KernelKind::RationalQuadratic);
    CHECK(parse_kernel_kind("HRM") == KernelKind::Harmony);
    CHECK(parse_kernel_kind("SPL") == KernelKind::Spline);
    CHECK(parse_kernel_kind("TemporalExponential") == KernelKind::TemporalExponential);
}

TEST_CASE("a product spec carries its magnitude on the spatial half") {
    const KernelSpec p = KernelSpec::product(4.0, KernelSpec::exponential(1, 0.2), KernelSpec::temporal_exponential(0.05));
    const SeparableKernel s = make_separable(p);
    CHECK(s.gamma2() == 4.0);
    const Eigen::Vector3d x(0, 0, 1);
    const Eigen::Vector3d y = Eigen::Vector3d(0.3, 0, 1).normalized();
    CHECK(eval_product(p, x, 0.1, y, 0.12) ==
          doctest::Approx(eval_spatial(s.spatial, x, y) * eval_temporal(s.temporal, 0.1, 0.12)).epsilon(1e-15));
}

TEST_CASE("JSON round trip for every kind") {
    std::vector<KernelSpec> all = testing::spatial_family(2.0);
    all.push_back(KernelSpec::exponential(1.0, 0.3, Metric::Geodesic));
    all.push_back(KernelSpec::temporal_delta());
    all.push_back(KernelSpec::temporal_exponential(0.05));
    all.push_back(KernelSpec::product(3.0, KernelSpec::matern32(1, 0.2), KernelSpec::temporal_exponential(0.1)));
    for (const KernelSpec& k : all) {
        const nlohmann::json j = kernel_to_json(k);
        CHECK(kernel_to_json(kernel_from_json(j)) == j);
    }
    const KernelSpec parsed = kernel_from_json(nlohmann::json{{"kind", "EXP"}, {"gamma2", 2.0}, {"length_scale", 0.1}});
    CHECK(parsed.kind == KernelKind::Exponential);
    CHECK(*parsed.length_scale == 0.1);
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"kind", "EXP"}}), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json{{"kind", 3}}), ConfigError);
    CHECK_THROWS_AS(kernel_from_json(nlohmann::json::array()), ConfigError);
}

TEST_CASE("jitter adds a trace-relative ridge") {
    Eigen::MatrixXd k = 2.0 * Eigen::MatrixXd::Identity(4, 4);
    const Eigen::MatrixXd j = add_jitter(k);
    CHECK(j(0, 0) == doctest::Approx(2.0 + 2e-10).epsilon(1e-15));
    CHECK(j(0, 1) == 0.0);
}
