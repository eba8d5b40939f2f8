#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include <doctest.h>

#include "kroneig/error.hpp"
#include "kroneig/sphere.hpp"
#include "support.hpp"

using namespace kroneig;
using namespace kroneig::sphere;
using std::numbers::pi;

namespace {

// d^n/du^n of (u^2 - 1)^l by expanding the polynomial.
double rodrigues_legendre(int l, int m, double u) {
    // (u^2 - 1)^l = sum_k C(l,k) (-1)^(l-k) u^(2k)
    double deriv = 0.0;
    for (int k = 0; k <= l; ++k) {
        const int power = 2 * k;
        const int order = l + m;
        if (power < order) continue;
        double coeff = std::tgamma(l + 1.0) / (std::tgamma(k + 1.0) * std::tgamma(l - k + 1.0));
        coeff *= ((l - k) % 2 == 0) ? 1.0 : -1.0;
        coeff *= std::tgamma(power + 1.0) / std::tgamma(power - order + 1.0);
        deriv += coeff * std::pow(u, power - order);
    }
    // P_l^m = (1 - u^2)^{m/2} / (2^l l!) d^{l+m}/du^{l+m} (u^2 - 1)^l, no Condon-Shortley phase.
    return std::pow(1.0 - u * u, 0.5 * m) / (std::pow(2.0, l) * std::tgamma(l + 1.0)) * deriv;
}

}  // namespace

TEST_CASE("chordal and geodesic distances at the canonical configurations") {
    const Eigen::Vector3d x(1, 0, 0);
    const Eigen::Vector3d y(0, 1, 0);
    CHECK(chordal_distance(x, x) == 0.0);
    CHECK(chordal_distance(x, -x) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(chordal_distance(x, y) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(geodesic_distance(x, x) == 0.0);
    CHECK(geodesic_distance(x, -x) == doctest::Approx(pi).epsilon(1e-15));
    CHECK(geodesic_distance(x, y) == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK_THROWS_AS(chordal_distance(Eigen::Vector3d(1, 1, 0), x), PreconditionError);
    CHECK_THROWS_AS(geodesic_distance(x, Eigen::Vector3d(0, 0, 2)), PreconditionError);
}

TEST_CASE("distances are symmetric, bounded and related by the chord formula") {
    testing::Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Vector3d a = testing::random_unit(rng);
        const Eigen::Vector3d b = testing::random_unit(rng);
        const double c = chordal_distance(a, b);
        const double g = geodesic_distance(a, b);
        CHECK(c == chordal_distance(b, a));
        CHECK(g == geodesic_distance(b, a));
        CHECK(c >= 0.0);
        CHECK(c <= 2.0);
        CHECK(g <= pi);
        CHECK(c == doctest::Approx(2.0 * std::sin(g / 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("spherical coordinates round trip") {
    testing::Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const Eigen::Vector3d x = testing::random_unit(rng);
        CHECK((to_cartesian(to_spherical(x)) - x).norm() < 1e-14);
    }
}

TEST_CASE("associated Legendre low orders") {
    CHECK(associated_legendre(0, 0, -0.3) == 1.0);
    CHECK(associated_legendre(1, 0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    // Frozen from an independent library evaluation with the phase removed.
    CHECK(associated_legendre(2, 1, 0.3) == doctest::Approx(0.8585452812752513).epsilon(1e-14));
    CHECK(associated_legendre(4, 3, -0.6) == doctest::Approx(-32.256).epsilon(1e-13));
    CHECK(associated_legendre(4, 4, 0.25) == doctest::Approx(92.28515625).epsilon(1e-13));
}

TEST_CASE("recurrence agrees with the Rodrigues formula up to l = 8") {
    testing::Rng rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = u(rng);
        for (int l = 0; l <= 8; ++l) {
            for (int m = 0; m <= l; ++m) {
                const double expected = rodrigues_legendre(l, m, x);
                CHECK(associated_legendre(l, m, x) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
            }
        }
    }
}

TEST_CASE("real spherical harmonics at fixed points") {
    const SphericalCoord c{0.7, 1.3};
    CHECK(real_spherical_harmonic(0, 0, c) == doctest::Approx(1.0 / std::sqrt(4 * pi)).epsilon(1e-15));
    CHECK(real_spherical_harmonic(1, 0, SphericalCoord{0.0, 0.4}) ==
          doctest::Approx(std::sqrt(3.0 / (4 * pi))).epsilon(1e-15));
    const std::tuple<int, int, double> frozen[] = {
        {1, 1, 0.08419963799299883},  {2, 1, 0.14400151502355976}, {2, -2, -0.11687074592451081},
        {3, 0, -0.02143002045045483}, {4, 3, -0.2627672538706009}, {4, -1, -0.34778212891911187},
    };
    for (const auto& [l, m, v] : frozen) {
        CAPTURE(l);
        CAPTURE(m);
        CHECK(real_spherical_harmonic(l, m, c) == doctest::Approx(v).epsilon(1e-13));
    }
}

TEST_CASE("addition theorem: sum over m of Y_l^m squared is (2l+1)/(4 pi)") {
    testing::Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const SphericalCoord c = to_spherical(testing::random_unit(rng));
        const Eigen::VectorXd y = real_spherical_harmonics(8, c);
        for (int l = 0; l <= 8; ++l) {
            double s = 0.0;
            for (int m = -l; m <= l; ++m) s += y[l * l + l + m] * y[l * l + l + m];
            CHECK(s == doctest::Approx((2 * l + 1) / (4 * pi)).epsilon(1e-12));
        }
    }
}

TEST_CASE("batched harmonics match the single evaluation") {
    const SphericalCoord c{2.1, -0.4};
    const Eigen::VectorXd y = real_spherical_harmonics(6, c);
    REQUIRE(y.size() == 49);
    for (int l = 0; l <= 6; ++l) {
        for (int m = -l; m <= l; ++m) CHECK(y[l * l + l + m] == doctest::Approx(real_spherical_harmonic(l, m, c)).epsilon(1e-14));
    }
}

TEST_CASE("harmonics are orthonormal under quadrature for l <= 4") {
    double worst = 0.0;
    for (int l1 = 0; l1 <= 4; ++l1) {
        for (int m1 = -l1; m1 <= l1; ++m1) {
            for (int l2 = 0; l2 <= 4; ++l2) {
                for (int m2 = -l2; m2 <= l2; ++m2) {
                    const double v = testing::sphere_integral(
                        [&](const Eigen::Vector3d& x) {
                            const SphericalCoord c = to_spherical(x);
                            return real_spherical_harmonic(l1, m1, c) * real_spherical_harmonic(l2, m2, c);
                        },
                        12, 24);
                    const double expected = (l1 == l2 && m1 == m2) ? 1.0 : 0.0;
                    worst = std::max(worst, std::abs(v - expected));
                }
            }
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("Abel-Poisson kernel values and normalization") {
    const Eigen::Vector3d c(0, 0, 1);
    CHECK(abel_poisson(c, c, 0.8) == doctest::Approx(3.5809862195676394).epsilon(1e-14));
    CHECK(abel_poisson(-c, c, 0.8) == doctest::Approx(0.004912189601601706).epsilon(1e-13));
    CHECK(abel_poisson(Eigen::Vector3d(1, 0, 0), c, 1e-9) == doctest::Approx(1.0 / (4 * pi)).epsilon(1e-8));
    const double total = testing::sphere_integral([&](const Eigen::Vector3d& x) { return abel_poisson(x, c, 0.8); }, 200, 8);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(abel_poisson(c, c, 1.0), PreconditionError);
    CHECK_THROWS_AS(abel_poisson(c, c, 0.0), PreconditionError);
}

TEST_CASE("icosphere node counts follow 10 * 4^level + 2") {
    CHECK(icosphere_nodes(0).nodes.rows() == 12);
    CHECK(icosphere_nodes(1).nodes.rows() == 42);
    CHECK(icosphere_nodes(2).nodes.rows() == 162);
    CHECK(icosphere_nodes(3).nodes.rows() == 642);
    CHECK(icosphere_nodes(4).nodes.rows() == 2562);
    CHECK_THROWS_AS(icosphere_nodes(-1), PreconditionError);
    CHECK_THROWS_AS(icosphere_nodes(kMaxIcosphereLevel + 1), PreconditionError);
}

TEST_CASE("icosphere nodes are unit, distinct, sorted and shared by the cache") {
    const IcosphereNodes n = icosphere_nodes(2);
    double min_dist = 10.0;
    for (Eigen::Index i = 0; i < n.nodes.rows(); ++i) {
        CHECK(std::abs(n.nodes.row(i).norm() - 1.0) < 1e-14);
        for (Eigen::Index j = i + 1; j < n.nodes.rows(); ++j) {
            min_dist = std::min(min_dist, (n.nodes.row(i) - n.nodes.row(j)).norm());
        }
        if (i > 0) {
            const auto a = n.nodes.row(i - 1);
            const auto b = n.nodes.row(i);
            CHECK(std::make_tuple(a(0), a(1), a(2)) < std::make_tuple(b(0), b(1), b(2)));
        }
    }
    CHECK(min_dist > 0.2);
    const IcosphereNodes& cached = cached_icosphere_nodes(2);
    CHECK(&cached == &cached_icosphere_nodes(2));
    CHECK(cached.nodes == n.nodes);
}
