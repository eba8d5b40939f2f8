#include "kroneig/sphere.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>

#include "kroneig/error.hpp"

namespace kroneig::sphere {
namespace {

void require_unit(const Eigen::Vector3d& x, const char* what) {
    if (!(std::abs(x.norm() - 1.0) <= kUnitNormTolerance)) {
        throw PreconditionError(std::string(what) + " must be a unit vector");
    }
}

// sqrt((l - |m|)! / (l + |m|)!) as a running product to avoid overflow.
double factorial_ratio_sqrt(int l, int am) {
    double r = 1.0;
    for (int k = l - am + 1; k <= l + am; ++k) r /= static_cast<double>(k);
    return std::sqrt(r);
}

}  // namespace

SphericalCoord to_spherical(const Eigen::Vector3d& x) {
    const double r = x.norm();
    const double z = std::clamp(x.z() / r, -1.0, 1.0);
    return {std::acos(z), std::atan2(x.y(), x.x())};
}

Eigen::Vector3d to_cartesian(const SphericalCoord& c) {
    const double s = std::sin(c.theta);
    return {s * std::cos(c.phi), s * std::sin(c.phi), std::cos(c.theta)};
}

double chordal_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    require_unit(x, "x");
    require_unit(y, "x'");
    const double dx = x.x() - y.x();
    const double dy = x.y() - y.y();
    const double dz = x.z() - y.z();
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double geodesic_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    require_unit(x, "x");
    require_unit(y, "x'");
    const double dot = x.x() * y.x() + x.y() * y.y() + x.z() * y.z();
    return std::acos(std::clamp(dot, -1.0, 1.0));
}

double associated_legendre(int l, int m, double u) {
    if (l < 0 || m < 0 || m > l) {
        throw PreconditionError("associated_legendre requires 0 <= m <= l, got l=" + std::to_string(l) +
                                " m=" + std::to_string(m));
    }
    if (!(u >= -1.0 && u <= 1.0)) throw PreconditionError("associated_legendre requires u in [-1, 1]");

    // P_m^m = (2m-1)!! (1-u^2)^{m/2}
    double pmm = 1.0;
    const double s = std::sqrt((1.0 - u) * (1.0 + u));
    for (int k = 1; k <= m; ++k) pmm *= static_cast<double>(2 * k - 1) * s;
    if (l == m) return pmm;

    double pm1 = u * static_cast<double>(2 * m + 1) * pmm;
    if (l == m + 1) return pm1;

    double pll = 0.0;
    for (int ll = m + 2; ll <= l; ++ll) {
        pll = (static_cast<double>(2 * ll - 1) * u * pm1 - static_cast<double>(ll + m - 1) * pmm) /
              static_cast<double>(ll - m);
        pmm = pm1;
        pm1 = pll;
    }
    return pll;
}

double real_spherical_harmonic(int l, int m, const SphericalCoord& c) {
    if (l < 0 || std::abs(m) > l) {
        throw PreconditionError("real_spherical_harmonic requires |m| <= l, got l=" + std::to_string(l) +
                                " m=" + std::to_string(m));
    }
    const int am = std::abs(m);
    const double norm = std::sqrt(static_cast<double>(2 * l + 1) / (4.0 * std::numbers::pi)) *
                        factorial_ratio_sqrt(l, am);
    const double p = associated_legendre(l, am, std::cos(c.theta));
    if (m == 0) return norm * p;
    if (m > 0) return norm * p * std::numbers::sqrt2 * std::cos(m * c.phi);
    return norm * p * std::numbers::sqrt2 * std::sin(m * c.phi);
}

Eigen::VectorXd real_spherical_harmonics(int l_max, const SphericalCoord& c) {
    if (l_max < 0) throw PreconditionError("l_max must be nonnegative");
    Eigen::VectorXd out((l_max + 1) * (l_max + 1));
    for (int l = 0; l <= l_max; ++l) {
        for (int m = -l; m <= l; ++m) out[l * l + l + m] = real_spherical_harmonic(l, m, c);
    }
    return out;
}

double abel_poisson(const Eigen::Vector3d& x, const Eigen::Vector3d& center, double h) {
    if (!(h > 0.0 && h < 1.0)) throw PreconditionError("Abel-Poisson scale h must lie in (0, 1)");
    require_unit(x, "x");
    require_unit(center, "center");
    const double dot = x.x() * center.x() + x.y() * center.y() + x.z() * center.z();
    const double base = 1.0 + h * h - 2.0 * h * dot;
    return (1.0 - h * h) / (4.0 * std::numbers::pi * base * std::sqrt(base));
}

IcosphereNodes icosphere_nodes(int level) {
    if (level < 0 || level > kMaxIcosphereLevel) {
        throw PreconditionError("icosphere level must be in [0, " + std::to_string(kMaxIcosphereLevel) + "]");
    }
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1},
    };

    for (int pass = 0; pass < level; ++pass) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
            verts.push_back((verts[a] + verts[b]).normalized());
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    std::sort(verts.begin(), verts.end(), [](const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
        return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    });
    IcosphereNodes out;
    out.level = level;
    out.nodes.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) out.nodes.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
    return out;
}

const IcosphereNodes& cached_icosphere_nodes(int level) {
    if (level < 0 || level > kMaxIcosphereLevel) {
        throw PreconditionError("icosphere level must be in [0, " + std::to_string(kMaxIcosphereLevel) + "]");
    }
    static std::array<std::once_flag, kMaxIcosphereLevel + 1> once;
    static std::array<IcosphereNodes, kMaxIcosphereLevel + 1> cache;
    std::call_once(once[static_cast<std::size_t>(level)], [level] { cache[static_cast<std::size_t>(level)] = icosphere_nodes(level); });
    return cache[static_cast<std::size_t>(level)];
}

}  // namespace kroneig::sphere
