#pragma once

#include <vector>

#include <Eigen/Core>

#include "kroneig/model.hpp"

namespace kroneig::sphere {

/// Colatitude theta in [0, pi], azimuth phi in [-pi, pi].
struct SphericalCoord {
    double theta = 0.0;
    double phi = 0.0;
};

SphericalCoord to_spherical(const Eigen::Vector3d& x);
Eigen::Vector3d to_cartesian(const SphericalCoord& c);

/// Euclidean distance of two unit vectors in the 3-D embedding, in [0, 2].
double chordal_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y);

/// Great-circle angle of two unit vectors, in [0, pi].
double geodesic_distance(const Eigen::Vector3d& x, const Eigen::Vector3d& y);

/// Unnormalized associated Legendre function P_l^m(u) without the
/// Condon-Shortley phase, via the standard upward recurrence in l.
double associated_legendre(int l, int m, double u);

/// Orthonormal real spherical harmonic. Positive m use sqrt(2) cos(m phi),
/// negative m use sqrt(2) sin(m phi).
double real_spherical_harmonic(int l, int m, const SphericalCoord& c);

/// All real harmonics for l = 0..l_max at one point, ordered by l then
/// m = -l..l; the entry for (l, m) sits at index l*l + l + m.
Eigen::VectorXd real_spherical_harmonics(int l_max, const SphericalCoord& c);

/// Abel-Poisson kernel (1 - h^2) / (4 pi (1 + h^2 - 2 h x.c)^{3/2}), 0 < h < 1.
double abel_poisson(const Eigen::Vector3d& x, const Eigen::Vector3d& center, double h);

inline constexpr int kMaxIcosphereLevel = 6;

struct IcosphereNodes {
    int level = 0;
    PointSet nodes;  // 10 * 4^level + 2 unit vectors, lexicographically sorted
};

/// Midpoint-subdivided icosahedron reprojected onto the unit sphere.
IcosphereNodes icosphere_nodes(int level);

/// Same as icosphere_nodes() but computed once per level and shared.
const IcosphereNodes& cached_icosphere_nodes(int level);

}  // namespace kroneig::sphere
