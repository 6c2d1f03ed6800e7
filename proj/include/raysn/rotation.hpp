// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "raysn/geometry.hpp"
#include "raysn/quadrature.hpp"
#include "raysn/rng.hpp"

namespace raysn {

struct RotationSpec {
    Direction axis;  // unit
    double angle = 0.0;  // radians
};

/// Axis-angle rotation matrix (Rodrigues form): orthogonal, det +1.
inline Mat3 rotation_matrix(const RotationSpec& spec) {
    const Vec3& n = spec.axis;
    if (std::abs(dot(n, n) - 1.0) > 2e-8) throw std::invalid_argument("rotation axis must be unit length");
    const double c = std::cos(spec.angle);
    const double s = std::sin(spec.angle);
    const double k = 1.0 - c;
    Mat3 r;
    r(0, 0) = n.x * n.x * k + c;
    r(0, 1) = n.x * n.y * k - n.z * s;
    r(0, 2) = n.x * n.z * k + n.y * s;
    r(1, 0) = n.y * n.x * k + n.z * s;
    r(1, 1) = n.y * n.y * k + c;
    r(1, 2) = n.y * n.z * k - n.x * s;
    r(2, 0) = n.z * n.x * k - n.y * s;
    r(2, 1) = n.z * n.y * k + n.x * s;
    r(2, 2) = n.z * n.z * k + c;
    return r;
}

/// Direction distributed uniformly on the unit sphere; deterministic given
/// the generator state.
inline Direction random_axis(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return normalized({r * std::cos(phi), r * std::sin(phi), z});
}

// No renormalization here: the zero-angle matrix is the exact identity and
// must return bit-identical points. Orthogonality keeps the drift at ~1 ulp
// per application; long rotation chains renormalize periodically in the
// solver loop.
inline std::vector<Direction> rotate_points(const std::vector<Direction>& points, const Mat3& r) {
    std::vector<Direction> out(points.size());
    for (std::size_t q = 0; q < points.size(); ++q) out[q] = r * points[q];
    return out;
}

/// Rotate the point set; weights, triangles and adjacency are kept.
inline OctahedralQuadrature rotate_quadrature(const OctahedralQuadrature& quad, const Mat3& r) {
    OctahedralQuadrature out = quad;
    out.points = rotate_points(quad.points, r);
    return out;
}

}  // namespace raysn
