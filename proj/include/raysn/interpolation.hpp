// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "raysn/geometry.hpp"
#include "raysn/quadrature.hpp"

namespace raysn {

namespace detail {

// p lies inside the spherical cone of the (counterclockwise) triangle iff the
// three edge determinants share sign. Ties within the tolerance count as
// inside so boundary points are assigned to the first candidate in search
// order, deterministically.
inline bool triangle_contains(const OctahedralQuadrature& quad, int t, const Vec3& p, double tol = 1e-14) {
    const auto& tri = quad.triangles[t];
    const Vec3& a = quad.points[tri[0]];
    const Vec3& b = quad.points[tri[1]];
    const Vec3& c = quad.points[tri[2]];
    return triple(a, b, p) >= -tol && triple(b, c, p) >= -tol && triple(c, a, p) >= -tol;
}

}  // namespace detail

/// Find a triangle whose spherical cone contains p. Checks the triangles
/// incident to hint_vertex first, then expands breadth-first through the
/// connectivity, then falls back to a global scan. Failure of the global scan
/// means the tiling is broken (corrupted connectivity) and throws.
inline int locate_triangle(const OctahedralQuadrature& quad, const Vec3& p, int hint_vertex) {
    if (hint_vertex < 0 || hint_vertex >= static_cast<int>(quad.size()))
        throw std::invalid_argument("locate_triangle: hint vertex out of range");

    std::vector<char> visited(quad.triangles.size(), 0);
    std::vector<int> queue;
    queue.reserve(64);
    for (int t : quad.vertex_triangles[hint_vertex]) {
        queue.push_back(t);
        visited[t] = 1;
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int t = queue[head];
        if (detail::triangle_contains(quad, t, p)) return t;
        for (int v : quad.triangles[t])
            for (int tn : quad.vertex_triangles[v])
                if (!visited[tn]) {
                    visited[tn] = 1;
                    queue.push_back(tn);
                }
    }
    // Connectivity did not reach every triangle; scan what is left with a
    // looser tolerance before declaring the tiling broken.
    for (int t = 0; t < static_cast<int>(quad.triangles.size()); ++t)
        if (detail::triangle_contains(quad, t, p, 1e-12)) return t;
    throw std::runtime_error("locate_triangle: point not contained in any triangle (corrupted connectivity)");
}

/// Barycentric weights of p inside the given spherical triangle: w_i is the
/// spherical area of the sub-triangle opposite vertex i over the total.
/// Degenerate sub-areas below 1e-16 are clamped to zero before the
/// normalization, so vertices map to exact unit weights.
inline std::array<double, 3> spherical_barycentric_weights(const OctahedralQuadrature& quad, int t,
                                                           const Vec3& p) {
    const auto& tri = quad.triangles[t];
    const Vec3& a = quad.points[tri[0]];
    const Vec3& b = quad.points[tri[1]];
    const Vec3& c = quad.points[tri[2]];
    std::array<double, 3> w = {std::abs(spherical_triangle_area(p, b, c)),
                               std::abs(spherical_triangle_area(a, p, c)),
                               std::abs(spherical_triangle_area(a, b, p))};
    for (double& x : w)
        if (x < 1e-16) x = 0.0;
    const double sum = w[0] + w[1] + w[2];
    if (sum <= 0.0) throw std::runtime_error("spherical_barycentric_weights: degenerate triangle");
    for (double& x : w) x /= sum;
    return w;
}

/// Row-sparse nonnegative map from flux values at the source ordinates to
/// values at target points: exactly three entries per row, the barycentric
/// weights of the target point inside its containing source triangle. Rows
/// sum to one, so constants are fixed points and convexity bounds hold.
struct InterpolationOperator {
    std::vector<std::array<int, 3>> cols;
    std::vector<std::array<double, 3>> weights;
    std::vector<int> triangle;  // containing source triangle per row

    std::size_t rows() const { return cols.size(); }
};

inline InterpolationOperator build_interpolation_operator(const OctahedralQuadrature& source,
                                                          const std::vector<Direction>& targets) {
    InterpolationOperator op;
    const std::size_t n = targets.size();
    op.cols.resize(n);
    op.weights.resize(n);
    op.triangle.resize(n);
    for (std::size_t q = 0; q < n; ++q) {
        const int hint = q < source.size() ? static_cast<int>(q) : 0;
        const int t = locate_triangle(source, targets[q], hint);
        auto w = spherical_barycentric_weights(source, t, targets[q]);
        for (double& x : w)
            if (x < 0.0 && x > -1e-14) x = 0.0;
        op.cols[q] = source.triangles[t];
        op.weights[q] = w;
        op.triangle[q] = t;
    }
    return op;
}

/// Sparse matrix-vector product over one ordinate vector.
inline std::vector<double> apply_interpolation(const InterpolationOperator& op,
                                               std::span<const double> values) {
    if (values.size() != op.rows())
        throw std::invalid_argument("apply_interpolation: value count does not match operator");
    std::vector<double> out(op.rows());
    for (std::size_t q = 0; q < op.rows(); ++q) {
        const auto& c = op.cols[q];
        const auto& w = op.weights[q];
        out[q] = w[0] * values[c[0]] + w[1] * values[c[1]] + w[2] * values[c[2]];
    }
    return out;
}

/// Rescale new_values so the weighted mass of old_values is recovered
/// exactly. Zero old and new mass passes values through; interpolation that
/// annihilated positive mass indicates a corrupt operator and throws.
inline std::vector<double> conservative_rescale(std::span<const double> new_values,
                                                std::span<const double> old_values,
                                                std::span<const double> weights) {
    double mass_new = 0.0;
    double mass_old = 0.0;
    for (std::size_t q = 0; q < weights.size(); ++q) {
        mass_new += weights[q] * new_values[q];
        mass_old += weights[q] * old_values[q];
    }
    std::vector<double> out(new_values.begin(), new_values.end());
    if (mass_new == 0.0) {
        if (mass_old == 0.0) return out;
        throw std::runtime_error("conservative_rescale: interpolation annihilated mass");
    }
    const double factor = mass_old / mass_new;
    for (double& x : out) x *= factor;
    return out;
}

/// Periodic linear interpolation in the azimuthal index, the z-axis rotation
/// variant for the product quadrature. values holds mu-major rings of length
/// phi_count. fraction a in [-1, 1]: positive a interpolates towards the next
/// phi node, negative towards the previous one. Conserves the ring sum.
inline std::vector<double> phi_rotate_interpolate_1d(std::span<const double> values, double a,
                                                     int phi_count) {
    if (phi_count <= 0 || values.size() % static_cast<std::size_t>(phi_count) != 0)
        throw std::invalid_argument("phi_rotate_interpolate_1d: bad ring length");
    if (std::abs(a) > 1.0) throw std::invalid_argument("phi_rotate_interpolate_1d: |a| must be <= 1");
    const int step = a >= 0.0 ? 1 : phi_count - 1;
    const double frac = std::abs(a);
    std::vector<double> out(values.size());
    const std::size_t rings = values.size() / phi_count;
    for (std::size_t k = 0; k < rings; ++k) {
        const std::size_t base = k * phi_count;
        for (int i = 0; i < phi_count; ++i)
            out[base + i] = (1.0 - frac) * values[base + i] + frac * values[base + (i + step) % phi_count];
    }
    return out;
}

}  // namespace raysn
