// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "raysn/geometry.hpp"

namespace raysn {

/// Quadrature built from an equidistant triangulation of the octahedron
/// faces, projected onto the unit sphere. N is the number of vertices per
/// octant edge; the point count follows N_q = 4N^2 - 8N + 6. The weight of a
/// vertex is the spherical area of its dual cell, the polygon through the
/// midpoints of the incident triangles (a quadrilateral at the six poles, a
/// hexagon elsewhere). The triangulation is kept because the solver
/// interpolates on it after each rotation step.
struct OctahedralQuadrature {
    int order = 0;  // N
    std::vector<Direction> points;
    std::vector<double> weights;  // steradians, sum 4*pi
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::vector<int>> vertex_triangles;

    std::size_t size() const { return points.size(); }
};

/// Tensorized comparison quadrature: 2N equispaced azimuthal nodes times N/2
/// Gauss-Legendre nodes in mu = cos(theta). Point index = k * phi_count + i
/// so that each mu ring is contiguous.
struct ProductQuadrature {
    int order = 0;      // N, even
    int phi_count = 0;  // 2N
    int mu_count = 0;   // N/2
    std::vector<Direction> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    double delta_phi() const { return 2.0 * std::numbers::pi / phi_count; }
};

constexpr int octahedral_point_count(int n) { return 4 * n * n - 8 * n + 6; }

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

}  // namespace detail

/// Build the triangulated octahedral quadrature of order N >= 2.
inline OctahedralQuadrature build_octahedral_quadrature(int n) {
    if (n < 2) throw std::invalid_argument("octahedral quadrature requires N >= 2");

    OctahedralQuadrature quad;
    quad.order = n;
    const int rows = n - 1;  // barycentric index range per octant face

    // Vertices shared between octants (on the coordinate planes) are stored
    // once. Key = integer barycentric coordinates with octant signs applied;
    // zero components drop their sign so mirrored copies collide.
    std::map<std::array<int, 3>, int> vertex_ids;
    const int signs[8][3] = {{+1, +1, +1}, {+1, +1, -1}, {+1, -1, +1}, {+1, -1, -1},
                             {-1, +1, +1}, {-1, +1, -1}, {-1, -1, +1}, {-1, -1, -1}};

    auto vertex_id = [&](const int s[3], int b0, int b1, int b2) {
        const std::array<int, 3> key = {b0 == 0 ? 0 : s[0] * b0, b1 == 0 ? 0 : s[1] * b1,
                                        b2 == 0 ? 0 : s[2] * b2};
        auto [it, inserted] = vertex_ids.try_emplace(key, static_cast<int>(quad.points.size()));
        if (inserted)
            quad.points.push_back(normalized({static_cast<double>(key[0]), static_cast<double>(key[1]),
                                              static_cast<double>(key[2])}));
        return it->second;
    };

    auto add_triangle = [&](int a, int b, int c) {
        // orient counterclockwise seen from outside
        if (triple(quad.points[a], quad.points[b], quad.points[c]) < 0.0) std::swap(b, c);
        quad.triangles.push_back({a, b, c});
    };

    for (const auto& s : signs) {
        // grid point (i, j) has barycentric coordinates (rows - i - j, i, j)
        for (int i = 0; i + 1 <= rows; ++i) {
            for (int j = 0; i + j + 1 <= rows; ++j) {
                const int v00 = vertex_id(s, rows - i - j, i, j);
                const int v10 = vertex_id(s, rows - i - j - 1, i + 1, j);
                const int v01 = vertex_id(s, rows - i - j - 1, i, j + 1);
                add_triangle(v00, v10, v01);
                if (i + j + 2 <= rows) {
                    const int v11 = vertex_id(s, rows - i - j - 2, i + 1, j + 1);
                    add_triangle(v10, v11, v01);
                }
            }
        }
    }

    quad.vertex_triangles.resize(quad.points.size());
    for (int t = 0; t < static_cast<int>(quad.triangles.size()); ++t)
        for (int v : quad.triangles[t]) quad.vertex_triangles[v].push_back(t);

    // Dual-cell weights. The cell around a vertex connects the midpoints of
    // the surrounding triangles; it is assembled share by share: inside each
    // spherical triangle, the geodesic cell boundaries run from the edge
    // midpoints to the triangle midpoint, so the quad (vertex, midpoint,
    // center, midpoint) is the share one triangle contributes to one vertex.
    // The three shares tile the triangle exactly, which forces the weights to
    // sum to 4*pi.
    quad.weights.assign(quad.points.size(), 0.0);
    for (const auto& tri : quad.triangles) {
        const Vec3& a = quad.points[tri[0]];
        const Vec3& b = quad.points[tri[1]];
        const Vec3& c = quad.points[tri[2]];
        const Vec3 center = normalized((a + b + c) / 3.0);
        const Vec3 mid_ab = normalized((a + b) * 0.5);
        const Vec3 mid_bc = normalized((b + c) * 0.5);
        const Vec3 mid_ca = normalized((c + a) * 0.5);

        auto share = [&](int v, const Vec3& m1, const Vec3& m2) {
            const Vec3& p = quad.points[v];
            quad.weights[v] += std::abs(spherical_triangle_area(p, m1, center) +
                                        spherical_triangle_area(p, center, m2));
        };
        share(tri[0], mid_ab, mid_ca);
        share(tri[1], mid_bc, mid_ab);
        share(tri[2], mid_ca, mid_bc);
    }

    return quad;
}

/// Build the tensorized product quadrature of even order N >= 2.
inline ProductQuadrature build_product_quadrature(int n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("product quadrature requires even N >= 2");

    ProductQuadrature quad;
    quad.order = n;
    quad.phi_count = 2 * n;
    quad.mu_count = n / 2;

    std::vector<double> mu, w_mu;
    detail::gauss_legendre(quad.mu_count, mu, w_mu);

    const double dphi = quad.delta_phi();
    quad.points.reserve(static_cast<std::size_t>(n) * n);
    quad.weights.reserve(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < quad.mu_count; ++k) {
        const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu[k] * mu[k]));
        for (int i = 0; i < quad.phi_count; ++i) {
            const double phi = dphi * (i + 1);
            quad.points.push_back({std::cos(phi) * sin_theta, std::sin(phi) * sin_theta, mu[k]});
            quad.weights.push_back(dphi * w_mu[k]);
        }
    }
    return quad;
}

template <class F>
double integrate(std::span<const Direction> points, std::span<const double> weights, F&& f) {
    double sum = 0.0;
    for (std::size_t q = 0; q < points.size(); ++q) sum += weights[q] * f(points[q]);
    return sum;
}

template <class F>
double integrate(const OctahedralQuadrature& quad, F&& f) {
    return integrate(std::span<const Direction>(quad.points), std::span<const double>(quad.weights),
                     std::forward<F>(f));
}

template <class F>
double integrate(const ProductQuadrature& quad, F&& f) {
    return integrate(std::span<const Direction>(quad.points), std::span<const double>(quad.weights),
                     std::forward<F>(f));
}

struct QuadratureStats {
    double min_weight = 0.0;
    double max_weight = 0.0;
    double ratio = 0.0;  // max / min
};

inline QuadratureStats quadrature_stats(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("quadrature_stats: empty weight set");
    const auto [lo, hi] = std::minmax_element(weights.begin(), weights.end());
    return {*lo, *hi, *hi / *lo};
}

inline QuadratureStats quadrature_stats(const OctahedralQuadrature& quad) {
    return quadrature_stats(std::span<const double>(quad.weights));
}

inline QuadratureStats quadrature_stats(const ProductQuadrature& quad) {
    return quadrature_stats(std::span<const double>(quad.weights));
}

// Accuracy check table: integration errors of two smooth test functions on
// successively refined octahedral quadratures. Error = computed - exact.
struct AccuracyRow {
    int order = 0;
    int point_count = 0;
    double error_g = 0.0;  // g(x,y,z) = x^4 y^2, exact 4*pi/35
    double error_h = 0.0;  // h(x,y,z) = cos(x) + sin(y) + z^6, exact (4*pi/7)(1 + 7 sin 1)
    double ratio_g = 0.0;  // |previous error| / |error|
    double ratio_h = 0.0;
};

inline double accuracy_g(const Vec3& p) { return p.x * p.x * p.x * p.x * p.y * p.y; }
inline double accuracy_h(const Vec3& p) {
    const double z2 = p.z * p.z;
    return std::cos(p.x) + std::sin(p.y) + z2 * z2 * z2;
}
inline double accuracy_g_exact() { return four_pi / 35.0; }
inline double accuracy_h_exact() { return four_pi / 7.0 * (1.0 + 7.0 * std::sin(1.0)); }

inline std::vector<AccuracyRow> accuracy_table(int max_order) {
    std::vector<AccuracyRow> rows;
    for (int n = 2; n <= max_order; n *= 2) {
        const OctahedralQuadrature quad = build_octahedral_quadrature(n);
        AccuracyRow row;
        row.order = n;
        row.point_count = static_cast<int>(quad.size());
        row.error_g = integrate(quad, accuracy_g) - accuracy_g_exact();
        row.error_h = integrate(quad, accuracy_h) - accuracy_h_exact();
        if (!rows.empty()) {
            row.ratio_g = std::abs(rows.back().error_g / row.error_g);
            row.ratio_h = std::abs(rows.back().error_h / row.error_h);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace raysn
