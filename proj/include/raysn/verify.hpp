// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "raysn/analysis.hpp"
#include "raysn/interpolation.hpp"
#include "raysn/quadrature.hpp"
#include "raysn/rotation.hpp"

namespace raysn {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline void check(std::vector<CheckResult>& out, const std::string& name, bool ok,
                  const std::string& detail = {}) {
    out.push_back({name, ok, detail});
}

inline std::string num(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

}  // namespace detail

/// Structural invariants of one octahedral quadrature.
inline void verify_octahedral_quadrature(std::vector<CheckResult>& out, int n) {
    using detail::check;
    const std::string tag = "quadrature[N=" + std::to_string(n) + "]";
    const OctahedralQuadrature quad = build_octahedral_quadrature(n);

    check(out, tag + ": point count 4N^2-8N+6",
          static_cast<int>(quad.size()) == octahedral_point_count(n));

    double w_sum = 0.0;
    bool positive = true;
    for (double w : quad.weights) {
        w_sum += w;
        positive = positive && w > 0.0;
    }
    check(out, tag + ": weights positive", positive);
    check(out, tag + ": weights sum to 4pi", std::abs(w_sum / four_pi - 1.0) < 1e-12,
          detail::num(w_sum / four_pi - 1.0));

    double tri_sum = 0.0;
    bool distinct = true;
    for (const auto& tri : quad.triangles) {
        tri_sum += std::abs(
            spherical_triangle_area(quad.points[tri[0]], quad.points[tri[1]], quad.points[tri[2]]));
        distinct = distinct && tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2];
    }
    check(out, tag + ": triangles tile the sphere", std::abs(tri_sum - four_pi) < 1e-10,
          detail::num(tri_sum - four_pi));
    check(out, tag + ": triangle vertices distinct", distinct);

    int poles = 0;
    bool valence_ok = true;
    for (const auto& incident : quad.vertex_triangles) {
        if (incident.size() == 4)
            ++poles;
        else
            valence_ok = valence_ok && incident.size() == 6;
    }
    check(out, tag + ": six pole vertices with 4 triangles, rest 6", poles == 6 && valence_ok);

    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : quad.triangles)
        for (int e = 0; e < 3; ++e) {
            const int a = tri[e], b = tri[(e + 1) % 3];
            ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
    bool edges_ok = true;
    for (const auto& [edge, count] : edge_count) edges_ok = edges_ok && count == 2;
    check(out, tag + ": every edge shared by exactly 2 triangles", edges_ok);

    // octant symmetry: sign flips permute the points and preserve weights
    std::map<std::array<long long, 3>, double> weight_by_key;
    auto key_of = [](const Vec3& p) {
        auto quantize = [](double v) { return static_cast<long long>(std::llround(v * 1e12)); };
        return std::array<long long, 3>{quantize(p.x), quantize(p.y), quantize(p.z)};
    };
    for (std::size_t v = 0; v < quad.size(); ++v) weight_by_key[key_of(quad.points[v])] = quad.weights[v];
    bool symmetric = true;
    for (std::size_t v = 0; v < quad.size() && symmetric; ++v)
        for (int flip = 1; flip < 8 && symmetric; ++flip) {
            Vec3 p = quad.points[v];
            if (flip & 1) p.x = -p.x;
            if (flip & 2) p.y = -p.y;
            if (flip & 4) p.z = -p.z;
            const auto it = weight_by_key.find(key_of(p));
            symmetric = it != weight_by_key.end() && std::abs(it->second - quad.weights[v]) < 1e-12;
        }
    check(out, tag + ": octant symmetry of points and weights", symmetric);
}

/// Randomized invariants of the rotation + interpolation operator at order 8.
inline void verify_operator_invariants(std::vector<CheckResult>& out, std::uint64_t seed,
                                       int cases = 200) {
    using detail::check;
    const OctahedralQuadrature quad = build_octahedral_quadrature(8);
    Rng rng(seed);

    bool rows_stochastic = true, nonnegative = true, cols_are_triangle = true, positive_apply = true;
    double worst_row_sum = 0.0;
    std::vector<double> values(quad.size());
    for (int c = 0; c < cases; ++c) {
        const double angle = c % 10 == 9 ? rng.uniform(0.0, std::numbers::pi)
                                         : rng.uniform(0.0, 0.2);  // mostly small, sometimes large
        const Mat3 r = rotation_matrix({random_axis(rng), angle});
        const auto op = build_interpolation_operator(quad, rotate_points(quad.points, r));
        for (std::size_t row = 0; row < op.rows(); ++row) {
            const auto& w = op.weights[row];
            const double sum = w[0] + w[1] + w[2];
            worst_row_sum = std::max(worst_row_sum, std::abs(sum - 1.0));
            rows_stochastic = rows_stochastic && std::abs(sum - 1.0) < 1e-12;
            nonnegative = nonnegative && w[0] >= 0.0 && w[1] >= 0.0 && w[2] >= 0.0;
            cols_are_triangle = cols_are_triangle && op.cols[row] == quad.triangles[op.triangle[row]];
        }
        for (double& v : values) v = rng.uniform(0.0, 10.0);
        for (double v : apply_interpolation(op, values)) positive_apply = positive_apply && v >= 0.0;
    }
    check(out, "operator: rows sum to 1", rows_stochastic, detail::num(worst_row_sum));
    check(out, "operator: weights nonnegative", nonnegative);
    check(out, "operator: rows reference one source triangle", cols_are_triangle);
    check(out, "operator: nonnegative input stays nonnegative", positive_apply);

    const auto identity_op = build_interpolation_operator(quad, quad.points);
    bool identity = true;
    for (double& v : values) v = rng.uniform(-5.0, 5.0);
    const auto mapped = apply_interpolation(identity_op, values);
    for (std::size_t q = 0; q < values.size(); ++q) identity = identity && mapped[q] == values[q];
    check(out, "operator: identity at zero rotation", identity);
}

inline void verify_corruption_detection(std::vector<CheckResult>& out) {
    OctahedralQuadrature quad = build_octahedral_quadrature(4);
    // cut every triangle list down to the first incident triangle and point
    // the triangles at one octant only: locate must fail for a far point
    for (auto& incident : quad.vertex_triangles) incident.resize(1);
    quad.triangles.resize(quad.triangles.size() / 8);
    for (auto& incident : quad.vertex_triangles)
        if (incident[0] >= static_cast<int>(quad.triangles.size())) incident[0] = 0;
    bool detected = false;
    try {
        locate_triangle(quad, normalized({-1.0, -1.0, -1.0}), 0);
    } catch (const std::runtime_error&) {
        detected = true;
    }
    detail::check(out, "operator: corrupted connectivity surfaces as locate failure", detected);
}

/// Full verification battery: quadrature structure, operator invariants, the
/// 1D back-and-forth identity and the planar stencil constants.
inline std::vector<CheckResult> run_verification(std::uint64_t seed = 42) {
    std::vector<CheckResult> out;
    for (int n : {2, 4, 8, 16}) verify_octahedral_quadrature(out, n);

    {
        const ProductQuadrature quad = build_product_quadrature(8);
        double w_sum = 0.0;
        for (double w : quad.weights) w_sum += w;
        detail::check(out, "product quadrature: N^2 points", quad.size() == 64);
        detail::check(out, "product quadrature: weights sum to 4pi",
                      std::abs(w_sum / four_pi - 1.0) < 1e-12);
        const double mu2 = integrate(quad, [](const Vec3& p) { return p.z * p.z; });
        detail::check(out, "product quadrature: mu^2 integrates to 4pi/3",
                      std::abs(mu2 - four_pi / 3.0) < 1e-12, detail::num(mu2 - four_pi / 3.0));
    }

    Rng rng(seed);
    bool rotations_ok = true;
    for (int c = 0; c < 50; ++c) {
        const Mat3 r = rotation_matrix({random_axis(rng), rng.uniform(-4.0, 4.0)});
        const Mat3 rtr = r.transposed() * r;
        const double det = triple({r(0, 0), r(1, 0), r(2, 0)}, {r(0, 1), r(1, 1), r(2, 1)},
                                  {r(0, 2), r(1, 2), r(2, 2)});
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                rotations_ok = rotations_ok && std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) < 1e-13;
        rotations_ok = rotations_ok && std::abs(det - 1.0) < 1e-13;
    }
    detail::check(out, "rotation: orthogonal with unit determinant", rotations_ok);

    verify_operator_invariants(out, seed);
    verify_corruption_detection(out);

    double worst_back_forth = 0.0;
    for (double a : {0.1, 0.5, 0.9})
        worst_back_forth = std::max(worst_back_forth, verify_back_forth_2d(16, a, 100, seed));
    detail::check(out, "1d interpolation: forth-then-back equals I + a(1-a) D2",
                  worst_back_forth <= 1e-13, detail::num(worst_back_forth));

    bool stencil_ok = true;
    double worst_rel = 0.0;
    for (double alpha : {0.0, std::numbers::pi / 12.0, std::numbers::pi / 6.0, std::numbers::pi / 4.0}) {
        const auto report = planar_stencil_experiment(alpha, 1e-3);
        for (auto [measured, analytic] : {std::pair{report.measured_c1, report.analytic_c1},
                                          std::pair{report.measured_c2, report.analytic_c2}}) {
            if (std::abs(analytic) > 1e-9) {
                const double rel = std::abs(measured - analytic) / std::abs(analytic);
                worst_rel = std::max(worst_rel, rel);
                stencil_ok = stencil_ok && rel <= 0.02;
            } else {
                stencil_ok = stencil_ok && std::abs(measured) <= 1e-3;
            }
        }
    }
    detail::check(out, "planar stencil: c1, c2 recovered within 2%", stencil_ok,
                  detail::num(worst_rel));
    {
        const auto report = planar_stencil_experiment(0.0, 1e-3);
        detail::check(out, "planar stencil: cross/perp diffusion vanish at alpha=0",
                      std::abs(report.measured_cross) <= 1e-3 && std::abs(report.measured_perp2) <= 1e-3,
                      detail::num(std::max(std::abs(report.measured_cross),
                                           std::abs(report.measured_perp2))));
    }
    return out;
}

}  // namespace raysn
