// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "raysn/field.hpp"
#include "raysn/geometry.hpp"
#include "raysn/interpolation.hpp"
#include "raysn/rng.hpp"

namespace raysn {

/// Zeroth angular moment per cell.
struct DensityGrid {
    SpatialMesh mesh;
    CellField values;
};

inline DensityGrid density(const AngularFluxField& psi, std::span<const double> weights,
                           const SpatialMesh& mesh) {
    DensityGrid rho{mesh, CellField(psi.cells, 0.0)};
    for (std::size_t q = 0; q < psi.n_ordinates; ++q) {
        const double w = weights[q];
        const auto plane = psi.plane(q);
        for (std::size_t c = 0; c < plane.size(); ++c) rho.values[c] += w * plane[c];
    }
    return rho;
}

enum class CutKind { horizontal, vertical, diagonal };

/// Density samples along a grid-aligned line. Coordinates are signed
/// distances from the domain center along the cut, so the horizontal and
/// diagonal series overlay as functions of radius.
struct CutSeries {
    CutKind kind = CutKind::horizontal;
    std::vector<double> coord;
    std::vector<double> value;
};

inline CutSeries extract_cut(const DensityGrid& rho, CutKind kind, double position = 0.0) {
    const SpatialMesh& mesh = rho.mesh;
    const double xc = 0.5 * (mesh.x_min + mesh.x_max);
    const double yc = 0.5 * (mesh.y_min + mesh.y_max);
    CutSeries cut;
    cut.kind = kind;
    auto containing = [](double pos, double lo, double h, int n) {
        const int k = static_cast<int>(std::floor((pos - lo) / h));
        if (k < 0 || k >= n) throw std::invalid_argument("extract_cut: cut outside domain");
        return k;
    };
    switch (kind) {
        case CutKind::horizontal: {
            const int j = containing(position, mesh.y_min, mesh.dy(), mesh.ny);
            for (int i = 0; i < mesh.nx; ++i) {
                cut.coord.push_back(mesh.cell_x(i) - xc);
                cut.value.push_back(rho.values[mesh.index(i, j)]);
            }
            break;
        }
        case CutKind::vertical: {
            const int i = containing(position, mesh.x_min, mesh.dx(), mesh.nx);
            for (int j = 0; j < mesh.ny; ++j) {
                cut.coord.push_back(mesh.cell_y(j) - yc);
                cut.value.push_back(rho.values[mesh.index(i, j)]);
            }
            break;
        }
        case CutKind::diagonal: {
            const int n = std::min(mesh.nx, mesh.ny);
            for (int k = 0; k < n; ++k) {
                const double rx = mesh.cell_x(k) - xc;
                const double ry = mesh.cell_y(k) - yc;
                const double r = std::copysign(std::hypot(rx, ry), rx);
                cut.coord.push_back(r);
                cut.value.push_back(rho.values[mesh.index(k, k)]);
            }
            break;
        }
    }
    return cut;
}

/// Bilinear sample of the cell-centered density at (x, y), clamped to the
/// cell-center hull.
inline double sample_bilinear(const DensityGrid& rho, double x, double y) {
    const SpatialMesh& mesh = rho.mesh;
    auto fractional = [](double pos, double lo, double h, int n) {
        double u = (pos - lo) / h - 0.5;
        u = std::clamp(u, 0.0, static_cast<double>(n - 1));
        const int k = std::min(static_cast<int>(u), n - 2);
        return std::pair<int, double>{k, u - k};
    };
    const auto [i, fx] = fractional(x, mesh.x_min, mesh.dx(), mesh.nx);
    const auto [j, fy] = fractional(y, mesh.y_min, mesh.dy(), mesh.ny);
    const double v00 = rho.values[mesh.index(i, j)];
    const double v10 = rho.values[mesh.index(i + 1, j)];
    const double v01 = rho.values[mesh.index(i, j + 1)];
    const double v11 = rho.values[mesh.index(i + 1, j + 1)];
    return (1 - fx) * ((1 - fy) * v00 + fy * v01) + fx * ((1 - fy) * v10 + fy * v11);
}

/// Coefficient of variation of the density on a circle around the domain
/// center: zero for rotationally symmetric fields, large when the ordinate
/// directions print through as rays.
inline double ray_metric(const DensityGrid& rho, double radius = 0.75, int n_samples = 720) {
    const SpatialMesh& mesh = rho.mesh;
    const double xc = 0.5 * (mesh.x_min + mesh.x_max);
    const double yc = 0.5 * (mesh.y_min + mesh.y_max);
    if (xc + radius > mesh.x_max || xc - radius < mesh.x_min || yc + radius > mesh.y_max ||
        yc - radius < mesh.y_min)
        throw std::invalid_argument("ray_metric: circle leaves the domain");
    double mean = 0.0;
    std::vector<double> samples(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n_samples;
        samples[k] = sample_bilinear(rho, xc + radius * std::cos(a), yc + radius * std::sin(a));
        mean += samples[k];
    }
    mean /= n_samples;
    if (!(mean > 0.0)) throw std::runtime_error("ray_metric: nonpositive mean, empty field");
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    return std::sqrt(var / n_samples) / mean;
}

/// L2 distance between two cuts as functions of the signed radius; `probe` is
/// resampled onto `reference`'s coordinates by linear interpolation.
inline double cut_discrepancy(const CutSeries& reference, const CutSeries& probe) {
    if (probe.coord.size() < 2 || reference.coord.empty())
        throw std::invalid_argument("cut_discrepancy: need at least two samples");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < reference.coord.size(); ++k) {
        const double r = reference.coord[k];
        if (r < probe.coord.front() || r > probe.coord.back()) continue;
        const auto upper = std::upper_bound(probe.coord.begin(), probe.coord.end(), r);
        const std::size_t hi = std::min<std::size_t>(
            std::max<std::ptrdiff_t>(1, upper - probe.coord.begin()), probe.coord.size() - 1);
        const std::size_t lo = hi - 1;
        const double span = probe.coord[hi] - probe.coord[lo];
        const double f = span > 0.0 ? (r - probe.coord[lo]) / span : 0.0;
        const double interpolated = (1.0 - f) * probe.value[lo] + f * probe.value[hi];
        const double diff = reference.value[k] - interpolated;
        sum += diff * diff;
        ++count;
    }
    if (count == 0) throw std::invalid_argument("cut_discrepancy: no overlapping radii");
    return std::sqrt(sum / count);
}

// ---------------------------------------------------------------------------
// Planar shift-interpolate-shift-back experiment on the hexagonal lattice:
// the numerical check of the modified-equation constants.

struct PlanarStencilReport {
    double alpha = 0.0;
    double epsilon = 0.0;
    double measured_c1 = 0.0, measured_c2 = 0.0;
    double analytic_c1 = 0.0, analytic_c2 = 0.0;
    // coefficients of d^2/dOmega^2, d^2/dOmega dOmega_perp, d^2/dOmega_perp^2
    double measured_shift2 = 0.0, measured_cross = 0.0, measured_perp2 = 0.0;
    double analytic_shift2 = 0.0, analytic_cross = 0.0, analytic_perp2 = 0.0;
};

inline double stencil_c1(double alpha) {
    return 2.0 / std::sqrt(3.0) * std::sin(std::numbers::pi / 3.0 - alpha);
}
inline double stencil_c2(double alpha) { return 2.0 / std::sqrt(3.0) * std::sin(alpha); }

inline double stencil_shift2(double beta) {
    return (4.0 * std::cos(beta) - std::cos(3.0 * beta)) / (2.0 * std::sqrt(3.0));
}
inline double stencil_cross(double beta) {
    return (-4.0 * std::sin(beta) + 2.0 * std::sin(3.0 * beta)) / (2.0 * std::sqrt(3.0));
}
inline double stencil_perp2(double beta) { return std::cos(3.0 * beta) / (2.0 * std::sqrt(3.0)); }

namespace detail {

// Small patch of the unit triangular lattice with barycentric interpolation,
// independent of the spherical machinery.
struct PlanarLattice {
    std::vector<std::array<double, 2>> points;
    std::vector<std::array<int, 3>> triangles;

    explicit PlanarLattice(int radius) {
        const double d1x = 1.0, d1y = 0.0;
        const double d2x = 0.5, d2y = std::sqrt(3.0) / 2.0;
        const int side = 2 * radius + 1;
        auto id = [&](int m, int n) { return (m + radius) * side + (n + radius); };
        for (int m = -radius; m <= radius; ++m)
            for (int n = -radius; n <= radius; ++n)
                points.push_back({m * d1x + n * d2x, m * d1y + n * d2y});
        for (int m = -radius; m < radius; ++m)
            for (int n = -radius; n < radius; ++n) {
                triangles.push_back({id(m, n), id(m + 1, n), id(m, n + 1)});
                triangles.push_back({id(m + 1, n), id(m + 1, n + 1), id(m, n + 1)});
            }
    }

    // Barycentric interpolation of the value grid at (x, y); linear scan over
    // the patch triangles is plenty for this diagnostic.
    double interpolate(std::span<const double> values, double x, double y) const {
        for (const auto& tri : triangles) {
            const auto& a = points[tri[0]];
            const auto& b = points[tri[1]];
            const auto& c = points[tri[2]];
            const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            const double w1 = ((x - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (y - a[1])) / det;
            const double w2 = ((b[0] - a[0]) * (y - a[1]) - (x - a[0]) * (b[1] - a[1])) / det;
            const double w0 = 1.0 - w1 - w2;
            const double tol = -1e-12;
            if (w0 >= tol && w1 >= tol && w2 >= tol)
                return w0 * values[tri[0]] + w1 * values[tri[1]] + w2 * values[tri[2]];
        }
        throw std::runtime_error("planar lattice: point outside patch");
    }
};

inline void solve3(double m[3][3], double rhs[3], double out[3]) {
    // Gaussian elimination with partial pivoting on a 3x3 system
    int perm[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(m[perm[r]][col]) > std::abs(m[perm[pivot]][col])) pivot = r;
        std::swap(perm[col], perm[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = m[perm[r]][col] / m[perm[col]][col];
            for (int c = col; c < 3; ++c) m[perm[r]][c] -= f * m[perm[col]][c];
            rhs[perm[r]] -= f * rhs[perm[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double acc = rhs[perm[col]];
        for (int c = col + 1; c < 3; ++c) acc -= m[perm[col]][c] * out[c];
        out[col] = acc / m[perm[col]][col];
    }
}

}  // namespace detail

/// Shift the hexagonal lattice by epsilon along (cos alpha, sin alpha),
/// interpolate, shift back, interpolate again, and fit the residual at the
/// center against the second-derivative operators predicted by the
/// modified-equation analysis. f runs over the three quadratics x^2, xy, y^2,
/// whose second differences are exact, so the fit isolates the stencil
/// constants up to O(epsilon).
inline PlanarStencilReport planar_stencil_experiment(double alpha, double epsilon) {
    if (alpha < 0.0 || alpha >= std::numbers::pi / 3.0)
        throw std::invalid_argument("planar_stencil_experiment: alpha must be in [0, pi/3)");
    if (!(epsilon > 0.0) || epsilon > 1e-2)
        throw std::invalid_argument("planar_stencil_experiment: epsilon must be in (0, 1e-2]");

    const detail::PlanarLattice lattice(4);
    const double ox = std::cos(alpha);
    const double oy = std::sin(alpha);

    const std::array<std::array<double, 3>, 3> quadratics = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    double residual[3];
    for (int k = 0; k < 3; ++k) {
        const auto [ca, cb, cc] = quadratics[k];
        auto f = [&](double x, double y) { return ca * x * x + cb * x * y + cc * y * y; };

        std::vector<double> values(lattice.points.size());
        for (std::size_t p = 0; p < lattice.points.size(); ++p)
            values[p] = f(lattice.points[p][0], lattice.points[p][1]);

        // forward pass: value at every shifted point, interpolated on the base lattice
        std::vector<double> shifted(lattice.points.size(), 0.0);
        const int side = static_cast<int>(std::sqrt(static_cast<double>(lattice.points.size())));
        for (std::size_t p = 0; p < lattice.points.size(); ++p) {
            const int m = static_cast<int>(p) / side;
            const int n = static_cast<int>(p) % side;
            if (m == 0 || n == 0 || m == side - 1 || n == side - 1) continue;  // rim never read back
            shifted[p] = lattice.interpolate(values, lattice.points[p][0] + epsilon * ox,
                                             lattice.points[p][1] + epsilon * oy);
        }
        // backward pass, only needed at the center point: the back-shifted
        // center lies in the shifted lattice, which is the base lattice
        // displaced by epsilon*Omega.
        const double back = lattice.interpolate(shifted, -epsilon * ox, -epsilon * oy);
        residual[k] = (back - f(0.0, 0.0)) / epsilon;
    }

    auto d2 = [](const std::array<double, 3>& q, double ux, double uy, double vx, double vy) {
        // directional second derivative d^2 f / du dv of f = q0 x^2 + q1 xy + q2 y^2
        return 2.0 * q[0] * ux * vx + q[1] * (ux * vy + uy * vx) + 2.0 * q[2] * uy * vy;
    };

    PlanarStencilReport report;
    report.alpha = alpha;
    report.epsilon = epsilon;
    report.analytic_c1 = stencil_c1(alpha);
    report.analytic_c2 = stencil_c2(alpha);
    const double beta = alpha - std::numbers::pi / 6.0;
    report.analytic_shift2 = stencil_shift2(beta);
    report.analytic_cross = stencil_cross(beta);
    report.analytic_perp2 = stencil_perp2(beta);

    // fit (c1, c2) in the lattice axes xi1 = (1,0), xi2 = (1/2, sqrt3/2)
    {
        const double x2x = 0.5, x2y = std::sqrt(3.0) / 2.0;
        double normal[2][2] = {{0, 0}, {0, 0}};
        double rhs[2] = {0, 0};
        for (int k = 0; k < 3; ++k) {
            const double a1 = d2(quadratics[k], 1, 0, 1, 0);
            const double a2 = d2(quadratics[k], x2x, x2y, x2x, x2y);
            normal[0][0] += a1 * a1;
            normal[0][1] += a1 * a2;
            normal[1][0] += a1 * a2;
            normal[1][1] += a2 * a2;
            rhs[0] += a1 * residual[k];
            rhs[1] += a2 * residual[k];
        }
        const double det = normal[0][0] * normal[1][1] - normal[0][1] * normal[1][0];
        report.measured_c1 = (rhs[0] * normal[1][1] - rhs[1] * normal[0][1]) / det;
        report.measured_c2 = (normal[0][0] * rhs[1] - normal[1][0] * rhs[0]) / det;
    }

    // fit the transformed coefficients in the (Omega, Omega_perp) axes
    {
        const double px = -oy, py = ox;
        double m[3][3];
        double rhs[3];
        for (int k = 0; k < 3; ++k) {
            m[k][0] = d2(quadratics[k], ox, oy, ox, oy);
            m[k][1] = d2(quadratics[k], ox, oy, px, py);
            m[k][2] = d2(quadratics[k], px, py, px, py);
            rhs[k] = residual[k];
        }
        double out[3];
        detail::solve3(m, rhs, out);
        report.measured_shift2 = out[0];
        report.measured_cross = out[1];
        report.measured_perp2 = out[2];
    }
    return report;
}

/// Algebraic check of the 1D forth-then-back identity:
/// Interp(-a) Interp(a) = I + a(1-a) D2 with D2 the periodic second
/// difference. Returns the largest absolute deviation over random vectors.
inline double verify_back_forth_2d(int n_phi, double a, int trials = 100, std::uint64_t seed = 7) {
    if (a < 0.0 || a > 1.0) throw std::invalid_argument("verify_back_forth_2d: a must be in [0, 1]");
    Rng rng(seed);
    double worst = 0.0;
    std::vector<double> values(n_phi);
    for (int trial = 0; trial < trials; ++trial) {
        for (double& v : values) v = rng.uniform(-1.0, 1.0);
        const auto forth = phi_rotate_interpolate_1d(values, a, n_phi);
        const auto back = phi_rotate_interpolate_1d(forth, -a, n_phi);
        for (int i = 0; i < n_phi; ++i) {
            const double second_diff =
                values[(i + 1) % n_phi] - 2.0 * values[i] + values[(i + n_phi - 1) % n_phi];
            const double expected = values[i] + a * (1.0 - a) * second_diff;
            worst = std::max(worst, std::abs(back[i] - expected));
        }
    }
    return worst;
}

}  // namespace raysn
