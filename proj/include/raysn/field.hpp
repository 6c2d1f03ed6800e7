// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace raysn {

/// Uniform 2D cell grid. Cell (i, j) is centered at (cell_x(i), cell_y(j));
/// fields over the mesh are stored row-major with j fastest.
struct SpatialMesh {
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
    int nx = 1, ny = 1;

    double dx() const { return (x_max - x_min) / nx; }
    double dy() const { return (y_max - y_min) / ny; }
    double cell_x(int i) const { return x_min + (i + 0.5) * dx(); }
    double cell_y(int j) const { return y_min + (j + 0.5) * dy(); }
    std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }

    void validate() const {
        if (nx <= 0 || ny <= 0 || !(x_max > x_min) || !(y_max > y_min))
            throw std::invalid_argument("SpatialMesh: degenerate domain");
    }
};

using CellField = std::vector<double>;  // mesh.cell_count() values, j fastest

/// Angular flux indexed by (ordinate q, cell i, cell j); each ordinate plane
/// is a contiguous CellField so the rotation/interpolation step reduces to
/// plane-wise axpy operations.
struct AngularFluxField {
    std::size_t n_ordinates = 0;
    std::size_t cells = 0;
    std::vector<double> data;

    AngularFluxField() = default;
    AngularFluxField(std::size_t n_q, std::size_t n_cells)
        : n_ordinates(n_q), cells(n_cells), data(n_q * n_cells, 0.0) {}

    std::span<double> plane(std::size_t q) { return {data.data() + q * cells, cells}; }
    std::span<const double> plane(std::size_t q) const { return {data.data() + q * cells, cells}; }

    double& operator()(std::size_t q, std::size_t cell) { return data[q * cells + cell]; }
    double operator()(std::size_t q, std::size_t cell) const { return data[q * cells + cell]; }
};

}  // namespace raysn
