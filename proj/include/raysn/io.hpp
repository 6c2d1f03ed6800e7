// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "raysn/analysis.hpp"
#include "raysn/interpolation.hpp"
#include "raysn/quadrature.hpp"
#include "raysn/solver.hpp"

namespace raysn {

/// Shortest representation that round-trips a double; keeps CSV output
/// byte-stable across reruns.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double parsed = 0.0;
    std::sscanf(buf, "%lf", &parsed);
    for (int precision = 1; precision < 17; ++precision) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", precision, v);
        std::sscanf(shorter, "%lf", &parsed);
        if (parsed == v) return shorter;
    }
    return buf;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

inline void write_density_csv(const std::string& path, const DensityGrid& rho) {
    auto out = open_output(path);
    out << "x,y,rho\n";
    for (int i = 0; i < rho.mesh.nx; ++i)
        for (int j = 0; j < rho.mesh.ny; ++j)
            out << format_double(rho.mesh.cell_x(i)) << ',' << format_double(rho.mesh.cell_y(j)) << ','
                << format_double(rho.values[rho.mesh.index(i, j)]) << '\n';
}

/// log10 density with the floor applied before the log, as plotted for the
/// lattice benchmark.
inline void write_log_density_csv(const std::string& path, const DensityGrid& rho,
                                  double floor = 1e-10) {
    auto out = open_output(path);
    out << "x,y,log10_rho\n";
    for (int i = 0; i < rho.mesh.nx; ++i)
        for (int j = 0; j < rho.mesh.ny; ++j)
            out << format_double(rho.mesh.cell_x(i)) << ',' << format_double(rho.mesh.cell_y(j)) << ','
                << format_double(std::log10(std::max(rho.values[rho.mesh.index(i, j)], floor))) << '\n';
}

inline void write_cut_csv(const std::string& path, const CutSeries& cut) {
    auto out = open_output(path);
    out << "r,rho\n";
    for (std::size_t k = 0; k < cut.coord.size(); ++k)
        out << format_double(cut.coord[k]) << ',' << format_double(cut.value[k]) << '\n';
}

inline void write_quadrature_csv(const std::string& path, std::span<const Direction> points,
                                 std::span<const double> weights) {
    auto out = open_output(path);
    out << "index,x,y,z,weight\n";
    for (std::size_t q = 0; q < points.size(); ++q)
        out << q << ',' << format_double(points[q].x) << ',' << format_double(points[q].y) << ','
            << format_double(points[q].z) << ',' << format_double(weights[q]) << '\n';
}

inline void write_operator_csv(const std::string& path, const InterpolationOperator& op) {
    auto out = open_output(path);
    out << "row,col,weight\n";
    for (std::size_t q = 0; q < op.rows(); ++q)
        for (int k = 0; k < 3; ++k)
            out << q << ',' << op.cols[q][k] << ',' << format_double(op.weights[q][k]) << '\n';
}

inline void write_manifest(const std::string& path, const RunManifest& manifest) {
    auto out = open_output(path);
    for (const auto& [key, value] : manifest) out << key << '=' << value << '\n';
}

}  // namespace raysn
