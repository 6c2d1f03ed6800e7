// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "raysn/field.hpp"
#include "raysn/geometry.hpp"

namespace raysn {

struct MaterialRect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double sigma_a = 0, sigma_s = 0;
};

struct SourceRect {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    double strength = 0;
};

/// Spatial domain, cross-section fields, isotropic source and initial
/// condition of one benchmark run. The initial angular flux is isotropic, so
/// it is stored as one value per cell and replicated over the ordinates when
/// the solver starts.
struct ProblemSpec {
    std::string name;
    SpatialMesh mesh;
    CellField sigma_a;
    CellField sigma_s;
    CellField source;             // isotropic emission rate per cell
    CellField initial_isotropic;  // psi(0, x, *) per cell
    double t_end = 1.0;

    void validate() const {
        mesh.validate();
        const std::size_t n = mesh.cell_count();
        if (sigma_a.size() != n || sigma_s.size() != n || source.size() != n ||
            initial_isotropic.size() != n)
            throw std::invalid_argument("ProblemSpec: field sizes do not match mesh");
        for (std::size_t c = 0; c < n; ++c)
            if (sigma_a[c] < 0 || sigma_s[c] < 0 || source[c] < 0)
                throw std::invalid_argument("ProblemSpec: negative material coefficient");
        if (!(t_end > 0)) throw std::invalid_argument("ProblemSpec: t_end must be positive");
    }
};

struct LineSourceParams {
    double half_width = 1.5;  // domain [-half_width, half_width]^2
    int nx = 200, ny = 200;
    double t_end = 1.0;
    double sigma_ic = 0.03;
    double sigma_a = 0.0;
    double sigma_s = 1.0;
};

struct LatticeParams {
    double x_min = 0.0, x_max = 7.0;
    int nx = 280, ny = 280;
    double t_end = 3.2;
    double background_sigma_s = 1.0;
    double background_sigma_a = 0.0;
    double absorber_sigma_a = 10.0;
    double absorber_sigma_s = 0.0;
    double source_strength = 1.0;
    // Lower-left corners of the absorbing unit squares: the checkerboard
    // positions of the inner 5x5 block, minus the central source square and
    // minus the square directly above it.
    std::vector<std::pair<int, int>> absorber_corners = {{1, 1}, {1, 3}, {1, 5}, {2, 2}, {2, 4}, {3, 1},
                                                         {4, 2}, {4, 4}, {5, 1}, {5, 3}, {5, 5}};
};

namespace detail {

inline void paint_rect(const SpatialMesh& mesh, double x0, double y0, double x1, double y1,
                       auto&& assign) {
    for (int i = 0; i < mesh.nx; ++i) {
        const double cx = mesh.cell_x(i);
        if (cx < x0 || cx >= x1) continue;
        for (int j = 0; j < mesh.ny; ++j) {
            const double cy = mesh.cell_y(j);
            if (cy < y0 || cy >= y1) continue;
            assign(mesh.index(i, j));
        }
    }
}

}  // namespace detail

/// Isotropic Gaussian pulse in a uniform scattering medium.
inline ProblemSpec make_line_source(const LineSourceParams& params = {}) {
    if (!(params.sigma_ic > 0)) throw std::invalid_argument("line source: sigma_ic must be positive");
    ProblemSpec spec;
    spec.name = "line-source";
    spec.mesh = {-params.half_width, params.half_width, -params.half_width, params.half_width,
                 params.nx,          params.ny};
    spec.t_end = params.t_end;
    const std::size_t n = spec.mesh.cell_count();
    spec.sigma_a.assign(n, params.sigma_a);
    spec.sigma_s.assign(n, params.sigma_s);
    spec.source.assign(n, 0.0);
    spec.initial_isotropic.resize(n);
    const double s2 = params.sigma_ic * params.sigma_ic;
    for (int i = 0; i < spec.mesh.nx; ++i) {
        const double x = spec.mesh.cell_x(i);
        for (int j = 0; j < spec.mesh.ny; ++j) {
            const double y = spec.mesh.cell_y(j);
            spec.initial_isotropic[spec.mesh.index(i, j)] =
                1.0 / (four_pi * s2) * std::exp(-(x * x + y * y) / (4.0 * s2));
        }
    }
    spec.validate();
    return spec;
}

/// Central isotropic source surrounded by a checkerboard of strong absorbers
/// in a scattering background. No initial particles.
inline ProblemSpec make_lattice(const LatticeParams& params = {}) {
    ProblemSpec spec;
    spec.name = "lattice";
    spec.mesh = {params.x_min, params.x_max, params.x_min, params.x_max, params.nx, params.ny};
    spec.t_end = params.t_end;
    const std::size_t n = spec.mesh.cell_count();
    spec.sigma_a.assign(n, params.background_sigma_a);
    spec.sigma_s.assign(n, params.background_sigma_s);
    spec.source.assign(n, 0.0);
    spec.initial_isotropic.assign(n, 0.0);
    for (const auto& [cx, cy] : params.absorber_corners)
        detail::paint_rect(spec.mesh, cx, cy, cx + 1.0, cy + 1.0, [&](std::size_t c) {
            spec.sigma_a[c] = params.absorber_sigma_a;
            spec.sigma_s[c] = params.absorber_sigma_s;
        });
    detail::paint_rect(spec.mesh, 3.0, 3.0, 4.0, 4.0,
                       [&](std::size_t c) { spec.source[c] = params.source_strength; });
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Plain-text problem configs: flat key = value lines with section prefixes;
// repeated "material" rows are "x0 y0 x1 y1 sigma_a sigma_s", repeated
// "source" rows are "x0 y0 x1 y1 strength". '#' starts a comment.

inline ProblemSpec problem_from_config(std::string_view text) {
    ProblemSpec spec;
    spec.name = "custom";
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    int nx = 0, ny = 0;
    double bg_sa = 0, bg_ss = 0;
    double gaussian_sigma = 0;
    std::vector<MaterialRect> materials;
    std::vector<SourceRect> sources;

    std::istringstream stream{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::istringstream vs(value);
        auto number = [&](double& out) {
            if (!(vs >> out))
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad number");
        };
        if (key == "problem.name") {
            spec.name = value;
        } else if (key == "domain.x_min") {
            number(x_min);
        } else if (key == "domain.x_max") {
            number(x_max);
        } else if (key == "domain.y_min") {
            number(y_min);
        } else if (key == "domain.y_max") {
            number(y_max);
        } else if (key == "grid.nx") {
            double v;
            number(v);
            nx = static_cast<int>(v);
        } else if (key == "grid.ny") {
            double v;
            number(v);
            ny = static_cast<int>(v);
        } else if (key == "time.t_end") {
            number(spec.t_end);
        } else if (key == "background.sigma_a") {
            number(bg_sa);
        } else if (key == "background.sigma_s") {
            number(bg_ss);
        } else if (key == "init.gaussian_sigma") {
            number(gaussian_sigma);
        } else if (key == "material") {
            MaterialRect r;
            number(r.x0);
            number(r.y0);
            number(r.x1);
            number(r.y1);
            number(r.sigma_a);
            number(r.sigma_s);
            materials.push_back(r);
        } else if (key == "source") {
            SourceRect r;
            number(r.x0);
            number(r.y0);
            number(r.x1);
            number(r.y1);
            number(r.strength);
            sources.push_back(r);
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key +
                                        "'");
        }
    }
    if (nx <= 0 || ny <= 0) throw std::invalid_argument("config: grid.nx and grid.ny are required");

    spec.mesh = {x_min, x_max, y_min, y_max, nx, ny};
    const std::size_t n = spec.mesh.cell_count();
    spec.sigma_a.assign(n, bg_sa);
    spec.sigma_s.assign(n, bg_ss);
    spec.source.assign(n, 0.0);
    spec.initial_isotropic.assign(n, 0.0);
    for (const auto& r : materials)
        detail::paint_rect(spec.mesh, r.x0, r.y0, r.x1, r.y1, [&](std::size_t c) {
            spec.sigma_a[c] = r.sigma_a;
            spec.sigma_s[c] = r.sigma_s;
        });
    for (const auto& r : sources)
        detail::paint_rect(spec.mesh, r.x0, r.y0, r.x1, r.y1,
                           [&](std::size_t c) { spec.source[c] += r.strength; });
    if (gaussian_sigma > 0) {
        const double s2 = gaussian_sigma * gaussian_sigma;
        for (int i = 0; i < spec.mesh.nx; ++i) {
            const double x = spec.mesh.cell_x(i);
            for (int j = 0; j < spec.mesh.ny; ++j) {
                const double y = spec.mesh.cell_y(j);
                spec.initial_isotropic[spec.mesh.index(i, j)] =
                    1.0 / (four_pi * s2) * std::exp(-(x * x + y * y) / (4.0 * s2));
            }
        }
    }
    spec.validate();
    return spec;
}

/// Canonical config text for the lattice benchmark; the layout is data so it
/// can be corrected without code changes. configs/lattice.cfg ships the same
/// content.
inline std::string lattice_config_text(const LatticeParams& params = {}) {
    std::ostringstream out;
    out << "problem.name = lattice\n";
    out << "domain.x_min = " << params.x_min << "\ndomain.x_max = " << params.x_max << "\n";
    out << "domain.y_min = " << params.x_min << "\ndomain.y_max = " << params.x_max << "\n";
    out << "grid.nx = " << params.nx << "\ngrid.ny = " << params.ny << "\n";
    out << "time.t_end = " << params.t_end << "\n";
    out << "background.sigma_a = " << params.background_sigma_a << "\n";
    out << "background.sigma_s = " << params.background_sigma_s << "\n";
    out << "# absorbing unit squares: x0 y0 x1 y1 sigma_a sigma_s\n";
    for (const auto& [cx, cy] : params.absorber_corners)
        out << "material = " << cx << " " << cy << " " << cx + 1 << " " << cy + 1 << " "
            << params.absorber_sigma_a << " " << params.absorber_sigma_s << "\n";
    out << "# isotropic source: x0 y0 x1 y1 strength\n";
    out << "source = 3 3 4 4 " << params.source_strength << "\n";
    return out.str();
}

inline std::string line_source_config_text(const LineSourceParams& params = {}) {
    std::ostringstream out;
    out << "problem.name = line-source\n";
    out << "domain.x_min = " << -params.half_width << "\ndomain.x_max = " << params.half_width << "\n";
    out << "domain.y_min = " << -params.half_width << "\ndomain.y_max = " << params.half_width << "\n";
    out << "grid.nx = " << params.nx << "\ngrid.ny = " << params.ny << "\n";
    out << "time.t_end = " << params.t_end << "\n";
    out << "background.sigma_a = " << params.sigma_a << "\n";
    out << "background.sigma_s = " << params.sigma_s << "\n";
    out << "init.gaussian_sigma = " << params.sigma_ic << "\n";
    return out.str();
}

}  // namespace raysn
