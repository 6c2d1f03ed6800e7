// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "raysn/field.hpp"
#include "raysn/interpolation.hpp"
#include "raysn/parallel.hpp"
#include "raysn/problem.hpp"
#include "raysn/quadrature.hpp"
#include "raysn/rng.hpp"
#include "raysn/rotation.hpp"

namespace raysn {

enum class QuadratureKind { octahedral, product };
enum class RotationSchedule { none, random_each_step, forth_and_back, double_half_step };

inline const char* to_string(QuadratureKind k) {
    return k == QuadratureKind::octahedral ? "octahedral" : "product";
}

inline const char* to_string(RotationSchedule s) {
    switch (s) {
        case RotationSchedule::none: return "none";
        case RotationSchedule::random_each_step: return "random_each_step";
        case RotationSchedule::forth_and_back: return "forth_and_back";
        case RotationSchedule::double_half_step: return "double_half_step";
    }
    return "?";
}

struct SolverConfig {
    QuadratureKind quadrature = QuadratureKind::octahedral;
    int order = 6;  // quadrature order N
    int spatial_order = 2;
    double cfl = 0.5;
    double delta = 0.0;  // rotation strength
    RotationSchedule schedule = RotationSchedule::none;
    bool conserve_mass = false;
    bool audit_conservation = false;  // track per-cell mass deviation across rotation steps
    std::uint64_t seed = 42;
    int nan_check_interval = 50;

    void validate() const {
        if (!(cfl > 0.0) || cfl > 1.0) throw std::invalid_argument("SolverConfig: cfl must be in (0, 1]");
        if (delta < 0.0) throw std::invalid_argument("SolverConfig: delta must be >= 0");
        if (spatial_order != 1 && spatial_order != 2)
            throw std::invalid_argument("SolverConfig: spatial order must be 1 or 2");
        if (quadrature == QuadratureKind::product && schedule != RotationSchedule::none &&
            schedule != RotationSchedule::forth_and_back)
            throw std::invalid_argument(
                "SolverConfig: product quadrature rotates about the z-axis only (forth_and_back)");
    }
};

/// Slope limiter: zero across sign changes, otherwise the smaller magnitude.
inline double minmod(double a, double b) {
    if (a > 0.0 && b > 0.0) return a < b ? a : b;
    if (a < 0.0 && b < 0.0) return a > b ? a : b;
    return 0.0;
}

namespace detail {

// Reconstructed face value on the upwind side of face k +/- 1/2 along one
// grid line. Ghost cells: zero on the inflow boundary, copied interior value
// on the outflow boundary (which zeroes the boundary slope).
//
// Adds -omega * (F_right - F_left) / h to `out` for every cell of the line;
// `stride` walks the line through the plane.
inline void upwind_line_update(const double* in, double* out, int n, std::ptrdiff_t stride,
                               double omega, double inv_h, int order) {
    if (omega == 0.0) return;
    const double scale = omega * inv_h;
    auto at = [&](int k) { return in[k * stride]; };

    if (omega > 0.0) {
        // upwind side is the left cell; inflow ghost at k = -1
        double prev_face = 0.0;
        for (int k = 0; k < n; ++k) {
            double face = at(k);
            if (order == 2) {
                const double dm = k > 0 ? at(k) - at(k - 1) : at(k);
                const double dp = k + 1 < n ? at(k + 1) - at(k) : 0.0;
                face += 0.5 * minmod(dm, dp);
            }
            out[k * stride] -= scale * (face - prev_face);
            prev_face = face;
        }
    } else {
        // upwind side is the right cell; inflow ghost at k = n
        auto recon = [&](int k) {
            double face = at(k);
            if (order == 2) {
                const double dm = k > 0 ? at(k) - at(k - 1) : 0.0;
                const double dp = k + 1 < n ? at(k + 1) - at(k) : -at(k);
                face -= 0.5 * minmod(dm, dp);
            }
            return face;
        };
        double left_face = recon(0);
        for (int k = 0; k < n; ++k) {
            const double right_face = k + 1 < n ? recon(k + 1) : 0.0;
            out[k * stride] -= scale * (right_face - left_face);
            left_face = right_face;
        }
    }
}

}  // namespace detail

/// Transport contribution of one ordinate plane: -Omega . grad psi with
/// upwind faces (order 1) or minmod-limited linear reconstruction (order 2).
/// The two z-face terms of the 3D flux balance cancel for solutions constant
/// in z, so only x/y sweeps remain. Adds into `out`.
inline void transport_plane_update(std::span<const double> in, std::span<double> out,
                                   const SpatialMesh& mesh, const Direction& omega, int order) {
    const int nx = mesh.nx, ny = mesh.ny;
    const double inv_dx = 1.0 / mesh.dx();
    const double inv_dy = 1.0 / mesh.dy();
    for (int i = 0; i < nx; ++i)
        detail::upwind_line_update(in.data() + static_cast<std::size_t>(i) * ny,
                                   out.data() + static_cast<std::size_t>(i) * ny, ny, 1, omega.y, inv_dy,
                                   order);
    for (int j = 0; j < ny; ++j)
        detail::upwind_line_update(in.data() + j, out.data() + j, nx, ny, omega.x, inv_dx, order);
}

/// Transport-only time-derivative contribution for every ordinate (the flux
/// sweep of the finite volume update, no collisions, no source).
inline AngularFluxField compute_fluxes(const AngularFluxField& psi, std::span<const Direction> points,
                                       const SpatialMesh& mesh, int order) {
    AngularFluxField out(psi.n_ordinates, psi.cells);
    parallel_for(psi.n_ordinates, [&](std::size_t q) {
        transport_plane_update(psi.plane(q), out.plane(q), mesh, points[q], order);
    });
    return out;
}

/// Collision contribution per ordinate in a single cell:
/// sigma_s * Phi / (4 pi) - (sigma_a + sigma_s) * psi_q with Phi the weighted
/// ordinate sum. Isotropic scattering redistributes exactly what the total
/// cross section removes when sigma_a = 0.
inline std::vector<double> collision_update(std::span<const double> psi_cell,
                                            std::span<const double> weights, double sigma_s,
                                            double sigma_a) {
    double phi = 0.0;
    for (std::size_t q = 0; q < weights.size(); ++q) phi += weights[q] * psi_cell[q];
    const double gain = sigma_s * phi / four_pi;
    const double sigma_t = sigma_a + sigma_s;
    std::vector<double> out(psi_cell.size());
    for (std::size_t q = 0; q < psi_cell.size(); ++q) out[q] = gain - sigma_t * psi_cell[q];
    return out;
}

namespace detail {

// Scalar flux with a fixed-chunk reduction so the result does not depend on
// the worker count.
class ScalarFluxAccumulator {
  public:
    static constexpr std::size_t kChunks = 8;

    void resize(std::size_t cells) {
        for (auto& p : partials_) p.assign(cells, 0.0);
    }

    void compute(const AngularFluxField& psi, std::span<const double> weights, CellField& phi) {
        const std::size_t n_q = psi.n_ordinates;
        const std::size_t chunk = (n_q + kChunks - 1) / kChunks;
        parallel_for(kChunks, [&](std::size_t c) {
            CellField& acc = partials_[c];
            std::fill(acc.begin(), acc.end(), 0.0);
            const std::size_t q_end = std::min(n_q, (c + 1) * chunk);
            for (std::size_t q = c * chunk; q < q_end; ++q) {
                const double w = weights[q];
                const auto plane = psi.plane(q);
                for (std::size_t cell = 0; cell < plane.size(); ++cell) acc[cell] += w * plane[cell];
            }
        });
        phi.assign(partials_[0].size(), 0.0);
        for (const auto& acc : partials_)
            for (std::size_t cell = 0; cell < phi.size(); ++cell) phi[cell] += acc[cell];
    }

  private:
    std::array<CellField, kChunks> partials_;
};

}  // namespace detail

/// Full right-hand side and Heun stepping for the discrete-ordinates system.
/// Owns the scratch fields so the time loop allocates nothing per step.
class TransportOperator {
  public:
    TransportOperator(const ProblemSpec& problem, std::span<const Direction> points,
                      std::span<const double> weights, int spatial_order)
        : problem_(&problem),
          points_(points),
          weights_(weights),
          spatial_order_(spatial_order),
          sigma_t_(problem.mesh.cell_count()) {
        const std::size_t cells = problem.mesh.cell_count();
        for (std::size_t c = 0; c < cells; ++c) sigma_t_[c] = problem.sigma_a[c] + problem.sigma_s[c];
        flux_acc_.resize(cells);
        phi_.assign(cells, 0.0);
    }

    void set_points(std::span<const Direction> points) { points_ = points; }

    /// out = streaming + scattering - removal + isotropic source.
    void evaluate_rhs(const AngularFluxField& psi, AngularFluxField& out) {
        flux_acc_.compute(psi, weights_, phi_);
        const ProblemSpec& p = *problem_;
        parallel_for(psi.n_ordinates, [&](std::size_t q) {
            auto rhs = out.plane(q);
            std::fill(rhs.begin(), rhs.end(), 0.0);
            transport_plane_update(psi.plane(q), rhs, p.mesh, points_[q], spatial_order_);
            const auto in = psi.plane(q);
            for (std::size_t cell = 0; cell < rhs.size(); ++cell)
                rhs[cell] += (p.sigma_s[cell] * phi_[cell] + p.source[cell]) / four_pi -
                             sigma_t_[cell] * in[cell];
        });
    }

    const CellField& scalar_flux() const { return phi_; }

  private:
    const ProblemSpec* problem_;
    std::span<const Direction> points_;
    std::span<const double> weights_;
    int spatial_order_;
    CellField sigma_t_;
    CellField phi_;
    detail::ScalarFluxAccumulator flux_acc_;
};

/// One Heun (SSP-RK2) step: psi <- (psi + Euler(Euler(psi))) / 2.
/// `stage` and `rhs` are caller-owned scratch fields of matching shape.
template <class RhsFn>
void step_heun(AngularFluxField& psi, RhsFn&& rhs_fn, double dt, AngularFluxField& stage,
               AngularFluxField& rhs) {
    rhs_fn(psi, rhs);
    parallel_for(psi.n_ordinates, [&](std::size_t q) {
        auto s = stage.plane(q);
        const auto p = psi.plane(q);
        const auto r = rhs.plane(q);
        for (std::size_t c = 0; c < s.size(); ++c) s[c] = p[c] + dt * r[c];
    });
    rhs_fn(stage, rhs);
    parallel_for(psi.n_ordinates, [&](std::size_t q) {
        auto p = psi.plane(q);
        const auto s = stage.plane(q);
        const auto r = rhs.plane(q);
        for (std::size_t c = 0; c < p.size(); ++c) p[c] = 0.5 * (p[c] + s[c] + dt * r[c]);
    });
}

using RunManifest = std::vector<std::pair<std::string, std::string>>;

struct StepView {
    int step;
    double time;
    const AngularFluxField& psi;
    std::span<const Direction> points;
    std::span<const double> weights;
    const SpatialMesh& mesh;
};

using StepObserver = std::function<void(const StepView&)>;

struct RunResult {
    AngularFluxField psi;
    std::vector<Direction> points;
    std::vector<double> weights;
    SpatialMesh mesh;
    RunManifest manifest;
    int steps = 0;
    double dt = 0.0;
    double initial_mass = 0.0;
    double final_mass = 0.0;
    double fv_seconds = 0.0;
    double rotation_seconds = 0.0;
    double total_seconds = 0.0;
    double rotation_share = 0.0;
    double rescale_max_rel_dev = 0.0;
};

inline double total_mass(const AngularFluxField& psi, std::span<const double> weights,
                         const SpatialMesh& mesh) {
    double sum = 0.0;
    for (std::size_t q = 0; q < psi.n_ordinates; ++q) {
        double plane_sum = 0.0;
        for (double v : psi.plane(q)) plane_sum += v;
        sum += weights[q] * plane_sum;
    }
    return sum * mesh.dx() * mesh.dy();
}

namespace detail {

struct PhaseTimer {
    using clock = std::chrono::steady_clock;
    clock::time_point mark = clock::now();

    double lap() {
        const auto now = clock::now();
        const double s = std::chrono::duration<double>(now - mark).count();
        mark = now;
        return s;
    }
};

inline void check_finite(const AngularFluxField& psi, int step) {
    for (double v : psi.data)
        if (!std::isfinite(v))
            throw std::runtime_error("solver aborted: non-finite angular flux at step " +
                                     std::to_string(step));
}

// Per-cell conservative rescale of `fresh` to the per-cell masses of `ref`.
// Returns the largest relative mass deviation after rescaling when auditing.
inline double rescale_to_reference(AngularFluxField& fresh, const AngularFluxField& ref,
                                   std::span<const double> weights, ScalarFluxAccumulator& acc,
                                   CellField& scale, CellField& mass_old, bool audit) {
    acc.compute(fresh, weights, scale);  // new masses, turned into factors below
    acc.compute(ref, weights, mass_old);
    for (std::size_t c = 0; c < scale.size(); ++c) {
        if (scale[c] == 0.0) {
            if (mass_old[c] != 0.0)
                throw std::runtime_error("conservative rescale: interpolation annihilated mass");
            scale[c] = 1.0;
        } else {
            scale[c] = mass_old[c] / scale[c];
        }
    }
    parallel_for(fresh.n_ordinates, [&](std::size_t q) {
        auto plane = fresh.plane(q);
        for (std::size_t c = 0; c < plane.size(); ++c) plane[c] *= scale[c];
    });
    if (!audit) return 0.0;
    CellField& check = scale;
    acc.compute(fresh, weights, check);
    double worst = 0.0;
    for (std::size_t c = 0; c < check.size(); ++c) {
        if (mass_old[c] == 0.0 && check[c] == 0.0) continue;
        const double denom = std::max(std::abs(mass_old[c]), 1e-300);
        worst = std::max(worst, std::abs(check[c] - mass_old[c]) / denom);
    }
    return worst;
}

// Applies a sparse row operator plane-wise: out.plane(q) = sum_k w_k in.plane(col_k).
inline void apply_operator_to_field(const InterpolationOperator& op, const AngularFluxField& in,
                                    AngularFluxField& out) {
    parallel_for(op.rows(), [&](std::size_t q) {
        const auto& cols = op.cols[q];
        const auto& w = op.weights[q];
        const auto a = in.plane(cols[0]);
        const auto b = in.plane(cols[1]);
        const auto c = in.plane(cols[2]);
        auto dst = out.plane(q);
        for (std::size_t cell = 0; cell < dst.size(); ++cell)
            dst[cell] = w[0] * a[cell] + w[1] * b[cell] + w[2] * c[cell];
    });
}

inline AngularFluxField initial_flux(const ProblemSpec& problem, std::size_t n_q) {
    AngularFluxField psi(n_q, problem.mesh.cell_count());
    parallel_for(n_q, [&](std::size_t q) {
        auto plane = psi.plane(q);
        for (std::size_t c = 0; c < plane.size(); ++c) plane[c] = problem.initial_isotropic[c];
    });
    return psi;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

namespace detail {

struct RunSetup {
    std::vector<Direction> points;
    std::vector<double> weights;
    OctahedralQuadrature octa;      // valid for the octahedral kind
    ProductQuadrature product;      // valid for the product kind
    double dt = 0.0;
    int steps = 0;
};

inline RunSetup make_setup(const SolverConfig& config, const ProblemSpec& problem) {
    RunSetup setup;
    if (config.quadrature == QuadratureKind::octahedral) {
        setup.octa = build_octahedral_quadrature(config.order);
        setup.points = setup.octa.points;
        setup.weights = setup.octa.weights;
    } else {
        setup.product = build_product_quadrature(config.order);
        setup.points = setup.product.points;
        setup.weights = setup.product.weights;
    }
    const double dt_cfl = config.cfl * std::min(problem.mesh.dx(), problem.mesh.dy());
    setup.steps = std::max(1, static_cast<int>(std::ceil(problem.t_end / dt_cfl - 1e-12)));
    setup.dt = problem.t_end / setup.steps;
    return setup;
}

inline void base_manifest(RunManifest& m, const SolverConfig& config, const ProblemSpec& problem,
                          const RunSetup& setup) {
    m.emplace_back("problem", problem.name);
    m.emplace_back("nx", std::to_string(problem.mesh.nx));
    m.emplace_back("ny", std::to_string(problem.mesh.ny));
    m.emplace_back("domain", fmt(problem.mesh.x_min) + " " + fmt(problem.mesh.x_max) + " " +
                                 fmt(problem.mesh.y_min) + " " + fmt(problem.mesh.y_max));
    m.emplace_back("t_end", fmt(problem.t_end));
    m.emplace_back("quadrature", to_string(config.quadrature));
    m.emplace_back("order_n", std::to_string(config.order));
    m.emplace_back("n_q", std::to_string(setup.points.size()));
    m.emplace_back("spatial_order", std::to_string(config.spatial_order));
    m.emplace_back("cfl", fmt(config.cfl));
    m.emplace_back("delta", fmt(config.delta));
    m.emplace_back("schedule", to_string(config.schedule));
    m.emplace_back("conserve_mass", config.conserve_mass ? "true" : "false");
    m.emplace_back("seed", std::to_string(config.seed));
    m.emplace_back("rng", std::string(Rng::name()));
    m.emplace_back("dt", fmt(setup.dt));
    m.emplace_back("steps", std::to_string(setup.steps));
    m.emplace_back("threads", std::to_string(worker_count()));
}

}  // namespace detail

/// The rotation/interpolation phase of one rS_N step. Owns the schedule
/// bookkeeping (axis reuse for forth_and_back, base point restore).
class RotationPhase {
  public:
    RotationPhase(const SolverConfig& config, detail::RunSetup& setup, Rng& rng)
        : config_(&config), setup_(&setup), rng_(&rng) {
        if (config.quadrature == QuadratureKind::product) base_points_ = setup.points;
    }

    bool active() const { return config_->schedule != RotationSchedule::none && config_->delta > 0.0; }

    /// Rotate the ordinate set and interpolate psi onto it. `scratch` receives
    /// the interpolated field and is swapped into psi.
    double apply(int step, AngularFluxField& psi, AngularFluxField& scratch,
                 detail::ScalarFluxAccumulator& acc, CellField& tmp_a, CellField& tmp_b) {
        double audit_dev = 0.0;
        if (config_->quadrature == QuadratureKind::product)
            apply_product(step, psi, scratch);
        else
            apply_octahedral(step, psi, scratch, audit_dev, acc, tmp_a, tmp_b);
        return audit_dev;
    }

  private:
    void interpolate_octahedral(const std::vector<Direction>& targets, AngularFluxField& psi,
                                AngularFluxField& scratch, double& audit_dev,
                                detail::ScalarFluxAccumulator& acc, CellField& tmp_a, CellField& tmp_b) {
        const InterpolationOperator op = build_interpolation_operator(setup_->octa, targets);
        detail::apply_operator_to_field(op, psi, scratch);
        if (config_->conserve_mass)
            audit_dev = std::max(audit_dev,
                                 detail::rescale_to_reference(scratch, psi, setup_->weights, acc, tmp_a,
                                                              tmp_b, config_->audit_conservation));
        std::swap(psi.data, scratch.data);
        setup_->octa.points = targets;
        setup_->points = targets;
    }

    void apply_octahedral(int step, AngularFluxField& psi, AngularFluxField& scratch, double& audit_dev,
                          detail::ScalarFluxAccumulator& acc, CellField& tmp_a, CellField& tmp_b) {
        // per-step angle: delta * dt / N keeps the interpolated fraction of a
        // triangle proportional to dt and independent of the angular
        // resolution, which is what makes the observable smoothing match the
        // published runs
        const double angle = config_->delta * setup_->dt / static_cast<double>(config_->order);
        switch (config_->schedule) {
            case RotationSchedule::random_each_step: {
                const Mat3 r = rotation_matrix({random_axis(*rng_), angle});
                interpolate_octahedral(rotate_points(setup_->octa.points, r), psi, scratch, audit_dev, acc,
                                       tmp_a, tmp_b);
                // orthogonality drift from the cumulative rotations
                if (++rotations_since_renorm_ >= 256) {
                    for (auto& p : setup_->octa.points) p = normalized(p);
                    setup_->points = setup_->octa.points;
                    rotations_since_renorm_ = 0;
                }
                break;
            }
            case RotationSchedule::forth_and_back: {
                if (step % 2 == 0) {
                    base_points_ = setup_->octa.points;
                    const Mat3 r = rotation_matrix({random_axis(*rng_), angle});
                    interpolate_octahedral(rotate_points(setup_->octa.points, r), psi, scratch, audit_dev,
                                           acc, tmp_a, tmp_b);
                } else {
                    // rotate back onto the saved points, restoring them exactly
                    interpolate_octahedral(base_points_, psi, scratch, audit_dev, acc, tmp_a, tmp_b);
                }
                break;
            }
            case RotationSchedule::double_half_step: {
                const Vec3 axis = random_axis(*rng_);
                const Mat3 r = rotation_matrix({axis, 0.5 * angle});
                const std::vector<Direction> base = setup_->octa.points;
                interpolate_octahedral(rotate_points(base, r), psi, scratch, audit_dev, acc, tmp_a, tmp_b);
                interpolate_octahedral(base, psi, scratch, audit_dev, acc, tmp_a, tmp_b);
                break;
            }
            case RotationSchedule::none: break;
        }
    }

    void apply_product(int step, AngularFluxField& psi, AngularFluxField& scratch) {
        // z-axis variant: the rotation shifts every azimuthal ring by the same
        // angle, so the interpolation is periodic and linear in phi.
        const double fraction = config_->delta * setup_->dt;  // angle / delta_phi
        if (fraction > 1.0)
            throw std::runtime_error("product rotation exceeds one azimuthal cell per step");
        const bool forth = step % 2 == 0;
        const int phi_count = setup_->product.phi_count;
        const int step_dir = forth ? 1 : phi_count - 1;
        const std::size_t n_q = psi.n_ordinates;
        parallel_for(n_q, [&](std::size_t q) {
            const std::size_t ring = q / phi_count;
            const std::size_t i = q % phi_count;
            const std::size_t neighbor = ring * phi_count + (i + step_dir) % phi_count;
            const auto a = psi.plane(q);
            const auto b = psi.plane(neighbor);
            auto dst = scratch.plane(q);
            for (std::size_t cell = 0; cell < dst.size(); ++cell)
                dst[cell] = (1.0 - fraction) * a[cell] + fraction * b[cell];
        });
        std::swap(psi.data, scratch.data);
        if (forth) {
            const double angle = fraction * setup_->product.delta_phi();
            const Mat3 r = rotation_matrix({{0.0, 0.0, 1.0}, angle});
            setup_->points = rotate_points(base_points_, r);
        } else {
            setup_->points = base_points_;
        }
    }

    const SolverConfig* config_;
    detail::RunSetup* setup_;
    Rng* rng_;
    std::vector<Direction> base_points_;
    int rotations_since_renorm_ = 0;
};

namespace detail {

inline RunResult run_loop(const SolverConfig& config, const ProblemSpec& problem, bool rotate,
                          const StepObserver* observer) {
    config.validate();
    problem.validate();
    if (rotate && config.schedule == RotationSchedule::none && config.delta > 0.0)
        throw std::invalid_argument("run_rsn: rotation schedule is 'none'");

    RunSetup setup = make_setup(config, problem);
    const std::size_t n_q = setup.points.size();
    const std::size_t cells = problem.mesh.cell_count();

    Rng rng(config.seed);
    AngularFluxField psi = initial_flux(problem, n_q);
    AngularFluxField stage(n_q, cells);
    AngularFluxField rhs(n_q, cells);
    TransportOperator transport(problem, setup.points, setup.weights, config.spatial_order);
    ScalarFluxAccumulator mass_acc;
    mass_acc.resize(cells);
    CellField tmp_a, tmp_b;

    RotationPhase rotation(config, setup, rng);
    const bool rotating = rotate && rotation.active();

    RunResult result;
    result.mesh = problem.mesh;
    result.steps = setup.steps;
    result.dt = setup.dt;
    result.initial_mass = total_mass(psi, setup.weights, problem.mesh);

    PhaseTimer total_timer;
    PhaseTimer phase;
    double fv_seconds = 0.0;
    double rot_seconds = 0.0;
    double audit_worst = 0.0;

    auto rhs_fn = [&](const AngularFluxField& in, AngularFluxField& out) {
        transport.evaluate_rhs(in, out);
    };

    for (int step = 0; step < setup.steps; ++step) {
        phase.lap();
        step_heun(psi, rhs_fn, setup.dt, stage, rhs);
        fv_seconds += phase.lap();

        if (rotating) {
            audit_worst = std::max(audit_worst, rotation.apply(step, psi, stage, mass_acc, tmp_a, tmp_b));
            transport.set_points(setup.points);
            rot_seconds += phase.lap();
        }

        if (config.nan_check_interval > 0 && (step + 1) % config.nan_check_interval == 0)
            check_finite(psi, step + 1);

        if (observer) {
            const StepView view{step + 1, setup.dt * (step + 1), psi, setup.points, setup.weights,
                                problem.mesh};
            (*observer)(view);
        }
    }
    check_finite(psi, setup.steps);

    result.total_seconds = total_timer.lap();
    result.fv_seconds = fv_seconds;
    result.rotation_seconds = rot_seconds;
    result.rotation_share = result.total_seconds > 0.0 ? rot_seconds / result.total_seconds : 0.0;
    result.final_mass = total_mass(psi, setup.weights, problem.mesh);
    result.rescale_max_rel_dev = audit_worst;

    base_manifest(result.manifest, config, problem, setup);
    result.manifest.emplace_back("initial_mass", fmt(result.initial_mass));
    result.manifest.emplace_back("final_mass", fmt(result.final_mass));
    result.manifest.emplace_back("fv_seconds", fmt(fv_seconds));
    result.manifest.emplace_back("rotation_seconds", fmt(rot_seconds));
    result.manifest.emplace_back("total_seconds", fmt(result.total_seconds));
    result.manifest.emplace_back("rotation_share", fmt(result.rotation_share));
    if (config.conserve_mass && config.audit_conservation)
        result.manifest.emplace_back("rescale_max_rel_dev", fmt(audit_worst));

    result.psi = std::move(psi);
    result.points = std::move(setup.points);
    result.weights = std::move(setup.weights);
    return result;
}

}  // namespace detail

/// Plain discrete-ordinates run: Heun time loop, no rotation.
inline RunResult run_sn(const SolverConfig& config, const ProblemSpec& problem,
                        const StepObserver* observer = nullptr) {
    return detail::run_loop(config, problem, false, observer);
}

/// Rotated discrete-ordinates run: each step appends a rotation of the
/// ordinate set and an interpolation of the angular flux onto the rotated
/// ordinates, per the configured schedule.
inline RunResult run_rsn(const SolverConfig& config, const ProblemSpec& problem,
                         const StepObserver* observer = nullptr) {
    return detail::run_loop(config, problem, true, observer);
}

}  // namespace raysn
