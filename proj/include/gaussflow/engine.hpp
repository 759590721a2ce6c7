#pragma once

#include "gaussflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gaussflow {

enum class FlowVariant {
    FLOW0,  ///< e^{|F|^2/m} (H + F_perp)
    FLOW,   ///< e^{|F|^2/m} (H + F)
    FLOWP   ///< e^{a|F|^2/m} (c(t) H + b F)
};

/// Curvature discretisation used by the surface flow.
enum class SurfaceCurvature { QuadricFit, Cotangent };

inline const char* to_string(FlowVariant v)
{
    switch (v) {
    case FlowVariant::FLOW0: return "FLOW0";
    case FlowVariant::FLOW: return "FLOW";
    case FlowVariant::FLOWP: return "FLOWP";
    }
    return "?";
}

inline FlowVariant parse_variant(const std::string& s)
{
    if (s == "FLOW0")
        return FlowVariant::FLOW0;
    if (s == "FLOW")
        return FlowVariant::FLOW;
    if (s == "FLOWP")
        return FlowVariant::FLOWP;
    throw invalid_config("unknown flow variant '" + s + "' (expected FLOW0, FLOW or FLOWP)");
}

inline const char* to_string(SurfaceCurvature c)
{
    return c == SurfaceCurvature::QuadricFit ? "quadric" : "cotangent";
}

inline SurfaceCurvature parse_surface_curvature(const std::string& s)
{
    if (s == "quadric")
        return SurfaceCurvature::QuadricFit;
    if (s == "cotangent")
        return SurfaceCurvature::Cotangent;
    throw invalid_config("unknown surface curvature '" + s + "' (expected quadric or cotangent)");
}

struct FlowParams {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    FlowVariant variant = FlowVariant::FLOW;
    std::optional<int> m_override;
    double c_slope = 0.0;
    SurfaceCurvature surface_curvature = SurfaceCurvature::QuadricFit;

    // time stepping
    double cfl = 0.25;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    /// Accuracy limit on the per-step relative change of any |F_v|; 0 disables.
    double max_relative_growth = 0.01;

    double c_at(double t) const { return c + c_slope * t; }

    int effective_m(const DiscreteImmersion& s) const { return m_override.value_or(s.m()); }

    /// a = 0 or b = 0 leaves the paper's setting (pure curvature flow testing).
    bool out_of_paper() const { return a == 0.0 || b == 0.0; }

    void validate(double horizon = 0.0) const
    {
        if (!(a >= 0.0) || !(b >= 0.0) || !(c > 0.0) || !std::isfinite(a) || !std::isfinite(b) ||
            !std::isfinite(c))
            throw invalid_config("flow constants need a >= 0, b >= 0, c > 0");
        if (variant != FlowVariant::FLOWP && (a != 1.0 || b != 1.0 || c != 1.0 || c_slope != 0.0))
            throw invalid_config(std::string(to_string(variant)) + " fixes a = b = c = 1 and c_slope = 0");
        if (m_override && *m_override < 1)
            throw invalid_config("m_override must be >= 1");
        if (!std::isfinite(c_slope))
            throw invalid_config("c_slope must be finite");
        if (std::isfinite(horizon) && !(c_at(horizon) > 0.0))
            throw invalid_config("c(t) must stay positive over the horizon");
        if (!(cfl > 0.0) || !(dt_min > 0.0) || !(dt_max >= dt_min))
            throw invalid_config("time step controls need cfl > 0 and 0 < dt_min <= dt_max");
        if (!(max_relative_growth >= 0.0))
            throw invalid_config("max_relative_growth must be nonnegative");
    }
};

struct FlowThresholds {
    double h2_max = 1e6;
    double F2_max = 1e6;
    double F2_min = 1e-6;
    double quality_min = 0.05;

    void validate() const
    {
        if (!(h2_max > 0.0) || !(F2_max > 0.0) || !(F2_min > 0.0) || !(F2_min < F2_max))
            throw invalid_config("thresholds need h2_max > 0 and 0 < F2_min < F2_max");
        if (!(quality_min >= 0.0) || !(quality_min < 1.0))
            throw invalid_config("quality_min must lie in [0, 1)");
    }
};

struct Diagnostics {
    double min_F2 = 0.0;
    double max_F2 = 0.0;
    double max_h2 = 0.0;
    double weighted_area = 0.0;
    double mesh_quality = 0.0;
    double dt_used = 0.0;
};

struct FlowState {
    double t = 0.0;
    DiscreteImmersion immersion;
    Diagnostics diagnostics;
};

enum class StopKind { CURVATURE_BLOWUP, POSITION_BLOWUP, POSITION_COLLAPSE, MESH_DEGENERATE, HORIZON_REACHED };

inline const char* to_string(StopKind k)
{
    switch (k) {
    case StopKind::CURVATURE_BLOWUP: return "CURVATURE_BLOWUP";
    case StopKind::POSITION_BLOWUP: return "POSITION_BLOWUP";
    case StopKind::POSITION_COLLAPSE: return "POSITION_COLLAPSE";
    case StopKind::MESH_DEGENERATE: return "MESH_DEGENERATE";
    case StopKind::HORIZON_REACHED: return "HORIZON_REACHED";
    }
    return "?";
}

inline StopKind parse_stop_kind(const std::string& s)
{
    for (auto k : {StopKind::CURVATURE_BLOWUP, StopKind::POSITION_BLOWUP, StopKind::POSITION_COLLAPSE,
                   StopKind::MESH_DEGENERATE, StopKind::HORIZON_REACHED})
        if (s == to_string(k))
            return k;
    throw invalid_config("unknown stop reason '" + s + "'");
}

struct StopReason {
    StopKind kind = StopKind::HORIZON_REACHED;
    double t_stop = 0.0;
    std::string detail;
};

/// Entry of the event stream: threshold crossings and the terminal stop.
struct FlowEvent {
    std::string event;
    double t = 0.0;
    std::string detail;
};

struct RunOptions {
    int snapshot_stride = 1;       ///< keep every n-th step
    double sample_interval = 0.0;  ///< if > 0, snapshots at multiples of this time instead of by stride
};

struct FlowTrajectory {
    std::vector<FlowState> states;
    StopReason stop;
    std::vector<FlowEvent> events;
    FlowParams params;
    FlowThresholds thresholds;
    double horizon = 0.0;
    std::size_t steps = 0;
    /// Estimated uncertainty of t_stop: last step + accumulated time-integration error + spatial term.
    double t_stop_error = 0.0;

    const FlowState& initial() const { return states.front(); }
    const FlowState& final() const { return states.back(); }
};

// ---------------------------------------------------------------------------
// Curvature and velocity

/// Mean curvature, |h|^2 and (for surfaces) unit normals used by the flow.
struct FlowCurvature {
    VectorField H;
    ScalarField h2;
    VectorField normals;
};

namespace detail {

/// Area-weighted vertex normals (cross products summed over incident faces).
inline VectorField area_weighted_normals(const DiscreteImmersion& s)
{
    VectorField n = VectorField::Zero(3, s.vertex_count());
    for (const auto& f : s.topology().faces) {
        const Eigen::Vector3d p0 = s.vertex(f[0]), p1 = s.vertex(f[1]), p2 = s.vertex(f[2]);
        const Eigen::Vector3d w = (p1 - p0).cross(p2 - p0);
        for (int k = 0; k < 3; ++k)
            n.col(f[k]) += w;
    }
    for (int i = 0; i < s.vertex_count(); ++i) {
        const double len = n.col(i).norm();
        if (!(len > kDegenerateTolerance))
            throw degenerate_mesh("vertex normal vanishes at vertex " + std::to_string(i));
        n.col(i) /= len;
    }
    return n;
}

/// F_perp for curves: F minus its component along the central-difference tangent.
inline VectorField curve_normal_part(const DiscreteImmersion& s)
{
    const int n = s.vertex_count(), d = s.ambient_dim();
    const VectorField& F = s.vertices();
    VectorField out(d, n);
    for (int i = 0; i < n; ++i) {
        const auto t = F.col(s.next(i)) - F.col(s.prev(i));
        const double len = t.norm();
        if (!(len > kDegenerateTolerance))
            throw degenerate_mesh("central-difference tangent vanishes at vertex " + std::to_string(i));
        out.col(i) = F.col(i);
        for (int pass = 0; pass < 2; ++pass)
            out.col(i) -= (t.dot(out.col(i)) / (len * len)) * t;
    }
    return out;
}

/// F_perp for surfaces given unit normals.
inline VectorField surface_normal_part(const DiscreteImmersion& s, const VectorField& normals)
{
    VectorField out(3, s.vertex_count());
    for (int i = 0; i < s.vertex_count(); ++i)
        out.col(i) = normals.col(i).dot(s.vertex(i)) * normals.col(i);
    return out;
}

} // namespace detail

inline FlowCurvature flow_curvature(const DiscreteImmersion& s, SurfaceCurvature mode = SurfaceCurvature::QuadricFit)
{
    FlowCurvature out;
    if (s.is_curve()) {
        out.H = mean_curvature_vector(s);
        out.h2 = out.H.colwise().squaredNorm().transpose();
        return out;
    }
    auto fit = fitted_curvature(s);
    out.h2 = std::move(fit.h2);
    if (mode == SurfaceCurvature::QuadricFit) {
        out.H = std::move(fit.H);
        out.normals = std::move(fit.normal);
    } else {
        out.H = mean_curvature_vector(s);
        out.normals = detail::area_weighted_normals(s);
    }
    return out;
}

/// Normal part F_perp of the position with the flow's tangent spaces.
inline VectorField position_normal_part(const DiscreteImmersion& s, const FlowCurvature& k)
{
    return s.is_curve() ? detail::curve_normal_part(s) : detail::surface_normal_part(s, k.normals);
}

/// dF/dt given precomputed curvature.
inline VectorField velocity(const DiscreteImmersion& s, const FlowCurvature& k, const FlowParams& p, double t)
{
    const double m = p.effective_m(s);
    const double ct = p.c_at(t);
    const ScalarField F2 = squared_norms(s);
    VectorField v(s.ambient_dim(), s.vertex_count());
    switch (p.variant) {
    case FlowVariant::FLOW0: {
        const VectorField Fp = position_normal_part(s, k);
        for (int i = 0; i < s.vertex_count(); ++i)
            v.col(i) = guarded_exp(F2[i] / m) * (k.H.col(i) + Fp.col(i));
        break;
    }
    case FlowVariant::FLOW:
        for (int i = 0; i < s.vertex_count(); ++i)
            v.col(i) = guarded_exp(F2[i] / m) * (k.H.col(i) + s.vertices().col(i));
        break;
    case FlowVariant::FLOWP:
        for (int i = 0; i < s.vertex_count(); ++i)
            v.col(i) = guarded_exp(p.a * F2[i] / m) * (ct * k.H.col(i) + p.b * s.vertices().col(i));
        break;
    }
    return v;
}

inline VectorField velocity(const DiscreteImmersion& s, const FlowParams& p, double t = 0.0)
{
    return velocity(s, flow_curvature(s, p.surface_curvature), p, t);
}

/// Explicit-scheme step: cfl h_min^2 / (c(t) e^{a max|F|^2/m}), clamped above by dt_max.
inline double stability_dt(const DiscreteImmersion& s, const FlowParams& p, double t = 0.0)
{
    const auto [h_min, h_max] = edge_length_range(s);
    (void)h_max;
    const double m = p.effective_m(s);
    const double max_F2 = squared_norms(s).maxCoeff();
    const double dt = p.cfl * h_min * h_min / (p.c_at(t) * guarded_exp(p.a * max_F2 / m));
    if (!(dt >= p.dt_min))
        throw timestep_underflow("stable step " + format_double(dt) + " is below dt_min " + format_double(p.dt_min));
    return std::min(dt, p.dt_max);
}

inline Diagnostics diagnostics(const DiscreteImmersion& s, const FlowCurvature& k, double dt_used = 0.0)
{
    Diagnostics d;
    const ScalarField F2 = squared_norms(s);
    d.min_F2 = F2.minCoeff();
    d.max_F2 = F2.maxCoeff();
    d.max_h2 = k.h2.maxCoeff();
    d.weighted_area = weighted_area(s);
    d.mesh_quality = mesh_quality(s);
    d.dt_used = dt_used;
    return d;
}

inline Diagnostics diagnostics(const DiscreteImmersion& s, const FlowParams& p, double dt_used = 0.0)
{
    return diagnostics(s, flow_curvature(s, p.surface_curvature), dt_used);
}

inline FlowState make_state(const DiscreteImmersion& s, const FlowParams& p, double t = 0.0)
{
    return {t, s, diagnostics(s, p)};
}

namespace detail {

/// Classical RK4 from (s, t) with step dt; k1 is the velocity at s.
inline DiscreteImmersion rk4(const DiscreteImmersion& s, const VectorField& k1, const FlowParams& p, double t,
                             double dt)
{
    const VectorField& F = s.vertices();
    auto eval = [&](const VectorField& X, double tt) {
        const auto si = s.with_vertices(X);
        return velocity(si, flow_curvature(si, p.surface_curvature), p, tt);
    };
    const VectorField k2 = eval(F + (0.5 * dt) * k1, t + 0.5 * dt);
    const VectorField k3 = eval(F + (0.5 * dt) * k2, t + 0.5 * dt);
    const VectorField k4 = eval(F + dt * k3, t + dt);
    return s.with_vertices(F + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Largest step keeping every |F_v| within a relative change of `growth` at the current speed.
inline double growth_limited_dt(const DiscreteImmersion& s, const VectorField& v, double growth)
{
    if (!(growth > 0.0))
        return std::numeric_limits<double>::infinity();
    double dt = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.vertex_count(); ++i) {
        const double speed = v.col(i).norm();
        if (speed > 0.0)
            dt = std::min(dt, growth * s.vertices().col(i).norm() / speed);
    }
    return dt;
}

} // namespace detail

/// One RK4 step with dt = stability_dt.
inline FlowState step(const FlowState& state, const FlowParams& p)
{
    const auto& s = state.immersion;
    const double dt = stability_dt(s, p, state.t);
    const auto k = flow_curvature(s, p.surface_curvature);
    const auto next = detail::rk4(s, velocity(s, k, p, state.t), p, state.t, dt);
    return {state.t + dt, next, diagnostics(next, p, dt)};
}

/// Stop kinds whose thresholds the diagnostics cross, in precedence order
/// collapse, position, curvature, mesh.
inline std::vector<std::pair<StopKind, std::string>> crossed_thresholds(const Diagnostics& d, const FlowThresholds& th)
{
    std::vector<std::pair<StopKind, std::string>> out;
    if (d.max_F2 < th.F2_min)
        out.emplace_back(StopKind::POSITION_COLLAPSE, "max|F|^2 = " + format_double(d.max_F2) + " < F2_min");
    if (d.max_F2 > th.F2_max)
        out.emplace_back(StopKind::POSITION_BLOWUP, "max|F|^2 = " + format_double(d.max_F2) + " > F2_max");
    if (d.max_h2 > th.h2_max)
        out.emplace_back(StopKind::CURVATURE_BLOWUP, "max|h|^2 = " + format_double(d.max_h2) + " > h2_max");
    if (d.mesh_quality < th.quality_min)
        out.emplace_back(StopKind::MESH_DEGENERATE, "mesh quality " + format_double(d.mesh_quality) + " < quality_min");
    return out;
}

/// Evolve `initial` until a threshold is crossed, a guard fires, or the horizon is reached.
inline FlowTrajectory run(const DiscreteImmersion& initial, const FlowParams& p, double horizon,
                          const FlowThresholds& thresholds = {}, const RunOptions& opt = {})
{
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        throw invalid_config("horizon must be finite and nonnegative");
    p.validate(horizon);
    thresholds.validate();
    if (opt.snapshot_stride < 1)
        throw invalid_config("snapshot stride must be >= 1");
    if (!(opt.sample_interval >= 0.0))
        throw invalid_config("sample interval must be nonnegative");

    FlowTrajectory traj;
    traj.params = p;
    traj.thresholds = thresholds;
    traj.horizon = horizon;

    const auto [h_min0, h_max0] = edge_length_range(initial);
    (void)h_min0;
    FlowCurvature k = flow_curvature(initial, p.surface_curvature);
    FlowState current{0.0, initial, diagnostics(initial, k)};
    traj.states.push_back(current);
    const Diagnostics d0 = current.diagnostics;
    const double spatial_rel = h_max0 * h_max0 * d0.max_h2 / 12.0;
    double time_error = 0.0;

    auto finish = [&](StopKind kind, std::string detail) {
        if (traj.states.back().t != current.t)
            traj.states.push_back(current);
        traj.stop = {kind, current.t, std::move(detail)};
        traj.events.push_back({"STOP", current.t, std::string(to_string(kind)) + ": " + traj.stop.detail});
        traj.t_stop_error = current.diagnostics.dt_used + time_error + current.t * spatial_rel;
        return traj;
    };
    auto indicated_blowup = [&]() {
        const auto& d = current.diagnostics;
        const double pos = std::log(d.max_F2 / d0.max_F2);
        const double curv = std::log(d.max_h2 / d0.max_h2);
        return pos >= curv ? StopKind::POSITION_BLOWUP : StopKind::CURVATURE_BLOWUP;
    };

    auto check = [&]() -> std::optional<StopKind> {
        auto crossed = crossed_thresholds(current.diagnostics, thresholds);
        if (crossed.empty())
            return std::nullopt;
        for (const auto& [kind, detail] : crossed)
            traj.events.push_back({std::string(to_string(kind)), current.t, detail});
        return crossed.front().first;
    };
    if (auto kind = check())
        return finish(*kind, traj.events.back().detail);

    double next_sample = opt.sample_interval > 0.0 ? opt.sample_interval : std::numeric_limits<double>::infinity();
    std::size_t since_snapshot = 0;
    while (true) {
        if (current.t >= horizon)
            return finish(StopKind::HORIZON_REACHED, "horizon " + format_double(horizon) + " reached");
        double dt;
        VectorField v;
        try {
            v = velocity(current.immersion, k, p, current.t);
            dt = stability_dt(current.immersion, p, current.t);
        } catch (const overflow_guard& e) {
            traj.events.push_back({"OVERFLOW_GUARD", current.t, e.what()});
            return finish(StopKind::POSITION_BLOWUP, e.what());
        } catch (const timestep_underflow& e) {
            traj.events.push_back({"TIMESTEP_UNDERFLOW", current.t, e.what()});
            return finish(indicated_blowup(), e.what());
        } catch (const degenerate_mesh& e) {
            return finish(StopKind::MESH_DEGENERATE, e.what());
        }
        const double dt_growth = detail::growth_limited_dt(current.immersion, v, p.max_relative_growth);
        if (dt_growth < p.dt_min) {
            traj.events.push_back({"TIMESTEP_UNDERFLOW", current.t, "growth-limited step below dt_min"});
            return finish(indicated_blowup(), "growth-limited step " + format_double(dt_growth) + " is below dt_min");
        }
        dt = std::min(dt, dt_growth);
        bool on_sample = false;
        if (current.t + dt >= horizon)
            dt = horizon - current.t;
        if (current.t + dt >= next_sample) {
            dt = next_sample - current.t;
            on_sample = true;
        }

        std::optional<DiscreteImmersion> next;
        FlowCurvature k_next;
        try {
            next = detail::rk4(current.immersion, v, p, current.t, dt);
            k_next = flow_curvature(*next, p.surface_curvature);
        } catch (const overflow_guard& e) {
            traj.events.push_back({"OVERFLOW_GUARD", current.t, e.what()});
            return finish(StopKind::POSITION_BLOWUP, e.what());
        } catch (const degenerate_mesh& e) {
            return finish(StopKind::MESH_DEGENERATE, e.what());
        }

        // per-step relative change of |F|^2, feeding the fourth-order error estimate
        const ScalarField F2a = squared_norms(current.immersion), F2b = squared_norms(*next);
        const double rho = ((F2b - F2a).cwiseAbs().array() / F2a.array().max(1e-300)).maxCoeff();
        time_error += dt * std::pow(rho, 4);

        const double t_next = on_sample ? next_sample : current.t + dt;
        const Diagnostics d_next = diagnostics(*next, k_next, dt);
        current = {t_next, std::move(*next), d_next};
        k = std::move(k_next);
        ++traj.steps;
        ++since_snapshot;
        if (on_sample)
            next_sample = opt.sample_interval * std::round(t_next / opt.sample_interval + 1.0);

        if (auto kind = check())
            return finish(*kind, traj.events.back().detail);
        const bool keep = opt.sample_interval > 0.0 ? on_sample : since_snapshot >= static_cast<std::size_t>(opt.snapshot_stride);
        if (keep) {
            traj.states.push_back(current);
            since_snapshot = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Trajectory verifiers

struct EvolutionReport {
    double max_residual = 0.0;       ///< max over vertices and interior snapshots, normalised
    double l2_residual = 0.0;        ///< root-mean-square of the normalised residuals
    double metric_max_residual = 0.0;  ///< same for d/dt log(vertex area) against half the metric trace
    double metric_l2_residual = 0.0;
    std::size_t samples = 0;         ///< interior snapshots used
};

/// Compare the vertexwise d|F|^2/dt along a trajectory with
/// e^{a|F|^2/m}(c Delta|F|^2 + 2(b|F|^2 - mc)); FLOW0 subtracts the tangential
/// transport 2 e^{|F|^2/m}|F_T|^2. Time derivatives are three-point central
/// differences on the snapshot times.
inline EvolutionReport verify_scalar_evolution(const FlowTrajectory& traj, const FlowParams& p)
{
    if (traj.states.size() < 3)
        throw insufficient_snapshots("scalar evolution check needs at least 3 snapshots");
    const auto& s0 = traj.states.front().immersion;
    const double m = p.effective_m(s0);
    const bool flow0 = p.variant == FlowVariant::FLOW0;
    const double a = p.variant == FlowVariant::FLOWP ? p.a : 1.0;
    const double b = p.variant == FlowVariant::FLOWP ? p.b : 1.0;

    EvolutionReport rep;
    double sum_sq = 0.0, metric_sum_sq = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < traj.states.size(); ++k) {
        const auto& prev = traj.states[k - 1];
        const auto& cur = traj.states[k];
        const auto& next = traj.states[k + 1];
        const double h1 = cur.t - prev.t, h2 = next.t - cur.t;
        if (!(h1 > 0.0) || !(h2 > 0.0))
            throw insufficient_snapshots("snapshot times must be strictly increasing");
        // nonuniform three-point derivative at the middle node
        const double wp = -h2 / (h1 * (h1 + h2)), wc = (h2 - h1) / (h1 * h2), wn = h1 / (h2 * (h1 + h2));
        const auto& s = cur.immersion;
        const ScalarField F2 = squared_norms(s);
        const ScalarField dF2 =
            wp * squared_norms(prev.immersion) + wc * F2 + wn * squared_norms(next.immersion);
        const ScalarField lap = laplace_beltrami(s, F2);
        const auto curv = flow_curvature(s, p.surface_curvature);
        const VectorField Fp = position_normal_part(s, curv);
        const double c = p.variant == FlowVariant::FLOWP ? p.c_at(cur.t) : 1.0;

        const ScalarField A0 = vertex_areas(prev.immersion), A1 = vertex_areas(s), A2 = vertex_areas(next.immersion);
        for (int i = 0; i < s.vertex_count(); ++i) {
            const double phi = guarded_exp(a * F2[i] / m);
            const double FT2 = std::max(0.0, F2[i] - Fp.col(i).squaredNorm());
            double rhs = phi * (c * lap[i] + 2.0 * (b * F2[i] - m * c));
            if (flow0)
                rhs -= 2.0 * phi * FT2;
            const double r = std::abs(dF2[i] - rhs) / std::max(1.0, std::abs(rhs));
            rep.max_residual = std::max(rep.max_residual, r);
            sum_sq += r * r;

            // d/dt log A = (1/2) trace of dg/dt
            const double dlogA = wp * std::log(A0[i]) + wc * std::log(A1[i]) + wn * std::log(A2[i]);
            const double H2 = curv.H.col(i).squaredNorm();
            double trace_half;
            if (flow0)
                trace_half = -phi * (H2 + curv.H.col(i).dot(Fp.col(i)));
            else
                trace_half = 0.5 * phi * ((a * b / m) * 4.0 * FT2 - 2.0 * c * H2 + 2.0 * b * m);
            const double rm = std::abs(dlogA - trace_half) / std::max(1.0, std::abs(trace_half));
            rep.metric_max_residual = std::max(rep.metric_max_residual, rm);
            metric_sum_sq += rm * rm;
            ++count;
        }
        ++rep.samples;
    }
    rep.l2_residual = std::sqrt(sum_sq / static_cast<double>(count));
    rep.metric_l2_residual = std::sqrt(metric_sum_sq / static_cast<double>(count));
    return rep;
}

namespace detail {

inline double point_segment_distance(const AmbientVector& x, const AmbientVector& a, const AmbientVector& b)
{
    const AmbientVector ab = b - a;
    const double len2 = ab.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((x - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (a + s * ab - x).norm();
}

/// Distance from p to triangle (a, b, c) in R^3.
inline double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                      const Eigen::Vector3d& c)
{
    const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
    const Eigen::Vector3d n = ab.cross(ac);
    const double n2 = n.squaredNorm();
    if (n2 > 0.0) {
        // barycentric coordinates of the projection
        const Eigen::Vector3d q = p - (ap.dot(n) / n2) * n;
        const double u = (q - a).cross(ac).dot(n) / n2;
        const double v = ab.cross(q - a).dot(n) / n2;
        if (u >= 0.0 && v >= 0.0 && u + v <= 1.0)
            return std::abs(ap.dot(n)) / std::sqrt(n2);
    }
    return std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c),
                     point_segment_distance(p, c, a)});
}

/// Largest distance from a vertex of `from` to the image (polygon or triangle mesh) of `to`.
inline double directed_image_distance(const DiscreteImmersion& from, const DiscreteImmersion& to)
{
    double worst = 0.0;
    for (int i = 0; i < from.vertex_count(); ++i) {
        const AmbientVector x = from.vertex(i);
        double best = std::numeric_limits<double>::infinity();
        if (to.is_curve()) {
            for (int j = 0; j < to.vertex_count(); ++j)
                best = std::min(best, point_segment_distance(x, to.vertex(j), to.vertex(to.next(j))));
        } else {
            for (const auto& f : to.topology().faces)
                best = std::min(best, point_triangle_distance(x, to.vertex(f[0]), to.vertex(f[1]), to.vertex(f[2])));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

inline double diameter(const DiscreteImmersion& s)
{
    double d = 0.0;
    for (int i = 0; i < s.vertex_count(); ++i)
        for (int j = i + 1; j < s.vertex_count(); ++j)
            d = std::max(d, (s.vertex(i) - s.vertex(j)).squaredNorm());
    return std::sqrt(d);
}

inline bool same_time(double x, double y)
{
    return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x));
}

} // namespace detail

struct TangentialReport {
    std::vector<double> times;
    std::vector<double> distances;  ///< symmetric vertex-to-image Hausdorff distance over diameter
    double max_distance = 0.0;
};

/// Compare the images of a FLOW and a FLOW0 trajectory from the same initial
/// data at their common snapshot times.
inline TangentialReport tangential_equivalence(const FlowTrajectory& A, const FlowTrajectory& B)
{
    if (A.states.empty() || B.states.empty())
        throw mismatched_times("empty trajectory");
    const auto& a0 = A.initial().immersion;
    const auto& b0 = B.initial().immersion;
    if (a0.vertex_count() != b0.vertex_count() || a0.ambient_dim() != b0.ambient_dim() ||
        a0.vertices() != b0.vertices())
        throw mismatched_times("trajectories do not share their initial immersion");

    // every snapshot before either stop needs a partner in the other trajectory
    const double t_common = std::min(A.final().t, B.final().t);
    auto require_partners = [&](const FlowTrajectory& X, const FlowTrajectory& Y) {
        for (const auto& st : X.states) {
            if (st.t >= t_common && !detail::same_time(st.t, t_common))
                break;
            if (&st == &X.states.back())
                continue;
            const bool found = std::any_of(Y.states.begin(), Y.states.end(),
                                           [&](const FlowState& o) { return detail::same_time(o.t, st.t); });
            if (!found && st.t < t_common)
                throw mismatched_times("no matching snapshot at t = " + format_double(st.t));
        }
    };
    require_partners(A, B);
    require_partners(B, A);

    TangentialReport rep;
    std::size_t j = 0;
    for (const auto& sa : A.states) {
        while (j < B.states.size() && B.states[j].t < sa.t && !detail::same_time(B.states[j].t, sa.t))
            ++j;
        if (j == B.states.size())
            break;
        if (!detail::same_time(B.states[j].t, sa.t))
            continue;
        const auto& x = sa.immersion;
        const auto& y = B.states[j].immersion;
        const double dist = std::max(detail::directed_image_distance(x, y), detail::directed_image_distance(y, x));
        const double diam = std::max(detail::diameter(x), detail::diameter(y));
        rep.times.push_back(sa.t);
        rep.distances.push_back(diam > 0.0 ? dist / diam : dist);
        rep.max_distance = std::max(rep.max_distance, rep.distances.back());
    }
    if (rep.times.empty())
        throw mismatched_times("trajectories have no common snapshot time");
    return rep;
}

} // namespace gaussflow
