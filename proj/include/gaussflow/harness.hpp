#pragma once

#include "gaussflow/comparison.hpp"
#include "gaussflow/engine.hpp"
#include "gaussflow/mesh_io.hpp"
#include "gaussflow/radial.hpp"
#include "gaussflow/shapes.hpp"
#include "gaussflow/trajectory_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace gaussflow {

// ---------------------------------------------------------------------------
// Configuration

/// A run description read from a flat `key = value` file.
struct RunConfig {
    std::string shape;                     ///< builtin shape name, or empty when mesh_path is set
    std::filesystem::path mesh_path;       ///< OFF / OBJ / PLINE file
    ShapeParams shape_params;
    int vertices = 256;                    ///< curves only
    std::optional<double> scale_min_norm2; ///< rescale so that min|F|^2 equals this
    std::optional<double> scale_max_norm2; ///< rescale so that max|F|^2 equals this
    FlowParams params;
    std::optional<double> horizon;         ///< empty means automatic
    FlowThresholds thresholds;
    std::filesystem::path output_dir;
    int snapshot_stride = 1;
    double sample_interval = 0.0;
    std::string scenario;                  ///< optional default scenario name

    void validate() const
    {
        if (shape.empty() == mesh_path.empty())
            throw invalid_config("exactly one of 'shape' and 'mesh' must be given");
        if (!mesh_path.empty() && !std::filesystem::exists(mesh_path))
            throw invalid_config("mesh file " + mesh_path.string() + " does not exist");
        if (horizon && !(*horizon > 0.0))
            throw invalid_config("horizon must be positive");
        if (snapshot_stride < 1)
            throw invalid_config("snapshot_stride must be >= 1");
        if (!(sample_interval >= 0.0))
            throw invalid_config("sample_interval must be nonnegative");
        if (scale_min_norm2 && scale_max_norm2)
            throw invalid_config("give at most one of scale_min_norm2 and scale_max_norm2");
        params.validate(horizon.value_or(0.0));
        thresholds.validate();
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline int parse_int(const std::string& v, const std::string& key)
{
    int out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw invalid_config("key '" + key + "': not an integer: '" + v + "'");
    return out;
}

inline double parse_real(const std::string& v, const std::string& key)
{
    try {
        const double x = parse_double(v);
        if (!std::isfinite(x))
            throw invalid_config("");
        return x;
    } catch (const invalid_config&) {
        throw invalid_config("key '" + key + "': not a finite number: '" + v + "'");
    }
}

inline std::vector<double> parse_list(const std::string& v, const std::string& key)
{
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(parse_real(trim(item), key));
    return out;
}

} // namespace detail

/// Parse `key = value` lines; '#' starts a comment. Relative mesh and output
/// paths are resolved against `base_dir`.
inline RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir = {})
{
    using detail::parse_int;
    using detail::parse_real;
    RunConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw invalid_config("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw invalid_config("line " + std::to_string(lineno) + ": empty key or value");
        if (!seen.insert(key).second)
            throw invalid_config("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");

        auto& sp = cfg.shape_params;
        auto& p = cfg.params;
        auto& th = cfg.thresholds;
        if (key == "shape") cfg.shape = val;
        else if (key == "mesh") cfg.mesh_path = base_dir.empty() ? std::filesystem::path(val) : base_dir / val;
        else if (key == "radius") sp.radius = parse_real(val, key);
        else if (key == "semi_axes") sp.semi_axes = detail::parse_list(val, key);
        else if (key == "amplitude") sp.amplitude = parse_real(val, key);
        else if (key == "mode") sp.mode = parse_int(val, key);
        else if (key == "seed") {
            std::uint64_t s = 0;
            auto res = std::from_chars(val.data(), val.data() + val.size(), s);
            if (res.ec != std::errc() || res.ptr != val.data() + val.size())
                throw invalid_config("seed must be a nonnegative integer");
            sp.seed = s;
        }
        else if (key == "ambient_dim") sp.ambient_dim = parse_int(val, key);
        else if (key == "subdivisions") sp.subdivisions = parse_int(val, key);
        else if (key == "vertices") cfg.vertices = parse_int(val, key);
        else if (key == "scale_min_norm2") cfg.scale_min_norm2 = parse_real(val, key);
        else if (key == "scale_max_norm2") cfg.scale_max_norm2 = parse_real(val, key);
        else if (key == "variant") p.variant = parse_variant(val);
        else if (key == "a") p.a = parse_real(val, key);
        else if (key == "b") p.b = parse_real(val, key);
        else if (key == "c") p.c = parse_real(val, key);
        else if (key == "c_slope") p.c_slope = parse_real(val, key);
        else if (key == "m_override") p.m_override = parse_int(val, key);
        else if (key == "surface_curvature") p.surface_curvature = parse_surface_curvature(val);
        else if (key == "cfl") p.cfl = parse_real(val, key);
        else if (key == "dt_min") p.dt_min = parse_real(val, key);
        else if (key == "dt_max") p.dt_max = parse_real(val, key);
        else if (key == "max_relative_growth") p.max_relative_growth = parse_real(val, key);
        else if (key == "horizon") {
            if (val == "auto") cfg.horizon.reset();
            else cfg.horizon = parse_real(val, key);
        }
        else if (key == "h2_max") th.h2_max = parse_real(val, key);
        else if (key == "F2_max") th.F2_max = parse_real(val, key);
        else if (key == "F2_min") th.F2_min = parse_real(val, key);
        else if (key == "quality_min") th.quality_min = parse_real(val, key);
        else if (key == "output_dir") cfg.output_dir = base_dir.empty() ? std::filesystem::path(val) : base_dir / val;
        else if (key == "snapshot_stride") cfg.snapshot_stride = parse_int(val, key);
        else if (key == "sample_interval") cfg.sample_interval = parse_real(val, key);
        else if (key == "scenario") cfg.scenario = val;
        else throw invalid_config("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw invalid_config("cannot open config " + path.string());
    return parse_run_config(in, path.parent_path());
}

inline RunConfig parse_run_config_string(const std::string& text, const std::filesystem::path& base_dir = {})
{
    std::istringstream in(text);
    return parse_run_config(in, base_dir);
}

/// The initial immersion described by a config.
inline DiscreteImmersion initial_immersion(const RunConfig& cfg)
{
    DiscreteImmersion s = cfg.mesh_path.empty() ? builtin_shape(cfg.shape, cfg.shape_params, cfg.vertices)
                                                : io::read_mesh(cfg.mesh_path);
    if (cfg.scale_min_norm2)
        s = scale_to_norm2(s, *cfg.scale_min_norm2, false);
    if (cfg.scale_max_norm2)
        s = scale_to_norm2(s, *cfg.scale_max_norm2, true);
    return s;
}

/// Blow-up time bound for the initial data under the config's constants:
/// T1 at max|F0|^2 inside the critical sphere, T2 at min|F0|^2 outside it.
inline std::optional<double> applicable_bound(const DiscreteImmersion& s, const FlowParams& p)
{
    if (p.out_of_paper())
        return std::nullopt;
    RadialParams rp;
    rp.m = p.effective_m(s);
    rp.a = p.variant == FlowVariant::FLOWP ? p.a : 1.0;
    rp.b = p.variant == FlowVariant::FLOWP ? p.b : 1.0;
    rp.c0 = p.variant == FlowVariant::FLOWP ? p.c : 1.0;
    const ScalarField F2 = squared_norms(s);
    if (F2.maxCoeff() < rp.critical_sq() && p.c_slope >= 0.0) {
        rp.R0_sq = F2.maxCoeff();
        return bound_time_shrink(rp);
    }
    if (F2.minCoeff() > rp.critical_sq() && p.c_slope <= 0.0) {
        rp.R0_sq = F2.minCoeff();
        return bound_time_expand(rp);
    }
    return std::nullopt;
}

inline double resolve_horizon(const RunConfig& cfg, const DiscreteImmersion& s, double fallback)
{
    if (cfg.horizon)
        return *cfg.horizon;
    if (auto T = applicable_bound(s, cfg.params))
        return 1.1 * *T;
    return fallback;
}

inline FlowTrajectory simulate(const RunConfig& cfg, double fallback_horizon = 1.0)
{
    cfg.validate();
    const auto s = initial_immersion(cfg);
    RunOptions opt;
    opt.snapshot_stride = cfg.snapshot_stride;
    opt.sample_interval = cfg.sample_interval;
    return run(s, cfg.params, resolve_horizon(cfg, s, fallback_horizon), cfg.thresholds, opt);
}

// ---------------------------------------------------------------------------
// Scenarios

enum class Scenario { SHRINK_INSIDE, EXPAND_OUTSIDE, STATIONARY, SPHERE_ODE_MATCH };

inline const char* to_string(Scenario s)
{
    switch (s) {
    case Scenario::SHRINK_INSIDE: return "SHRINK_INSIDE";
    case Scenario::EXPAND_OUTSIDE: return "EXPAND_OUTSIDE";
    case Scenario::STATIONARY: return "STATIONARY";
    case Scenario::SPHERE_ODE_MATCH: return "SPHERE_ODE_MATCH";
    }
    return "?";
}

inline Scenario parse_scenario(const std::string& s)
{
    for (auto x : {Scenario::SHRINK_INSIDE, Scenario::EXPAND_OUTSIDE, Scenario::STATIONARY, Scenario::SPHERE_ODE_MATCH})
        if (s == to_string(x))
            return x;
    throw invalid_config("unknown scenario '" + s + "'");
}

inline constexpr double kBoundTolerance = 0.02;
inline constexpr double kStationaryDriftLimit = 1e-2;
inline constexpr double kStationaryHorizon = 0.05;
inline constexpr double kOdeMatchLimit = 1e-3;

struct ScenarioVerdict {
    std::string scenario;
    std::vector<StopKind> expected_kinds;
    std::optional<double> bound_time;
    double bound_tolerance = kBoundTolerance;
    StopKind observed_kind = StopKind::HORIZON_REACHED;
    double t_stop = 0.0;
    bool bound_satisfied = false;  ///< t_stop <= bound (1 + tolerance), or the scenario metric within its limit
    bool kind_matches = false;
    bool passed = false;
    std::string metric_name;       ///< drift or ODE mismatch for the non-bound scenarios
    double metric = 0.0;
    double metric_limit = 0.0;
    std::vector<std::string> artifacts;
    std::string detail;
};

inline nlohmann::json to_json(const ScenarioVerdict& v)
{
    nlohmann::json j;
    j["scenario"] = v.scenario;
    nlohmann::json kinds = nlohmann::json::array();
    for (auto k : v.expected_kinds)
        kinds.push_back(to_string(k));
    j["expected_kinds"] = kinds;
    j["bound_time"] = v.bound_time ? nlohmann::json(*v.bound_time) : nlohmann::json(nullptr);
    j["bound_tolerance"] = v.bound_tolerance;
    j["observed_kind"] = to_string(v.observed_kind);
    j["t_stop"] = v.t_stop;
    j["bound_satisfied"] = v.bound_satisfied;
    j["kind_matches"] = v.kind_matches;
    j["passed"] = v.passed;
    if (!v.metric_name.empty()) {
        j["metric"] = {{"name", v.metric_name}, {"value", v.metric}, {"limit", v.metric_limit}};
    }
    j["artifacts"] = v.artifacts;
    j["detail"] = v.detail;
    return j;
}

namespace detail {

inline RadialParams radial_params_for(const FlowParams& p, int m, double r0sq)
{
    RadialParams rp;
    rp.m = m;
    rp.R0_sq = r0sq;
    if (p.variant == FlowVariant::FLOWP) {
        rp.a = p.a;
        rp.b = p.b;
        rp.c0 = p.c;
        rp.c_slope = p.c_slope;
    }
    return rp;
}

inline bool is_spherical(const Diagnostics& d, double tol = 1e-8)
{
    return relative_spread(d) < tol;
}

} // namespace detail

/// Check that the initial data satisfies a scenario's sign condition.
inline void check_scenario_preconditions(Scenario sc, const DiscreteImmersion& s, const FlowParams& p)
{
    const int m = p.effective_m(s);
    const ScalarField F2 = squared_norms(s);
    switch (sc) {
    case Scenario::SHRINK_INSIDE:
        if (p.variant != FlowVariant::FLOW)
            throw invalid_config("SHRINK_INSIDE runs the FLOW variant");
        if (!(F2.maxCoeff() < m))
            throw invalid_config("SHRINK_INSIDE needs max|F0|^2 < m");
        break;
    case Scenario::EXPAND_OUTSIDE:
        if (p.variant != FlowVariant::FLOW)
            throw invalid_config("EXPAND_OUTSIDE runs the FLOW variant");
        if (!(F2.minCoeff() > m))
            throw invalid_config("EXPAND_OUTSIDE needs min|F0|^2 > m");
        break;
    case Scenario::STATIONARY:
        if (p.variant != FlowVariant::FLOW)
            throw invalid_config("STATIONARY runs the FLOW variant");
        if (!(std::abs(F2.maxCoeff() - m) <= 1e-8 * m) || !(std::abs(F2.minCoeff() - m) <= 1e-8 * m))
            throw invalid_config("STATIONARY needs the sphere |F0|^2 = m");
        break;
    case Scenario::SPHERE_ODE_MATCH:
        if (p.variant == FlowVariant::FLOW0)
            throw invalid_config("SPHERE_ODE_MATCH runs FLOW or FLOWP");
        if (!((F2.maxCoeff() - F2.minCoeff()) / std::max(1.0, F2.maxCoeff()) < 1e-8))
            throw invalid_config("SPHERE_ODE_MATCH needs a round sphere centred at the origin");
        break;
    }
}

/// Maximum relative error of max|F|^2 and min|F|^2 against the sphere ODE at
/// the snapshot times, while R^2 stays in [0.05, 20].
inline double sphere_ode_mismatch(const FlowTrajectory& traj, double lo = 0.05, double hi = 20.0)
{
    const auto& init = traj.initial();
    const int m = traj.params.effective_m(init.immersion);
    const auto rp = detail::radial_params_for(traj.params, m, init.diagnostics.max_F2);
    const auto sphere = integrate_radial(rp, traj.final().t);
    double worst = 0.0;
    for (const auto& s : traj.states) {
        if (s.t > sphere.t_end())
            break;
        const double R2 = sphere.R_sq_at(s.t);
        if (R2 < lo || R2 > hi)
            break;
        worst = std::max({worst, std::abs(s.diagnostics.max_F2 / R2 - 1.0), std::abs(s.diagnostics.min_F2 / R2 - 1.0)});
    }
    return worst;
}

/// Largest vertex displacement from the initial immersion, per unit time.
inline double drift_rate(const FlowTrajectory& traj)
{
    double worst = 0.0;
    const auto& F0 = traj.initial().immersion.vertices();
    for (const auto& s : traj.states)
        if (s.t > 0.0)
            worst = std::max(worst, (s.immersion.vertices() - F0).colwise().norm().maxCoeff() / s.t);
    return worst;
}

/// Verdict computed from a trajectory alone.
inline ScenarioVerdict scenario_verdict(Scenario sc, const FlowTrajectory& traj)
{
    ScenarioVerdict v;
    v.scenario = to_string(sc);
    v.observed_kind = traj.stop.kind;
    v.t_stop = traj.stop.t_stop;
    const auto& s0 = traj.initial().immersion;
    switch (sc) {
    case Scenario::SHRINK_INSIDE:
        v.expected_kinds = {StopKind::CURVATURE_BLOWUP, StopKind::POSITION_COLLAPSE};
        v.bound_time = applicable_bound(s0, traj.params);
        break;
    case Scenario::EXPAND_OUTSIDE:
        v.expected_kinds = {StopKind::POSITION_BLOWUP, StopKind::CURVATURE_BLOWUP};
        v.bound_time = applicable_bound(s0, traj.params);
        break;
    case Scenario::STATIONARY:
        v.expected_kinds = {StopKind::HORIZON_REACHED};
        v.metric_name = "drift_per_unit_time";
        v.metric = drift_rate(traj);
        v.metric_limit = kStationaryDriftLimit;
        break;
    case Scenario::SPHERE_ODE_MATCH:
        v.expected_kinds = {StopKind::CURVATURE_BLOWUP, StopKind::POSITION_COLLAPSE, StopKind::POSITION_BLOWUP,
                            StopKind::HORIZON_REACHED};
        v.metric_name = "max_relative_R2_error";
        v.metric = sphere_ode_mismatch(traj);
        v.metric_limit = kOdeMatchLimit;
        break;
    }
    v.kind_matches = std::find(v.expected_kinds.begin(), v.expected_kinds.end(), v.observed_kind) != v.expected_kinds.end();
    if (v.bound_time)
        v.bound_satisfied = v.t_stop <= *v.bound_time * (1.0 + v.bound_tolerance);
    else if (!v.metric_name.empty())
        v.bound_satisfied = v.metric < v.metric_limit;
    else
        v.bound_satisfied = false;
    v.passed = v.bound_satisfied && v.kind_matches;
    v.detail = traj.stop.detail;
    return v;
}

struct ScenarioResult {
    ScenarioVerdict verdict;
    FlowTrajectory trajectory;
};

/// Run a scenario. With an output directory the trajectory and verdict.json
/// are written there. A failed verdict is returned, not thrown.
inline ScenarioResult run_scenario_with_trajectory(Scenario sc, const RunConfig& cfg)
{
    cfg.validate();
    const auto s = initial_immersion(cfg);
    check_scenario_preconditions(sc, s, cfg.params);
    double horizon;
    if (cfg.horizon)
        horizon = *cfg.horizon;
    else if (sc == Scenario::STATIONARY)
        horizon = kStationaryHorizon;
    else if (auto T = applicable_bound(s, cfg.params))
        horizon = 1.1 * *T;
    else
        throw invalid_config("no automatic horizon for this initial data; set 'horizon'");
    RunOptions opt;
    opt.snapshot_stride = cfg.snapshot_stride;
    opt.sample_interval = cfg.sample_interval;
    ScenarioResult res{{}, run(s, cfg.params, horizon, cfg.thresholds, opt)};
    res.verdict = scenario_verdict(sc, res.trajectory);
    if (!cfg.output_dir.empty()) {
        io::write_trajectory(cfg.output_dir, res.trajectory);
        for (const char* f : {"trajectory.json", "timeseries.csv", "events.jsonl"})
            res.verdict.artifacts.push_back((cfg.output_dir / f).string());
        res.verdict.artifacts.push_back((cfg.output_dir / "verdict.json").string());
        std::ofstream out(cfg.output_dir / "verdict.json", std::ios::binary);
        out << to_json(res.verdict).dump(2) << '\n';
        if (!out)
            throw io_error("cannot write " + (cfg.output_dir / "verdict.json").string());
    }
    return res;
}

inline ScenarioVerdict run_scenario(Scenario sc, const RunConfig& cfg)
{
    return run_scenario_with_trajectory(sc, cfg).verdict;
}

// ---------------------------------------------------------------------------
// Parallel execution

/// Worker cap from GAUSSFLOW_THREADS (default: hardware concurrency, at least 1).
inline unsigned thread_cap()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GAUSSFLOW_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw invalid_config("GAUSSFLOW_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return hw;
}

/// Run independent jobs on at most `threads` workers; results keep job order.
template <class T>
std::vector<T> parallel_map(const std::vector<std::function<T()>>& jobs, unsigned threads)
{
    std::vector<std::optional<T>> slots(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                slots[i] = jobs[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    std::vector<T> out;
    out.reserve(jobs.size());
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

inline std::vector<ScenarioVerdict> run_scenarios(const std::vector<std::pair<Scenario, RunConfig>>& jobs,
                                                  unsigned threads = thread_cap())
{
    std::vector<std::function<ScenarioVerdict()>> fns;
    for (const auto& [sc, cfg] : jobs)
        fns.push_back([sc = sc, cfg = cfg]() { return run_scenario(sc, cfg); });
    return parallel_map(fns, threads);
}

// ---------------------------------------------------------------------------
// Rendering

struct RenderStyle {
    int width = 512;
    int height = 512;
    double margin = 0.05;           ///< fraction of the viewport left around the bounding box
    double stroke_width = 1.5;
    std::string curve_color = "#1f4e9c";
    std::string critical_color = "#b22222";
    std::string barrier_color = "#888888";
    std::string background = "#ffffff";
};

namespace detail {

inline std::string fixed(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace detail

/// Curves: one SVG per snapshot (first two coordinates) with the critical
/// circle of radius sqrt(m) and the sphere-ODE circle R(t) started at the
/// extremal |F0|^2. Surfaces: numbered OFF files plus diagnostics.csv.
inline std::vector<std::filesystem::path> render(const FlowTrajectory& traj, const std::filesystem::path& out_dir,
                                                 const RenderStyle& style = {})
{
    namespace fs = std::filesystem;
    if (traj.states.empty())
        throw io_error("cannot render an empty trajectory");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw io_error("cannot create " + out_dir.string() + ": " + ec.message());
    std::vector<fs::path> files;
    const auto& s0 = traj.initial().immersion;

    if (!s0.is_curve()) {
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%06zu.off", k);
            io::write_mesh(out_dir / name, traj.states[k].immersion);
            files.push_back(out_dir / name);
        }
        std::ofstream csv(out_dir / "diagnostics.csv", std::ios::binary);
        io::write_timeseries(csv, traj);
        if (!csv)
            throw io_error("cannot write " + (out_dir / "diagnostics.csv").string());
        files.push_back(out_dir / "diagnostics.csv");
        return files;
    }

    const int m = traj.params.effective_m(s0);
    const double crit = std::sqrt(static_cast<double>(m));
    // Reference sphere from the radial equation.
    std::optional<RadialTrajectory> sphere;
    const auto& d0 = traj.initial().diagnostics;
    const double r0sq = d0.max_F2 < m ? d0.max_F2 : d0.min_F2;
    if (!traj.params.out_of_paper())
        sphere = integrate_radial(detail::radial_params_for(traj.params, m, r0sq), traj.final().t);

    double lo_x = -crit, hi_x = crit, lo_y = -crit, hi_y = crit;
    for (const auto& st : traj.states)
        for (int i = 0; i < st.immersion.vertex_count(); ++i) {
            lo_x = std::min(lo_x, st.immersion.vertex(i)[0]);
            hi_x = std::max(hi_x, st.immersion.vertex(i)[0]);
            lo_y = std::min(lo_y, st.immersion.vertex(i)[1]);
            hi_y = std::max(hi_y, st.immersion.vertex(i)[1]);
        }
    const double span = std::max(hi_x - lo_x, hi_y - lo_y) * (1.0 + 2.0 * style.margin);
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    const double scale = std::min(style.width, style.height) / span;
    auto X = [&](double x) { return 0.5 * style.width + (x - cx) * scale; };
    auto Y = [&](double y) { return 0.5 * style.height - (y - cy) * scale; };

    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& st = traj.states[k];
        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\"" << style.height
            << "\" viewBox=\"0 0 " << style.width << ' ' << style.height << "\">\n";
        svg << "<rect width=\"100%\" height=\"100%\" fill=\"" << style.background << "\"/>\n";
        svg << "<circle cx=\"" << detail::fixed(X(0)) << "\" cy=\"" << detail::fixed(Y(0)) << "\" r=\""
            << detail::fixed(crit * scale) << "\" fill=\"none\" stroke=\"" << style.critical_color
            << "\" stroke-dasharray=\"4 3\" stroke-width=\"1\"/>\n";
        if (sphere && st.t <= sphere->t_end()) {
            const double R2 = sphere->R_sq_at(st.t);
            if (R2 > 0.0)
                svg << "<circle cx=\"" << detail::fixed(X(0)) << "\" cy=\"" << detail::fixed(Y(0)) << "\" r=\""
                    << detail::fixed(std::sqrt(R2) * scale) << "\" fill=\"none\" stroke=\"" << style.barrier_color
                    << "\" stroke-width=\"1\"/>\n";
        }
        svg << "<polygon fill=\"none\" stroke=\"" << style.curve_color << "\" stroke-width=\""
            << detail::fixed(style.stroke_width) << "\" points=\"";
        for (int i = 0; i < st.immersion.vertex_count(); ++i) {
            if (i)
                svg << ' ';
            svg << detail::fixed(X(st.immersion.vertex(i)[0])) << ',' << detail::fixed(Y(st.immersion.vertex(i)[1]));
        }
        svg << "\"/>\n";
        svg << "<text x=\"8\" y=\"18\" font-family=\"monospace\" font-size=\"12\">t = " << format_double(st.t)
            << "</text>\n</svg>\n";
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06zu.svg", k);
        std::ofstream out(out_dir / name, std::ios::binary);
        out << svg.str();
        if (!out)
            throw io_error("cannot write " + (out_dir / name).string());
        files.push_back(out_dir / name);
    }
    return files;
}

} // namespace gaussflow
