#pragma once

#include "gaussflow/engine.hpp"
#include "gaussflow/mesh_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace gaussflow::io {

inline constexpr const char* kTimeseriesHeader = "t,dt,min_F2,max_F2,max_h2,weighted_area,mesh_quality";

inline nlohmann::json to_json(const FlowParams& p)
{
    nlohmann::json j;
    j["a"] = p.a;
    j["b"] = p.b;
    j["c"] = p.c;
    j["variant"] = to_string(p.variant);
    j["m_override"] = p.m_override ? nlohmann::json(*p.m_override) : nlohmann::json(nullptr);
    j["c_slope"] = p.c_slope;
    j["surface_curvature"] = to_string(p.surface_curvature);
    j["cfl"] = p.cfl;
    j["dt_min"] = p.dt_min;
    j["dt_max"] = p.dt_max;
    j["max_relative_growth"] = p.max_relative_growth;
    return j;
}

inline FlowParams flow_params_from_json(const nlohmann::json& j)
{
    FlowParams p;
    p.a = j.at("a").get<double>();
    p.b = j.at("b").get<double>();
    p.c = j.at("c").get<double>();
    p.variant = parse_variant(j.at("variant").get<std::string>());
    if (!j.at("m_override").is_null())
        p.m_override = j.at("m_override").get<int>();
    p.c_slope = j.at("c_slope").get<double>();
    p.surface_curvature = parse_surface_curvature(j.at("surface_curvature").get<std::string>());
    p.cfl = j.at("cfl").get<double>();
    p.dt_min = j.at("dt_min").get<double>();
    p.dt_max = j.at("dt_max").get<double>();
    p.max_relative_growth = j.at("max_relative_growth").get<double>();
    return p;
}

inline nlohmann::json to_json(const FlowThresholds& t)
{
    return {{"h2_max", t.h2_max}, {"F2_max", t.F2_max}, {"F2_min", t.F2_min}, {"quality_min", t.quality_min}};
}

inline FlowThresholds thresholds_from_json(const nlohmann::json& j)
{
    FlowThresholds t;
    t.h2_max = j.at("h2_max").get<double>();
    t.F2_max = j.at("F2_max").get<double>();
    t.F2_min = j.at("F2_min").get<double>();
    t.quality_min = j.at("quality_min").get<double>();
    return t;
}

/// One CSV row per snapshot with the exact header kTimeseriesHeader.
inline void write_timeseries(std::ostream& out, const FlowTrajectory& traj)
{
    out << kTimeseriesHeader << '\n';
    for (const auto& s : traj.states) {
        const auto& d = s.diagnostics;
        out << format_double(s.t) << ',' << format_double(d.dt_used) << ',' << format_double(d.min_F2) << ','
            << format_double(d.max_F2) << ',' << format_double(d.max_h2) << ',' << format_double(d.weighted_area)
            << ',' << format_double(d.mesh_quality) << '\n';
    }
}

/// JSON Lines: {"event": ..., "t": ..., "detail": ...} per record.
inline void write_events(std::ostream& out, const FlowTrajectory& traj)
{
    for (const auto& e : traj.events) {
        nlohmann::json j{{"event", e.event}, {"t", e.t}};
        if (!e.detail.empty())
            j["detail"] = e.detail;
        if (e.event == "STOP")
            j["kind"] = to_string(traj.stop.kind);
        out << j.dump() << '\n';
    }
}

inline std::string snapshot_name(std::size_t k, const DiscreteImmersion& s)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "snap_%06zu", k);
    return std::string(buf) + snapshot_extension(s);
}

/// Write a trajectory directory: trajectory.json, timeseries.csv,
/// events.jsonl and snapshots/snap_NNNNNN.{pline,off}.
inline void write_trajectory(const std::filesystem::path& dir, const FlowTrajectory& traj)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "snapshots", ec);
    if (ec)
        throw io_error("cannot create " + (dir / "snapshots").string() + ": " + ec.message());
    for (const auto& entry : fs::directory_iterator(dir / "snapshots"))
        if (entry.path().filename().string().rfind("snap_", 0) == 0)
            fs::remove(entry.path());

    nlohmann::json manifest;
    manifest["format"] = "gaussflow-trajectory";
    manifest["version"] = 1;
    manifest["params"] = to_json(traj.params);
    manifest["thresholds"] = to_json(traj.thresholds);
    manifest["horizon"] = traj.horizon;
    manifest["steps"] = traj.steps;
    manifest["t_stop_error"] = traj.t_stop_error;
    manifest["stop"] = {{"kind", to_string(traj.stop.kind)}, {"t_stop", traj.stop.t_stop}, {"detail", traj.stop.detail}};
    nlohmann::json snaps = nlohmann::json::array();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        const std::string rel = "snapshots/" + snapshot_name(k, s.immersion);
        write_mesh(dir / rel, s.immersion);
        snaps.push_back({{"t", s.t}, {"dt", s.diagnostics.dt_used}, {"file", rel}});
    }
    manifest["snapshots"] = snaps;

    {
        auto out = detail::open_out(dir / "trajectory.json");
        out << manifest.dump(2) << '\n';
    }
    {
        auto out = detail::open_out(dir / "timeseries.csv");
        write_timeseries(out, traj);
    }
    {
        auto out = detail::open_out(dir / "events.jsonl");
        write_events(out, traj);
    }
}

/// Load a trajectory directory. Diagnostics are recomputed from the snapshots.
inline FlowTrajectory read_trajectory(const std::filesystem::path& dir)
{
    nlohmann::json manifest;
    try {
        auto in = detail::open_in(dir / "trajectory.json");
        manifest = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad trajectory manifest in " + dir.string() + ": " + e.what());
    }
    FlowTrajectory traj;
    try {
        if (manifest.at("format") != "gaussflow-trajectory")
            throw io_error(dir.string() + " is not a trajectory directory");
        traj.params = flow_params_from_json(manifest.at("params"));
        traj.thresholds = thresholds_from_json(manifest.at("thresholds"));
        traj.horizon = manifest.at("horizon").get<double>();
        traj.steps = manifest.at("steps").get<std::size_t>();
        traj.t_stop_error = manifest.at("t_stop_error").get<double>();
        const auto& stop = manifest.at("stop");
        traj.stop = {parse_stop_kind(stop.at("kind").get<std::string>()), stop.at("t_stop").get<double>(),
                     stop.at("detail").get<std::string>()};
        std::shared_ptr<const SurfaceTopology> topology;
        for (const auto& snap : manifest.at("snapshots")) {
            auto mesh = read_mesh(dir / snap.at("file").get<std::string>());
            // snapshots of one run share connectivity
            if (!mesh.is_curve() && topology && topology->faces == mesh.topology().faces)
                mesh = traj.states.front().immersion.with_vertices(mesh.vertices());
            else if (!mesh.is_curve())
                topology = mesh.topology_ptr();
            const double t = snap.at("t").get<double>();
            traj.states.push_back({t, mesh, diagnostics(mesh, traj.params, snap.at("dt").get<double>())});
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error("bad trajectory manifest in " + dir.string() + ": " + e.what());
    }
    if (traj.states.empty())
        throw io_error("trajectory " + dir.string() + " has no snapshots");

    if (std::filesystem::exists(dir / "events.jsonl")) {
        auto in = detail::open_in(dir / "events.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            try {
                const auto j = nlohmann::json::parse(line);
                traj.events.push_back({j.at("event").get<std::string>(), j.at("t").get<double>(),
                                       j.value("detail", std::string())});
            } catch (const nlohmann::json::exception& e) {
                throw io_error("bad event record in " + (dir / "events.jsonl").string() + ": " + e.what());
            }
        }
    }
    return traj;
}

} // namespace gaussflow::io
