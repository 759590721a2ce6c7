#include "gaussflow/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace gaussflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("gaussflow_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool contains(const std::vector<StopKind>& v, StopKind k)
{
    return std::find(v.begin(), v.end(), k) != v.end();
}

} // namespace

TEST(Config, ParsesAllSections)
{
    const auto cfg = parse_run_config_string(R"(
# comment line
shape = ellipse
semi_axes = 0.9, 0.6
vertices = 128
variant = FLOW
horizon = 0.5          # trailing comment
h2_max = 1e5
snapshot_stride = 4
)");
    EXPECT_EQ(cfg.shape, "ellipse");
    ASSERT_EQ(cfg.shape_params.semi_axes.size(), 2u);
    EXPECT_EQ(cfg.shape_params.semi_axes[1], 0.6);
    EXPECT_EQ(cfg.vertices, 128);
    EXPECT_EQ(*cfg.horizon, 0.5);
    EXPECT_EQ(cfg.thresholds.h2_max, 1e5);
    EXPECT_EQ(cfg.snapshot_stride, 4);
    EXPECT_EQ(initial_immersion(cfg).vertex_count(), 128);
}

TEST(Config, Errors)
{
    EXPECT_THROW(parse_run_config_string("shape = circle\nbogus = 1\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nshape = circle\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nradius = abc\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nhorizon = -1\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nsnapshot_stride = 0\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("radius = 1\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nmesh = /nonexistent.off\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("mesh = /nonexistent.off\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nvariant = FLOW\na = 2\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nseed = -3\n"), invalid_config);
    EXPECT_THROW(parse_run_config_string("shape = circle\nno equals sign\n"), invalid_config);
    EXPECT_THROW(load_run_config("/nonexistent/config.cfg"), invalid_config);
}

TEST(Config, RelativePathsAndScaling)
{
    const auto dir = fresh_dir("config");
    io::write_mesh(dir / "ico.off", shapes::icosphere(1.0, 2));
    std::ofstream(dir / "run.cfg") << "mesh = ico.off\nscale_min_norm2 = 5\noutput_dir = out\n";
    const auto cfg = load_run_config(dir / "run.cfg");
    EXPECT_EQ(cfg.mesh_path, dir / "ico.off");
    EXPECT_EQ(cfg.output_dir, dir / "out");
    const auto s = initial_immersion(cfg);
    EXPECT_NEAR(squared_norms(s).minCoeff(), 5.0, 1e-12);
}

TEST(Config, AutoHorizon)
{
    const auto cfg = parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 64\n");
    const auto s = initial_immersion(cfg);
    const auto T = applicable_bound(s, cfg.params);
    ASSERT_TRUE(T.has_value());
    EXPECT_NEAR(*T, 0.6565382999402104, 1e-12);
    EXPECT_NEAR(resolve_horizon(cfg, s, 1.0), 1.1 * *T, 1e-15);
    const auto at = parse_run_config_string("shape = circle\nradius = 1\nvertices = 64\n");
    EXPECT_FALSE(applicable_bound(initial_immersion(at), at.params).has_value());
    EXPECT_EQ(resolve_horizon(at, initial_immersion(at), 0.25), 0.25);
}

TEST(Shapes, BuiltinExamples)
{
    ShapeParams sp;
    sp.radius = 0.8;
    const auto c = builtin_shape("circle", sp, 512);
    EXPECT_NEAR(squared_norms(c).maxCoeff(), 0.64, 1e-15);
    EXPECT_NEAR(squared_norms(c).minCoeff(), 0.64, 1e-15);
    sp.radius = 2.0;
    sp.subdivisions = 3;
    const auto ico = builtin_shape("icosphere", sp, 0);
    EXPECT_EQ(ico.vertex_count(), 642);
    EXPECT_NEAR(squared_norms(ico).maxCoeff(), 4.0, 1e-12);
    EXPECT_NEAR(squared_norms(ico).minCoeff(), 4.0, 1e-12);
    sp.radius = 0.8;
    sp.amplitude = 0.05;
    sp.mode = 3;
    sp.seed = 7;
    const auto p1 = builtin_shape("perturbed_circle", sp, 256);
    const auto p2 = builtin_shape("perturbed_circle", sp, 256);
    EXPECT_LE(squared_norms(p1).maxCoeff(), 0.85 * 0.85);
    EXPECT_TRUE((p1.vertices().array() == p2.vertices().array()).all());
}

TEST(Scenario, ShrinkInside)
{
    auto cfg = parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 256\n");
    const auto v = run_scenario(Scenario::SHRINK_INSIDE, cfg);
    ASSERT_TRUE(v.bound_time.has_value());
    EXPECT_NEAR(*v.bound_time, 0.6565382999402104, 1e-12);
    EXPECT_TRUE(contains({StopKind::CURVATURE_BLOWUP, StopKind::POSITION_COLLAPSE}, v.observed_kind));
    EXPECT_LE(v.t_stop, *v.bound_time * 1.02);
    EXPECT_TRUE(v.bound_satisfied);
    EXPECT_TRUE(v.passed);
    EXPECT_EQ(v.bound_tolerance, 0.02);
}

TEST(Scenario, ExpandOutside)
{
    auto cfg = parse_run_config_string("shape = icosphere\nradius = 2\nsubdivisions = 3\n");
    const auto v = run_scenario(Scenario::EXPAND_OUTSIDE, cfg);
    ASSERT_TRUE(v.bound_time.has_value());
    EXPECT_NEAR(*v.bound_time, 0.067667641618306346, 1e-12);
    EXPECT_EQ(v.observed_kind, StopKind::POSITION_BLOWUP);
    EXPECT_TRUE(v.passed);
}

TEST(Scenario, Stationary)
{
    for (const char* text : {"shape = circle\nradius = 1\nvertices = 256\n",
                             "shape = icosphere\nradius = 1.4142135623730951\nsubdivisions = 3\n"}) {
        const auto v = run_scenario(Scenario::STATIONARY, parse_run_config_string(text));
        EXPECT_EQ(v.observed_kind, StopKind::HORIZON_REACHED);
        EXPECT_LT(v.metric, 1e-2);
        EXPECT_TRUE(v.passed) << text;
    }
}

TEST(Scenario, SphereOdeMatch)
{
    const auto v = run_scenario(Scenario::SPHERE_ODE_MATCH,
                                parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 128\n"));
    EXPECT_LT(v.metric, 1e-3);
    EXPECT_TRUE(v.passed);
}

TEST(Scenario, PreconditionsEnforced)
{
    const auto inside = parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 64\n");
    const auto outside = parse_run_config_string("shape = circle\nradius = 1.5\nvertices = 64\n");
    EXPECT_THROW(run_scenario(Scenario::EXPAND_OUTSIDE, inside), invalid_config);
    EXPECT_THROW(run_scenario(Scenario::SHRINK_INSIDE, outside), invalid_config);
    EXPECT_THROW(run_scenario(Scenario::STATIONARY, inside), invalid_config);
    EXPECT_THROW(run_scenario(Scenario::SPHERE_ODE_MATCH,
                              parse_run_config_string("shape = ellipse\nsemi_axes = 0.9, 0.6\nvertices = 64\n")),
                 invalid_config);
    EXPECT_THROW(parse_scenario("GROW"), invalid_config);
}

TEST(Scenario, FailedVerdictIsReturned)
{
    // a horizon far short of the bound ends at HORIZON_REACHED: a failed verdict, not an exception
    auto cfg = parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 64\nhorizon = 0.01\n");
    const auto v = run_scenario(Scenario::SHRINK_INSIDE, cfg);
    EXPECT_EQ(v.observed_kind, StopKind::HORIZON_REACHED);
    EXPECT_FALSE(v.kind_matches);
    EXPECT_FALSE(v.passed);
}

TEST(Scenario, VerdictReproducibleFromArtifacts)
{
    const auto dir = fresh_dir("artifacts");
    auto cfg = parse_run_config_string("shape = ellipse\nsemi_axes = 0.9, 0.6\nvertices = 128\nsnapshot_stride = 50\n");
    cfg.output_dir = dir / "run";
    const auto v = run_scenario(Scenario::SHRINK_INSIDE, cfg);
    EXPECT_TRUE(v.passed);
    for (const auto& a : v.artifacts)
        EXPECT_TRUE(fs::exists(a)) << a;
    const auto again = scenario_verdict(Scenario::SHRINK_INSIDE, io::read_trajectory(dir / "run"));
    EXPECT_EQ(again.t_stop, v.t_stop);
    EXPECT_EQ(again.observed_kind, v.observed_kind);
    EXPECT_EQ(again.passed, v.passed);
    EXPECT_EQ(*again.bound_time, *v.bound_time);
}

TEST(Determinism, RerunsAreByteIdentical)
{
    const auto dir = fresh_dir("determinism");
    auto cfg = parse_run_config_string(
        "shape = perturbed_circle\nradius = 0.8\namplitude = 0.05\nmode = 3\nseed = 7\nvertices = 128\nhorizon = 0.1\n");
    cfg.output_dir = dir / "a";
    io::write_trajectory(cfg.output_dir, simulate(cfg));
    cfg.output_dir = dir / "b";
    io::write_trajectory(cfg.output_dir, simulate(cfg));
    EXPECT_EQ(slurp(dir / "a" / "timeseries.csv"), slurp(dir / "b" / "timeseries.csv"));
    EXPECT_EQ(slurp(dir / "a" / "events.jsonl"), slurp(dir / "b" / "events.jsonl"));
}

TEST(Render, CurveSvgPerSnapshot)
{
    RunOptions opt;
    opt.sample_interval = 0.1;
    const auto traj = run(shapes::circle(0.8, 64), FlowParams{}, 0.2, {}, opt);
    ASSERT_EQ(traj.states.size(), 3u);
    const auto dir = fresh_dir("render_curve");
    const auto files = render(traj, dir / "a");
    ASSERT_EQ(files.size(), 3u);
    const auto again = render(traj, dir / "b");
    for (std::size_t k = 0; k < files.size(); ++k) {
        EXPECT_EQ(files[k].extension(), ".svg");
        EXPECT_EQ(slurp(files[k]), slurp(again[k]));
        EXPECT_NE(slurp(files[k]).find("<polygon"), std::string::npos);
    }
    // radii shrink: the polygon's first x coordinate moves toward the centre
    auto first_x = [&](const fs::path& p) {
        const std::string s = slurp(p);
        const auto pos = s.find("points=\"") + 8;
        return std::stod(s.substr(pos, s.find(',', pos) - pos));
    };
    EXPECT_GT(first_x(files[0]), first_x(files[1]));
    EXPECT_GT(first_x(files[1]), first_x(files[2]));
}

TEST(Render, SurfaceOffSequence)
{
    RunOptions opt;
    opt.snapshot_stride = 25;
    const auto traj = run(shapes::icosphere(2.0, 2), FlowParams{}, 0.1, {}, opt);
    const auto dir = fresh_dir("render_surface");
    const auto files = render(traj, dir);
    ASSERT_EQ(files.size(), traj.states.size() + 1);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto back = io::read_mesh(files[k]);
        EXPECT_TRUE((back.vertices().array() == traj.states[k].immersion.vertices().array()).all());
    }
    EXPECT_EQ(files.back().filename(), "diagnostics.csv");
}

TEST(Render, EmptyTrajectory)
{
    EXPECT_THROW(render(FlowTrajectory{}, fresh_dir("render_empty")), io_error);
}

TEST(Parallel, OrderAndErrors)
{
    std::vector<std::function<int()>> jobs;
    for (int i = 0; i < 20; ++i)
        jobs.push_back([i] { return i * i; });
    const auto out = parallel_map(jobs, 4);
    for (int i = 0; i < 20; ++i)
        EXPECT_EQ(out[i], i * i);
    jobs.push_back([]() -> int { throw invalid_config("boom"); });
    EXPECT_THROW(parallel_map(jobs, 3), invalid_config);
}

TEST(Parallel, ThreadCapFromEnvironment)
{
    setenv("GAUSSFLOW_THREADS", "3", 1);
    EXPECT_EQ(thread_cap(), 3u);
    setenv("GAUSSFLOW_THREADS", "zero", 1);
    EXPECT_THROW(thread_cap(), invalid_config);
    unsetenv("GAUSSFLOW_THREADS");
    EXPECT_GE(thread_cap(), 1u);
}

TEST(Parallel, ScenariosMatchSequential)
{
    const auto a = parse_run_config_string("shape = circle\nradius = 0.8\nvertices = 64\n");
    const auto b = parse_run_config_string("shape = circle\nradius = 1.5\nvertices = 64\n");
    const auto par = run_scenarios({{Scenario::SHRINK_INSIDE, a}, {Scenario::EXPAND_OUTSIDE, b}}, 2);
    EXPECT_EQ(par[0].t_stop, run_scenario(Scenario::SHRINK_INSIDE, a).t_stop);
    EXPECT_EQ(par[1].t_stop, run_scenario(Scenario::EXPAND_OUTSIDE, b).t_stop);
}
