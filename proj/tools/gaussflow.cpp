#include "gaussflow/gaussflow.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

using namespace gaussflow;
namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const nlohmann::json& j)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << '\n';
    if (!out)
        throw io_error("cannot write " + path.string());
}

RadialParams radial_params(int m, double a, double b, double c, double c_slope, double r0sq)
{
    RadialParams p;
    p.m = m;
    p.a = a;
    p.b = b;
    p.c0 = c;
    p.c_slope = c_slope;
    p.R0_sq = r0sq;
    p.validate();
    return p;
}

std::string verdict_line(const ScenarioVerdict& v)
{
    std::string line = v.scenario + (v.passed ? " PASSED" : " FAILED") + " kind=" + to_string(v.observed_kind) +
                       " t_stop=" + format_double(v.t_stop);
    if (v.bound_time)
        line += " bound=" + format_double(*v.bound_time) + " (+" + format_double(100.0 * v.bound_tolerance) + "%)";
    if (!v.metric_name.empty())
        line += " " + v.metric_name + "=" + format_double(v.metric) + " limit=" + format_double(v.metric_limit);
    return line;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete mean curvature flow in Gaussian space"};
    app.require_subcommand(1);

    // ambient
    auto* ambient = app.add_subcommand("ambient", "Sectional curvature of a coordinate 2-plane");
    int amb_m = 2;
    std::vector<double> amb_point;
    std::vector<int> amb_axes;
    ambient->add_option("--m", amb_m, "Intrinsic dimension m")->required();
    ambient->add_option("--point", amb_point, "Point coordinates x1,...,xn")->required()->delimiter(',');
    ambient->add_option("--axes", amb_axes, "Section axes A,B (0-based)")->required()->delimiter(',')->expected(2);

    // sphere
    auto* sphere = app.add_subcommand("sphere", "Integrate the radial equation of an origin-centred sphere");
    int sp_m = 2;
    double sp_a = 1.0, sp_b = 1.0, sp_c = 1.0, sp_slope = 0.0, sp_r0sq = 0.0;
    std::optional<double> sp_horizon;
    std::string sp_csv = "sphere.csv";
    sphere->add_option("--m", sp_m)->required();
    sphere->add_option("--a", sp_a);
    sphere->add_option("--b", sp_b);
    sphere->add_option("--c", sp_c);
    sphere->add_option("--c-slope", sp_slope);
    sphere->add_option("--r0sq", sp_r0sq, "Initial squared radius")->required();
    sphere->add_option("--horizon", sp_horizon, "Stop time (default: until the event)");
    sphere->add_option("--csv", sp_csv, "Output file for the t,R_sq stream");

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Closed-form blow-up time bound");
    int bd_m = 2;
    double bd_a = 1.0, bd_b = 1.0, bd_c = 1.0, bd_r0sq = 0.0;
    bounds->add_option("--m", bd_m)->required();
    bounds->add_option("--r0sq", bd_r0sq)->required();
    bounds->add_option("--a", bd_a);
    bounds->add_option("--b", bd_b);
    bounds->add_option("--c", bd_c);

    // simulate
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a flow from a config file");
    std::string sim_config, sim_out;
    simulate_cmd->add_option("--config", sim_config)->required()->check(CLI::ExistingFile);
    simulate_cmd->add_option("--output", sim_out, "Output directory (overrides output_dir)");

    // verify
    auto* verify = app.add_subcommand("verify", "Check a comparison claim on a recorded trajectory");
    std::string vf_dir, vf_claim, vf_report;
    std::optional<double> vf_eps, vf_rp0sq;
    verify->add_option("--trajectory", vf_dir)->required()->check(CLI::ExistingDirectory);
    verify->add_option("--claim", vf_claim)->required();
    verify->add_option("--eps", vf_eps);
    verify->add_option("--rp0sq", vf_rp0sq);
    verify->add_option("--report", vf_report, "Report path (default DIR/report_<claim>.json)");

    // scenario
    auto* scenario = app.add_subcommand("scenario", "Run a named scenario and print its verdict");
    std::string sc_name, sc_config, sc_out;
    scenario->add_option("name", sc_name, "SHRINK_INSIDE | EXPAND_OUTSIDE | STATIONARY | SPHERE_ODE_MATCH")->required();
    scenario->add_option("--config", sc_config)->required()->check(CLI::ExistingFile);
    scenario->add_option("--output", sc_out, "Output directory (overrides output_dir)");

    // suite
    auto* suite = app.add_subcommand("suite", "Run several scenario configs concurrently");
    std::vector<std::string> su_configs;
    suite->add_option("configs", su_configs, "Config files, each with a 'scenario' key")
        ->required()
        ->check(CLI::ExistingFile);

    // render
    auto* render_cmd = app.add_subcommand("render", "Render a recorded trajectory");
    std::string rd_dir, rd_out;
    render_cmd->add_option("--trajectory", rd_dir)->required()->check(CLI::ExistingDirectory);
    render_cmd->add_option("--output", rd_out, "Output directory (default DIR/render)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ambient) {
            AmbientVector x = Eigen::Map<const AmbientVector>(amb_point.data(), static_cast<Eigen::Index>(amb_point.size()));
            const GaussianAmbient g(static_cast<int>(x.size()), amb_m);
            std::cout << format_double(sectional_curvature(g, x, amb_axes[0], amb_axes[1])) << '\n';
        } else if (*sphere) {
            const auto p = radial_params(sp_m, sp_a, sp_b, sp_c, sp_slope, sp_r0sq);
            const auto traj = integrate_radial(p, sp_horizon.value_or(std::numeric_limits<double>::infinity()));
            std::cout << "event " << to_string(traj.event) << '\n';
            std::cout << "t_event " << format_double(traj.event_time) << '\n';
            std::cout << "bound "
                      << (std::isfinite(traj.bound_time) ? format_double(traj.bound_time) : std::string("none")) << '\n';
            std::ofstream csv(sp_csv, std::ios::binary);
            csv << "t,R_sq\n";
            for (const auto& s : traj.samples)
                csv << format_double(s.t) << ',' << format_double(s.R_sq) << '\n';
            if (!csv)
                throw io_error("cannot write " + sp_csv);
        } else if (*bounds) {
            const auto p = radial_params(bd_m, bd_a, bd_b, bd_c, 0.0, bd_r0sq);
            if (bd_r0sq < p.critical_sq())
                std::cout << "T1 " << format_double(bound_time_shrink(p)) << '\n';
            else if (bd_r0sq > p.critical_sq())
                std::cout << "T2 " << format_double(bound_time_expand(p)) << '\n';
            else
                throw domain_error("R0^2 equals the critical value c m / b; the sphere is stationary");
        } else if (*simulate_cmd) {
            auto cfg = load_run_config(sim_config);
            if (!sim_out.empty())
                cfg.output_dir = sim_out;
            if (cfg.output_dir.empty())
                throw invalid_config("no output directory: set output_dir or pass --output");
            const auto traj = simulate(cfg);
            io::write_trajectory(cfg.output_dir, traj);
            std::cout << to_string(traj.stop.kind) << " t_stop=" << format_double(traj.stop.t_stop)
                      << " steps=" << traj.steps << " snapshots=" << traj.states.size() << '\n';
        } else if (*verify) {
            const auto traj = io::read_trajectory(vf_dir);
            const Claim claim = parse_claim(vf_claim);
            auto need = [](const std::optional<double>& v, const char* name) {
                if (!v)
                    throw invalid_config(std::string("claim needs --") + name);
                return *v;
            };
            BarrierReport r;
            switch (claim) {
            case Claim::SIGN_PRESERVATION_BELOW: r = check_sign_below(traj, traj.params, need(vf_eps, "eps")); break;
            case Claim::SIGN_PRESERVATION_ABOVE: r = check_sign_above(traj, traj.params, need(vf_eps, "eps")); break;
            case Claim::SPHERE_BARRIER_BELOW:
            case Claim::SPHERE_BARRIER_ABOVE:
                r = check_sphere_barrier(traj, need(vf_rp0sq, "rp0sq"), need(vf_eps, "eps"));
                if (r.claim != claim)
                    throw hypothesis_violated(std::string("initial data is on the other side: the applicable claim is ") +
                                              to_string(r.claim));
                break;
            case Claim::SPHERICITY: r = check_sphericity(traj); break;
            }
            const fs::path report = vf_report.empty() ? fs::path(vf_dir) / ("report_" + vf_claim + ".json") : fs::path(vf_report);
            write_json(report, to_json(r));
            std::cout << to_string(r.claim) << (r.holds ? " HOLDS" : " FAILS") << " worst_margin="
                      << format_double(r.worst_margin) << " at t=" << format_double(r.worst_time)
                      << " tolerance=" << format_double(r.tolerance) << '\n';
        } else if (*scenario) {
            auto cfg = load_run_config(sc_config);
            if (!sc_out.empty())
                cfg.output_dir = sc_out;
            const auto v = run_scenario(parse_scenario(sc_name), cfg);
            std::cout << verdict_line(v) << '\n';
        } else if (*suite) {
            std::vector<std::pair<Scenario, RunConfig>> jobs;
            for (const auto& path : su_configs) {
                auto cfg = load_run_config(path);
                if (cfg.scenario.empty())
                    throw invalid_config(path + ": missing 'scenario' key");
                jobs.emplace_back(parse_scenario(cfg.scenario), std::move(cfg));
            }
            const auto verdicts = run_scenarios(jobs);
            for (std::size_t k = 0; k < verdicts.size(); ++k)
                std::cout << su_configs[k] << ": " << verdict_line(verdicts[k]) << '\n';
        } else if (*render_cmd) {
            const auto traj = io::read_trajectory(rd_dir);
            const fs::path out = rd_out.empty() ? fs::path(rd_dir) / "render" : fs::path(rd_out);
            const auto files = render(traj, out);
            std::cout << files.size() << " files written to " << out.string() << '\n';
        }
    } catch (const gaussflow::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
