#pragma once

#include "gaussflow/engine.hpp"
#include "gaussflow/radial.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace gaussflow {

enum class Claim {
    SIGN_PRESERVATION_BELOW,
    SIGN_PRESERVATION_ABOVE,
    SPHERE_BARRIER_BELOW,
    SPHERE_BARRIER_ABOVE,
    SPHERICITY
};

inline const char* to_string(Claim c)
{
    switch (c) {
    case Claim::SIGN_PRESERVATION_BELOW: return "SIGN_PRESERVATION_BELOW";
    case Claim::SIGN_PRESERVATION_ABOVE: return "SIGN_PRESERVATION_ABOVE";
    case Claim::SPHERE_BARRIER_BELOW: return "SPHERE_BARRIER_BELOW";
    case Claim::SPHERE_BARRIER_ABOVE: return "SPHERE_BARRIER_ABOVE";
    case Claim::SPHERICITY: return "SPHERICITY";
    }
    return "?";
}

inline Claim parse_claim(const std::string& s)
{
    for (auto c : {Claim::SIGN_PRESERVATION_BELOW, Claim::SIGN_PRESERVATION_ABOVE, Claim::SPHERE_BARRIER_BELOW,
                   Claim::SPHERE_BARRIER_ABOVE, Claim::SPHERICITY})
        if (s == to_string(c))
            return c;
    throw invalid_config("unknown claim '" + s + "'");
}

/// Outcome of a post-hoc check. holds <=> worst_margin >= -tolerance.
struct BarrierReport {
    Claim claim = Claim::SPHERICITY;
    bool holds = false;
    double worst_margin = 0.0;
    double worst_time = 0.0;
    double tolerance = 0.0;  ///< discretisation allowance at the worst snapshot
    std::optional<double> eps;
    std::optional<double> rp0_sq;
    std::size_t snapshots_checked = 0;
    std::string detail;
};

inline nlohmann::json to_json(const BarrierReport& r)
{
    nlohmann::json j;
    j["claim"] = to_string(r.claim);
    j["holds"] = r.holds;
    j["worst_margin"] = r.worst_margin;
    j["worst_time"] = r.worst_time;
    j["tolerance"] = r.tolerance;
    j["eps"] = r.eps ? nlohmann::json(*r.eps) : nlohmann::json(nullptr);
    j["rp0_sq"] = r.rp0_sq ? nlohmann::json(*r.rp0_sq) : nlohmann::json(nullptr);
    j["snapshots_checked"] = r.snapshots_checked;
    j["detail"] = r.detail;
    return j;
}

/// Allowance added to strict inequalities: 10 (h^2 + dt) with h the longest edge.
inline double discretization_tolerance(const FlowState& s)
{
    const double h = edge_length_range(s.immersion).second;
    return 10.0 * (h * h + s.diagnostics.dt_used);
}

namespace detail {

/// Fold per-snapshot margins into a report: the worst snapshot is the one
/// minimising margin + tolerance.
struct MarginAccumulator {
    BarrierReport report;
    double worst_slack = std::numeric_limits<double>::infinity();

    void add(double t, double margin, double tol)
    {
        ++report.snapshots_checked;
        if (margin + tol < worst_slack) {
            worst_slack = margin + tol;
            report.worst_margin = margin;
            report.worst_time = t;
            report.tolerance = tol;
        }
    }

    BarrierReport finish()
    {
        report.holds = report.snapshots_checked > 0 && report.worst_margin >= -report.tolerance;
        return report;
    }
};

inline void require_flowp_family(const FlowTrajectory& traj, const FlowParams& p)
{
    if (traj.states.empty())
        throw hypothesis_violated("empty trajectory");
    if (p.variant == FlowVariant::FLOW0)
        throw hypothesis_violated("sign preservation is stated for FLOW and FLOWP, not FLOW0");
    if (!(p.b > 0.0))
        throw hypothesis_violated("sign preservation needs b > 0");
}

} // namespace detail

/// If max|F_0|^2 < (c/b)(0) m and (c/b)' >= 0, then |F|^2 < (c/b) m - eps
/// along the flow. Margin (c/b)(t) m - eps - max|F|^2(t).
inline BarrierReport check_sign_below(const FlowTrajectory& traj, const FlowParams& p, double eps)
{
    detail::require_flowp_family(traj, p);
    if (p.c_slope < 0.0)
        throw hypothesis_violated("check_sign_below needs (c/b)' >= 0");
    const double m = p.effective_m(traj.initial().immersion);
    const double gap = p.c_at(0.0) / p.b * m - traj.initial().diagnostics.max_F2;
    if (!(gap > 0.0))
        throw hypothesis_violated("max|F0|^2 = " + format_double(traj.initial().diagnostics.max_F2) +
                                  " is not below (c/b)(0) m = " + format_double(p.c_at(0.0) / p.b * m));
    if (!(eps > 0.0) || !(eps < gap))
        throw hypothesis_violated("eps must lie in (0, " + format_double(gap) + ")");

    detail::MarginAccumulator acc;
    acc.report.claim = Claim::SIGN_PRESERVATION_BELOW;
    acc.report.eps = eps;
    for (const auto& s : traj.states)
        acc.add(s.t, p.c_at(s.t) / p.b * m - eps - s.diagnostics.max_F2, discretization_tolerance(s));
    return acc.finish();
}

/// Mirror of check_sign_below for min|F_0|^2 > (c/b)(0) m with (c/b)' <= 0.
/// Margin min|F|^2(t) - (c/b)(t) m - eps.
inline BarrierReport check_sign_above(const FlowTrajectory& traj, const FlowParams& p, double eps)
{
    detail::require_flowp_family(traj, p);
    if (p.c_slope > 0.0)
        throw hypothesis_violated("check_sign_above needs (c/b)' <= 0");
    const double m = p.effective_m(traj.initial().immersion);
    const double gap = traj.initial().diagnostics.min_F2 - p.c_at(0.0) / p.b * m;
    if (!(gap > 0.0))
        throw hypothesis_violated("min|F0|^2 = " + format_double(traj.initial().diagnostics.min_F2) +
                                  " is not above (c/b)(0) m = " + format_double(p.c_at(0.0) / p.b * m));
    if (!(eps > 0.0) || !(eps < gap))
        throw hypothesis_violated("eps must lie in (0, " + format_double(gap) + ")");

    detail::MarginAccumulator acc;
    acc.report.claim = Claim::SIGN_PRESERVATION_ABOVE;
    acc.report.eps = eps;
    for (const auto& s : traj.states)
        acc.add(s.t, s.diagnostics.min_F2 - p.c_at(s.t) / p.b * m - eps, discretization_tolerance(s));
    return acc.finish();
}

/// Admissible interval for the comparison sphere R'_0^2 of a FLOW trajectory:
/// (max|F0|^2, (m + max|F0|^2)/2) inside, ((m + min|F0|^2)/2, min|F0|^2) outside.
inline std::pair<double, double> sphere_barrier_interval(const FlowState& initial, int m)
{
    const auto& d = initial.diagnostics;
    if (d.max_F2 < m)
        return {d.max_F2, 0.5 * (m + d.max_F2)};
    if (d.min_F2 > m)
        return {0.5 * (m + d.min_F2), d.min_F2};
    throw hypothesis_violated("initial data meets the critical sphere |F|^2 = m");
}

/// Compare a FLOW trajectory against an evolving sphere from the radial ODE
/// (a = b = c = 1). Inside: margin (R'^2 - eps) - max|F|^2; outside:
/// min|F|^2 - (R'^2 + eps). Evaluated where both are defined.
inline BarrierReport check_sphere_barrier(const FlowTrajectory& traj, double rp0_sq, double eps)
{
    if (traj.states.empty())
        throw mismatched_times("empty trajectory");
    if (traj.params.variant != FlowVariant::FLOW)
        throw hypothesis_violated("the sphere barrier is stated for FLOW");
    const auto& init = traj.initial();
    const int m = traj.params.effective_m(init.immersion);
    const auto [lo, hi] = sphere_barrier_interval(init, m);
    const bool inside = init.diagnostics.max_F2 < m;
    if (!(rp0_sq > lo) || !(rp0_sq < hi))
        throw hypothesis_violated("R'_0^2 must lie in (" + format_double(lo) + ", " + format_double(hi) + ")");
    const double eps_max = inside ? rp0_sq - init.diagnostics.max_F2 : init.diagnostics.min_F2 - rp0_sq;
    if (!(eps > 0.0) || !(eps < eps_max))
        throw hypothesis_violated("eps must lie in (0, " + format_double(eps_max) + ")");

    RadialParams rp;
    rp.m = m;
    rp.R0_sq = rp0_sq;
    const auto sphere = integrate_radial(rp, traj.final().t);

    detail::MarginAccumulator acc;
    acc.report.claim = inside ? Claim::SPHERE_BARRIER_BELOW : Claim::SPHERE_BARRIER_ABOVE;
    acc.report.eps = eps;
    acc.report.rp0_sq = rp0_sq;
    for (const auto& s : traj.states) {
        if (s.t > sphere.t_end())
            break;
        const double R2 = sphere.R_sq_at(s.t);
        const double margin = inside ? (R2 - eps) - s.diagnostics.max_F2 : s.diagnostics.min_F2 - (R2 + eps);
        acc.add(s.t, margin, discretization_tolerance(s));
    }
    if (acc.report.snapshots_checked == 0)
        throw mismatched_times("trajectory and comparison sphere share no time");
    acc.report.detail = std::string("comparison sphere ") + to_string(sphere.event) + " at t = " +
                        format_double(sphere.event_time);
    return acc.finish();
}

/// Relative spread (max|F|^2 - min|F|^2) / max(1, max|F|^2).
inline double relative_spread(const Diagnostics& d)
{
    return (d.max_F2 - d.min_F2) / std::max(1.0, d.max_F2);
}

/// Spherical initial data stays spherical: spread below 1e-4 max(1, t) at every snapshot.
inline BarrierReport check_sphericity(const FlowTrajectory& traj, double base_tol = 1e-4)
{
    if (traj.states.empty())
        throw hypothesis_violated("empty trajectory");
    const double s0 = relative_spread(traj.initial().diagnostics);
    if (!(s0 < 1e-8))
        throw hypothesis_violated("initial data is not spherical (relative spread " + format_double(s0) + ")");
    detail::MarginAccumulator acc;
    acc.report.claim = Claim::SPHERICITY;
    for (const auto& s : traj.states)
        acc.add(s.t, base_tol * std::max(1.0, s.t) - relative_spread(s.diagnostics), 0.0);
    return acc.finish();
}

} // namespace gaussflow
