#pragma once

#include "gaussflow/core.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <string>
#include <vector>

namespace gaussflow {

/// Constants of the modified flow restricted to origin-centred spheres,
/// with affine c(t) = c0 + c_slope t.
struct RadialParams {
    int m = 1;
    double a = 1.0;
    double b = 1.0;
    double c0 = 1.0;
    double c_slope = 0.0;
    double R0_sq = 1.0;

    double c(double t) const { return c0 + c_slope * t; }

    /// R0^2 relative to the critical sphere c0 m / b.
    double critical_sq() const { return c0 * m / b; }

    void validate() const
    {
        if (m < 1)
            throw invalid_config("m must be >= 1");
        if (!(a > 0.0) || !(b > 0.0) || !(c0 > 0.0))
            throw invalid_config("radial flow needs a > 0, b > 0, c0 > 0");
        if (!(R0_sq > 0.0) || !std::isfinite(R0_sq))
            throw invalid_config("R0^2 must be positive and finite");
        if (!std::isfinite(c_slope))
            throw invalid_config("c_slope must be finite");
    }
};

enum class RadialEvent { Collapse, Escape, Horizon };

inline const char* to_string(RadialEvent e)
{
    switch (e) {
    case RadialEvent::Collapse: return "COLLAPSE";
    case RadialEvent::Escape: return "ESCAPE";
    case RadialEvent::Horizon: return "HORIZON";
    }
    return "?";
}

struct RadialOptions {
    double rtol = 1e-10;
    double collapse_level = 1e-12;   ///< R^2 at which collapse is declared
    double escape_level = 0.0;       ///< R^2 ceiling for escape; 0 selects 600 m / a
    double event_time_tol = 1e-10;   ///< bisection bracket width
    std::size_t max_steps = 2'000'000;
};

struct RadialSample {
    double t;
    double R_sq;
};

/// R^2(t) of the sphere ODE. Accepted steps are kept with their dense
/// output so the solution can be evaluated at arbitrary times in range.
class RadialTrajectory {
public:
    std::vector<RadialSample> samples;
    RadialEvent event = RadialEvent::Horizon;
    double event_time = 0.0;  ///< collapse/escape time, or the horizon
    double bound_time = std::numeric_limits<double>::infinity();  ///< T1, T2, or +inf on the fixed sphere

    double t_end() const { return event_time; }

    /// Dense R^2(t) for t in [0, t_end()].
    double R_sq_at(double t) const;

    // Internal step record, exposed for checks of the integration identity.
    enum class Var { RSq, U };
    struct Segment {
        double t0, t1;
        Var var;
        double y0, y1, f0, f1;
        double d = 0.0;  ///< fourth-order correction of the continuous extension
    };
    std::vector<Segment> segments;
    RadialParams params;
};

// ---------------------------------------------------------------------------

namespace detail {

/// Exponent guard on the raw R^2 equation; callers inside the integrator only
/// reach this with R^2 <= m / a.
inline double rsq_rhs(double R_sq, const RadialParams& p, double t)
{
    return 2.0 * guarded_exp(p.a * R_sq / p.m) * (p.b * R_sq - p.m * p.c(t));
}

/// u = e^{-a R^2 / m},  u' = -(2ab/m)(R^2 - c(t) m / b).
inline double u_rhs(double u, const RadialParams& p, double t)
{
    const double R_sq = -(p.m / p.a) * std::log(u);
    return -(2.0 * p.a * p.b / p.m) * (R_sq - p.c(t) * p.m / p.b);
}

/// Dormand-Prince continuous extension on a step; d = 0 gives the cubic Hermite interpolant.
inline double dense(double s, double h, double y0, double y1, double f0, double f1, double d)
{
    const double diff = y1 - y0;
    const double r3 = h * f0 - diff;
    const double r4 = diff - h * f1 - r3;
    const double s1 = 1.0 - s;
    return y0 + s * (diff + s1 * (r3 + s * (r4 + s1 * d)));
}

inline double dense(double s, const RadialTrajectory::Segment& g)
{
    return dense(s, g.t1 - g.t0, g.y0, g.y1, g.f0, g.f1, g.d);
}

inline double to_rsq(RadialTrajectory::Var var, double y, const RadialParams& p)
{
    return var == RadialTrajectory::Var::RSq ? y : -(p.m / p.a) * std::log(y);
}

} // namespace detail

inline double RadialTrajectory::R_sq_at(double t) const
{
    if (segments.empty()) {
        if (samples.empty())
            throw domain_error("empty radial trajectory");
        return samples.front().R_sq;
    }
    if (t < segments.front().t0 || t > event_time)
        throw domain_error("time " + format_double(t) + " outside the radial trajectory");
    auto it = std::lower_bound(segments.begin(), segments.end(), t,
                               [](const Segment& s, double v) { return s.t1 < v; });
    if (it == segments.end())
        it = std::prev(segments.end());
    const double h = it->t1 - it->t0;
    const double s = h > 0.0 ? (t - it->t0) / h : 0.0;
    return detail::to_rsq(it->var, detail::dense(s, *it), params);
}

/// Right-hand side of (R^2)' = 2 e^{a R^2/m} (b R^2 - m c(t)).
inline double radial_rhs(double R_sq, const RadialParams& p, double t)
{
    if (!(R_sq > 0.0))
        throw domain_error("R^2 must be positive");
    return detail::rsq_rhs(R_sq, p, t);
}

/// T1 = m (1 - e^{-a R0^2/m}) / (2ab (c0 m/b - R0^2)), the shrink bound.
inline double bound_time_shrink(const RadialParams& p)
{
    p.validate();
    const double gap = p.critical_sq() - p.R0_sq;
    if (!(gap > 0.0))
        throw domain_error("shrink bound needs R0^2 < c0 m / b");
    return p.m * -std::expm1(-p.a * p.R0_sq / p.m) / (2.0 * p.a * p.b * gap);
}

/// T2 = m e^{-a R0^2/m} / (2ab (R0^2 - c0 m/b)), the escape bound.
inline double bound_time_expand(const RadialParams& p)
{
    p.validate();
    const double gap = p.R0_sq - p.critical_sq();
    if (!(gap > 0.0))
        throw domain_error("expand bound needs R0^2 > c0 m / b");
    return p.m * std::exp(-p.a * p.R0_sq / p.m) / (2.0 * p.a * p.b * gap);
}

/// Upper envelope -(m/a) log((2ab(c0 m/b - R0^2)/m) t + e^{-a R0^2/m}) for t in [0, T1).
inline double envelope_shrink(const RadialParams& p, double t)
{
    const double T1 = bound_time_shrink(p);
    if (!(t >= 0.0) || !(t < T1))
        throw domain_error("envelope_shrink needs t in [0, T1)");
    const double slope = 2.0 * p.a * p.b * (p.critical_sq() - p.R0_sq) / p.m;
    return -(p.m / p.a) * std::log(slope * t + std::exp(-p.a * p.R0_sq / p.m));
}

/// Lower envelope -(m/a) log(e^{-a R0^2/m} - (2ab(R0^2 - c0 m/b)/m) t) for t in [0, T2).
inline double envelope_expand(const RadialParams& p, double t)
{
    const double T2 = bound_time_expand(p);
    if (!(t >= 0.0) || !(t < T2))
        throw domain_error("envelope_expand needs t in [0, T2)");
    const double slope = 2.0 * p.a * p.b * (p.R0_sq - p.critical_sq()) / p.m;
    return -(p.m / p.a) * std::log(std::exp(-p.a * p.R0_sq / p.m) - slope * t);
}

/// Integrate the sphere ODE to collapse, escape or the horizon.
///
/// Dormand-Prince 5(4) with adaptive steps. Below R^2 = m/a the state is R^2
/// itself; above it the state is u = e^{-a R^2/m}, whose equation stays
/// bounded up to finite-time escape. Events are bracketed on the dense output
/// and bisected.
inline RadialTrajectory integrate_radial(const RadialParams& p, double horizon, const RadialOptions& opt = {})
{
    using Var = RadialTrajectory::Var;
    p.validate();
    if (!(horizon >= 0.0) || std::isnan(horizon))
        throw invalid_config("horizon must be nonnegative");
    if (!(opt.rtol > 0.0) || !(opt.collapse_level > 0.0) || !(opt.event_time_tol > 0.0))
        throw invalid_config("radial tolerances must be positive");
    if (p.c_slope < 0.0) {
        const double zero_at = -p.c0 / p.c_slope;
        if (!(horizon < zero_at))
            throw invalid_config("c(t) reaches zero before the horizon");
    }

    RadialTrajectory traj;
    traj.params = p;
    const double crit = p.critical_sq();
    if (p.R0_sq < crit && p.c_slope >= 0.0)
        traj.bound_time = bound_time_shrink(p);
    else if (p.R0_sq > crit && p.c_slope <= 0.0)
        traj.bound_time = bound_time_expand(p);
    traj.samples.push_back({0.0, p.R0_sq});

    // Fixed sphere: with constant c and b R0^2 = m c the solution is constant.
    if (p.c_slope == 0.0 && std::abs(p.b * p.R0_sq - p.m * p.c0) <= 4.0 * std::numeric_limits<double>::epsilon() * p.m * p.c0) {
        if (!std::isfinite(horizon))
            throw invalid_config("fixed sphere needs a finite horizon");
        traj.segments.push_back({0.0, horizon, Var::RSq, p.R0_sq, p.R0_sq, 0.0, 0.0});
        if (horizon > 0.0)
            traj.samples.push_back({horizon, p.R0_sq});
        traj.event = RadialEvent::Horizon;
        traj.event_time = horizon;
        return traj;
    }

    const double escape_level = opt.escape_level > 0.0 ? opt.escape_level : 600.0 * p.m / p.a;
    const double u_floor = std::exp(-p.a * escape_level / p.m);
    const double switch_level = p.m / p.a;

    auto rhs = [&](Var var, double y, double t) {
        return var == Var::RSq ? detail::rsq_rhs(y, p, t) : detail::u_rhs(y, p, t);
    };
    auto valid = [](Var var, double y) { return std::isfinite(y) && (var == Var::RSq || y > 0.0); };

    // Dormand-Prince tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                            d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                            d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

    double t = 0.0;
    double rsq = p.R0_sq;
    double h = std::min(1e-4, std::isfinite(horizon) ? std::max(horizon, 1e-300) : 1e-4);
    if (std::isfinite(traj.bound_time))
        h = std::min(h, 1e-3 * traj.bound_time);
    const double refine_h = 1e-6;

    for (std::size_t step = 0;; ++step) {
        if (step >= opt.max_steps)
            throw invalid_config("radial integration exceeded its step budget");
        if (t >= horizon) {
            traj.event = RadialEvent::Horizon;
            traj.event_time = horizon;
            return traj;
        }
        const Var var = rsq <= switch_level ? Var::RSq : Var::U;
        const double y0 = var == Var::RSq ? rsq : std::exp(-p.a * rsq / p.m);
        const double f0 = rhs(var, y0, t);
        h = std::min(h, horizon - t);

        // Attempt a step; on invalid stages (u <= 0 past escape) shrink.
        bool accepted = false;
        double y1 = 0.0, f1 = 0.0;
        while (!accepted) {
            if (var == Var::U && h < 1e-15 * std::max(1.0, t)) {
                // escape lies within roundoff of t
                const double t_ev = t + std::min(h, y0 / std::max(std::abs(f0), 1e-300));
                traj.segments.push_back({t, t_ev, var, y0, u_floor, f0, rhs(var, u_floor, t_ev)});
                traj.samples.push_back({t_ev, escape_level});
                traj.event = RadialEvent::Escape;
                traj.event_time = t_ev;
                return traj;
            }
            auto stage = [&](double dt_frac, double y) -> std::pair<bool, double> {
                if (!valid(var, y))
                    return {false, 0.0};
                double k = rhs(var, y, t + dt_frac * h);
                return {std::isfinite(k), k};
            };
            const double k1 = f0;
            auto [ok2, k2] = stage(c2, y0 + h * a21 * k1);
            if (!ok2) { h *= 0.25; continue; }
            auto [ok3, k3] = stage(c3, y0 + h * (a31 * k1 + a32 * k2));
            if (!ok3) { h *= 0.25; continue; }
            auto [ok4, k4] = stage(c4, y0 + h * (a41 * k1 + a42 * k2 + a43 * k3));
            if (!ok4) { h *= 0.25; continue; }
            auto [ok5, k5] = stage(c5, y0 + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            if (!ok5) { h *= 0.25; continue; }
            auto [ok6, k6] = stage(1.0, y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            if (!ok6) { h *= 0.25; continue; }
            const double y_new = y0 + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            auto [ok7, k7] = stage(1.0, y_new);
            if (!ok7) { h *= 0.25; continue; }
            const double err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            const double scale = 1e-300 + opt.rtol * std::max(std::abs(y0), std::abs(y_new)) +
                                 (var == Var::RSq ? opt.rtol * opt.collapse_level : 0.0);
            const double norm = std::abs(err) / scale;
            if (norm > 1.0) {
                h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
                continue;
            }
            // Steps containing an event are kept short so the dense output is sharp.
            const double rsq_new = detail::to_rsq(var, y_new, p);
            const bool event_inside = rsq_new <= opt.collapse_level || (var == Var::U && y_new <= u_floor);
            if (event_inside && h > refine_h) {
                h = std::max(h * 0.125, refine_h);
                continue;
            }
            y1 = y_new;
            f1 = k7;
            accepted = true;
            const double grow = norm > 0.0 ? std::min(5.0, 0.9 * std::pow(norm, -0.2)) : 5.0;
            const double dcoef = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            traj.segments.push_back({t, t + h, var, y0, y1, f0, f1, dcoef});
            h *= grow;
        }

        const auto& seg = traj.segments.back();
        const double rsq1 = detail::to_rsq(var, y1, p);
        const bool collapse = rsq1 <= opt.collapse_level;
        const bool escape = var == Var::U ? y1 <= u_floor : rsq1 >= escape_level;
        if (collapse || escape) {
            // Bisect the dense output for the level crossing.
            const double level_y = collapse ? (var == Var::RSq ? opt.collapse_level
                                                               : std::exp(-p.a * opt.collapse_level / p.m))
                                            : (var == Var::U ? u_floor : escape_level);
            const double hs = seg.t1 - seg.t0;
            double lo = 0.0, hi = 1.0;
            const double sign0 = seg.y0 - level_y;
            for (int it = 0; it < 200 && (hi - lo) * hs > opt.event_time_tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double v = detail::dense(mid, seg) - level_y;
                if ((v > 0.0) == (sign0 > 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            const double t_ev = seg.t0 + 0.5 * (lo + hi) * hs;
            traj.samples.push_back({t_ev, collapse ? opt.collapse_level : escape_level});
            traj.event = collapse ? RadialEvent::Collapse : RadialEvent::Escape;
            traj.event_time = t_ev;
            return traj;
        }
        t = seg.t1;
        rsq = rsq1;
        traj.samples.push_back({t, rsq});
    }
}

} // namespace gaussflow
