#include "gaussflow/comparison.hpp"
#include "gaussflow/shapes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gaussflow;

namespace {

FlowParams flow(FlowVariant v = FlowVariant::FLOW)
{
    FlowParams p;
    p.variant = v;
    return p;
}

const FlowTrajectory& shrinking_circle()
{
    static const FlowTrajectory t = run(shapes::circle(0.8, 128), flow(), 1.0);
    return t;
}

const FlowTrajectory& shrinking_ellipse()
{
    static const FlowTrajectory t = run(shapes::ellipse(0.9, 0.6, 128), flow(), 1.0);
    return t;
}

const FlowTrajectory& escaping_icosphere()
{
    static const FlowTrajectory t = run(shapes::icosphere(2.0, 3), flow(), 0.1);
    return t;
}

FlowTrajectory escaping_ellipsoid(double min_norm2, int subdivisions = 3)
{
    return run(scale_to_norm2(shapes::ellipsoid(1.0, 1.2, 1.4, subdivisions), min_norm2, false), flow(), 0.1);
}

} // namespace

TEST(Claims, Names)
{
    EXPECT_EQ(parse_claim("SPHERICITY"), Claim::SPHERICITY);
    EXPECT_STREQ(to_string(Claim::SPHERE_BARRIER_ABOVE), "SPHERE_BARRIER_ABOVE");
    EXPECT_THROW(parse_claim("NOPE"), invalid_config);
}

TEST(SignBelow, ShrinkingCircle)
{
    const auto r = check_sign_below(shrinking_circle(), flow(), 0.1);
    EXPECT_TRUE(r.holds);
    EXPECT_GT(r.worst_margin, 0.0);
    EXPECT_EQ(r.claim, Claim::SIGN_PRESERVATION_BELOW);
    EXPECT_EQ(r.snapshots_checked, shrinking_circle().states.size());
    EXPECT_GE(r.worst_margin, -r.tolerance);
}

TEST(SignBelow, HypothesisGates)
{
    EXPECT_THROW(check_sign_below(shrinking_circle(), flow(), 0.36), hypothesis_violated);
    EXPECT_THROW(check_sign_below(shrinking_circle(), flow(), 0.0), hypothesis_violated);
    EXPECT_THROW(check_sign_below(escaping_icosphere(), flow(), 0.1), hypothesis_violated);
    const auto stationary = run(shapes::circle(1.0, 64), flow(), 0.01);
    EXPECT_THROW(check_sign_below(stationary, flow(), 1e-3), hypothesis_violated);
    EXPECT_THROW(check_sign_below(shrinking_circle(), flow(FlowVariant::FLOW0), 0.1), hypothesis_violated);
}

TEST(SignAbove, EscapingIcosphere)
{
    const auto r = check_sign_above(escaping_icosphere(), flow(), 1.0);
    EXPECT_TRUE(r.holds);
    EXPECT_GT(r.worst_margin, 0.0);
}

TEST(SignAbove, EllipsoidAboveCritical)
{
    const auto traj = escaping_ellipsoid(3.0, 2);
    EXPECT_NEAR(traj.initial().diagnostics.min_F2, 3.0, 1e-12);
    const auto r = check_sign_above(traj, flow(), 0.5);
    EXPECT_TRUE(r.holds);
    EXPECT_NE(traj.stop.kind, StopKind::HORIZON_REACHED);
}

TEST(SignAbove, HypothesisGates)
{
    EXPECT_THROW(check_sign_above(escaping_icosphere(), flow(), 2.0), hypothesis_violated);
    EXPECT_THROW(check_sign_above(shrinking_circle(), flow(), 0.1), hypothesis_violated);
    auto p = flow(FlowVariant::FLOWP);
    p.c_slope = 1.0;
    EXPECT_THROW(check_sign_above(escaping_icosphere(), p, 1.0), hypothesis_violated);
}

TEST(SignBelow, FlowpWithGrowingC)
{
    auto p = flow(FlowVariant::FLOWP);
    p.a = 0.5;
    p.b = 2.0;
    p.c = 1.5;
    p.c_slope = 0.5;
    // (c/b)(0) m = 0.75 > 0.64
    const auto traj = run(shapes::circle(0.8, 128), p, 0.5);
    const auto r = check_sign_below(traj, p, 0.05);
    EXPECT_TRUE(r.holds);
}

TEST(SphereBarrier, EllipseInside)
{
    const auto& traj = shrinking_ellipse();
    EXPECT_NEAR(traj.initial().diagnostics.max_F2, 0.81, 1e-12);
    const auto r = check_sphere_barrier(traj, 0.85, 0.02);
    EXPECT_EQ(r.claim, Claim::SPHERE_BARRIER_BELOW);
    EXPECT_TRUE(r.holds) << r.worst_margin << " at " << r.worst_time;
    ASSERT_TRUE(r.rp0_sq.has_value());
    EXPECT_EQ(*r.rp0_sq, 0.85);
}

TEST(SphereBarrier, SurfaceOutside)
{
    const auto traj = escaping_ellipsoid(5.0);
    const auto r = check_sphere_barrier(traj, 4.0, 0.5);
    EXPECT_EQ(r.claim, Claim::SPHERE_BARRIER_ABOVE);
    EXPECT_TRUE(r.holds) << r.worst_margin << " at " << r.worst_time;
}

TEST(SphereBarrier, HypothesisGates)
{
    const auto& traj = shrinking_ellipse();
    EXPECT_THROW(check_sphere_barrier(traj, 0.95, 0.02), hypothesis_violated);
    EXPECT_THROW(check_sphere_barrier(traj, 0.80, 0.02), hypothesis_violated);
    EXPECT_THROW(check_sphere_barrier(traj, 0.85, 0.05), hypothesis_violated);
    const auto flow0 = run(shapes::ellipse(0.9, 0.6, 64), flow(FlowVariant::FLOW0), 0.01);
    EXPECT_THROW(check_sphere_barrier(flow0, 0.85, 0.02), hypothesis_violated);
    EXPECT_EQ(sphere_barrier_interval(traj.initial(), 1), std::make_pair(0.81, 0.905));
}

TEST(Sphericity, Icosphere)
{
    const auto traj = run(shapes::icosphere(1.3, 3), flow(), 1.0);
    EXPECT_NE(traj.stop.kind, StopKind::HORIZON_REACHED);
    EXPECT_TRUE(check_sphericity(traj).holds);
}

TEST(Sphericity, CircleSpreadTiny)
{
    const auto traj = run(shapes::circle(0.7, 512), flow(), 0.05);
    const auto r = check_sphericity(traj);
    EXPECT_TRUE(r.holds);
    for (const auto& s : traj.states)
        EXPECT_LT(relative_spread(s.diagnostics), 1e-6);
}

TEST(Sphericity, RejectsEllipse)
{
    EXPECT_THROW(check_sphericity(shrinking_ellipse()), hypothesis_violated);
}

TEST(Properties, PureAndDeterministic)
{
    const auto a = check_sphere_barrier(shrinking_ellipse(), 0.86, 0.03);
    const auto b = check_sphere_barrier(shrinking_ellipse(), 0.86, 0.03);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(Properties, SphereBarrierConsistentWithSphericity)
{
    const auto& traj = shrinking_circle();
    const auto [lo, hi] = sphere_barrier_interval(traj.initial(), 1);
    for (double f : {0.25, 0.5, 0.75}) {
        const double rp = lo + f * (hi - lo);
        EXPECT_TRUE(check_sphere_barrier(traj, rp, 0.5 * (rp - lo)).holds);
    }
    EXPECT_TRUE(check_sphericity(traj).holds);
}

TEST(Properties, MarginsMonotoneInEps)
{
    const auto& traj = shrinking_ellipse();
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.005, 0.01, 0.02, 0.03}) {
        const auto r = check_sphere_barrier(traj, 0.85, eps);
        EXPECT_LE(r.worst_margin, prev);
        prev = r.worst_margin;
        const auto s = check_sign_below(traj, flow(), eps);
        if (s.holds) {
            for (double smaller : {0.5 * eps, 0.25 * eps})
                EXPECT_TRUE(check_sign_below(traj, flow(), smaller).holds);
        }
    }
}

TEST(Tolerance, Definition)
{
    const auto& s = shrinking_circle().states[1];
    const double h = edge_length_range(s.immersion).second;
    EXPECT_DOUBLE_EQ(discretization_tolerance(s), 10.0 * (h * h + s.diagnostics.dt_used));
}
