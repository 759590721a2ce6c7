#pragma once

#include "gaussflow/mesh.hpp"

#include <map>
#include <numbers>
#include <random>
#include <string>

namespace gaussflow {

/// Parameters for builtin_shape. Unused fields are ignored by a given shape.
struct ShapeParams {
    double radius = 1.0;
    std::vector<double> semi_axes;  ///< ellipse (2) or ellipsoid (3)
    double amplitude = 0.0;         ///< absolute radial perturbation
    int mode = 3;                   ///< angular frequency of the perturbation
    std::uint64_t seed = 0;
    int ambient_dim = 2;            ///< curves only
    int subdivisions = 3;           ///< surfaces only
};

namespace shapes {

inline DiscreteImmersion circle(double radius, int n, int ambient_dim = 2)
{
    VectorField v = VectorField::Zero(ambient_dim, n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n;
        v(0, i) = radius * std::cos(th);
        v(1, i) = radius * std::sin(th);
    }
    return DiscreteImmersion::curve(std::move(v));
}

inline DiscreteImmersion ellipse(double ax, double ay, int n, int ambient_dim = 2)
{
    VectorField v = VectorField::Zero(ambient_dim, n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n;
        v(0, i) = ax * std::cos(th);
        v(1, i) = ay * std::sin(th);
    }
    return DiscreteImmersion::curve(std::move(v));
}

/// r(theta) = R + amp cos(mode theta + phase), phase drawn from the seed.
inline DiscreteImmersion perturbed_circle(double radius, double amp, int mode, std::uint64_t seed, int n,
                                          int ambient_dim = 2)
{
    std::mt19937_64 rng(seed);
    const double phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    VectorField v = VectorField::Zero(ambient_dim, n);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * std::numbers::pi * i / n;
        const double r = radius + amp * std::cos(mode * th + phase);
        v(0, i) = r * std::cos(th);
        v(1, i) = r * std::sin(th);
    }
    return DiscreteImmersion::curve(std::move(v));
}

/// Unit icosphere: icosahedron with `subdivisions` rounds of midpoint
/// splitting, every vertex projected to the unit sphere.
inline std::pair<VectorField, std::vector<Face>> unit_icosphere(int subdivisions)
{
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> pts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                                        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                                        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : pts)
        p.normalize();
    std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end())
                return it->second;
            pts.push_back((pts[a] + pts[b]).normalized());
            int idx = static_cast<int>(pts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    VectorField v(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        v.col(static_cast<Eigen::Index>(i)) = pts[i];
    return {std::move(v), std::move(faces)};
}

inline DiscreteImmersion icosphere(double radius, int subdivisions)
{
    auto [v, f] = unit_icosphere(subdivisions);
    return DiscreteImmersion::surface(radius * v, std::move(f));
}

inline DiscreteImmersion ellipsoid(double ax, double ay, double az, int subdivisions)
{
    auto [v, f] = unit_icosphere(subdivisions);
    v.row(0) *= ax;
    v.row(1) *= ay;
    v.row(2) *= az;
    return DiscreteImmersion::surface(std::move(v), std::move(f));
}

/// r(u) = R + amp cos(mode * angle(u, d)) for a seeded random axis d.
inline DiscreteImmersion perturbed_sphere(double radius, double amp, int mode, std::uint64_t seed,
                                          int subdivisions)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Vector3d d(normal(rng), normal(rng), normal(rng));
    d.normalize();
    auto [v, f] = unit_icosphere(subdivisions);
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
        const double ang = std::acos(std::clamp(v.col(i).dot(d), -1.0, 1.0));
        v.col(i) *= radius + amp * std::cos(mode * ang);
    }
    return DiscreteImmersion::surface(std::move(v), std::move(f));
}

} // namespace shapes

/// Uniformly rescale so that the extreme vertex |F|^2 equals `target`.
inline DiscreteImmersion scale_to_norm2(const DiscreteImmersion& s, double target, bool use_max)
{
    const ScalarField F2 = squared_norms(s);
    const double current = use_max ? F2.maxCoeff() : F2.minCoeff();
    if (!(current > 0.0) || !(target > 0.0))
        throw invalid_config("cannot rescale a shape through the origin");
    return s.with_vertices(std::sqrt(target / current) * s.vertices());
}

/// Factory for the named initial shapes: circle, ellipse, perturbed_circle,
/// icosphere, ellipsoid, perturbed_sphere. `n` is the vertex count for curves
/// and ignored for surfaces (which use params.subdivisions).
inline DiscreteImmersion builtin_shape(const std::string& name, const ShapeParams& p, int n)
{
    const bool is_surface = name == "icosphere" || name == "ellipsoid" || name == "perturbed_sphere";
    if (!is_surface && (n < 16 || n > 1'000'000))
        throw invalid_config("vertex count must lie in [16, 1e6]");
    if (is_surface) {
        if (p.subdivisions < 1 || p.subdivisions > 8)
            throw invalid_config("subdivisions must lie in [1, 8]");
    } else if (p.ambient_dim < 2) {
        throw invalid_config("curves need ambient_dim >= 2");
    }
    auto positive = [](double x, const char* what) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw invalid_config(std::string(what) + " must be positive");
    };

    if (name == "circle") {
        positive(p.radius, "radius");
        return shapes::circle(p.radius, n, p.ambient_dim);
    }
    if (name == "ellipse") {
        if (p.semi_axes.size() != 2)
            throw invalid_config("ellipse needs two semi-axes");
        positive(p.semi_axes[0], "semi-axis");
        positive(p.semi_axes[1], "semi-axis");
        return shapes::ellipse(p.semi_axes[0], p.semi_axes[1], n, p.ambient_dim);
    }
    if (name == "icosphere") {
        positive(p.radius, "radius");
        return shapes::icosphere(p.radius, p.subdivisions);
    }
    if (name == "ellipsoid") {
        if (p.semi_axes.size() != 3)
            throw invalid_config("ellipsoid needs three semi-axes");
        for (double x : p.semi_axes)
            positive(x, "semi-axis");
        return shapes::ellipsoid(p.semi_axes[0], p.semi_axes[1], p.semi_axes[2], p.subdivisions);
    }
    if (name == "perturbed_circle" || name == "perturbed_sphere") {
        positive(p.radius, "radius");
        positive(p.amplitude, "amplitude");
        if (p.amplitude >= p.radius)
            throw invalid_config("perturbation amplitude must be smaller than the radius");
        if (p.mode < 1)
            throw invalid_config("perturbation mode must be >= 1");
        // The perturbed radius stays in [R - amp, R + amp]; refuse amplitudes that
        // would let |F|^2 reach the critical value m.
        const double m = name == "perturbed_circle" ? 1.0 : 2.0;
        const double lo = (p.radius - p.amplitude) * (p.radius - p.amplitude);
        const double hi = (p.radius + p.amplitude) * (p.radius + p.amplitude);
        if (lo <= m && m <= hi)
            throw invalid_config("perturbation amplitude would cross the critical sphere |F|^2 = m");
        if (name == "perturbed_circle")
            return shapes::perturbed_circle(p.radius, p.amplitude, p.mode, p.seed, n, p.ambient_dim);
        return shapes::perturbed_sphere(p.radius, p.amplitude, p.mode, p.seed, p.subdivisions);
    }
    throw invalid_config("unknown shape '" + name + "'");
}

} // namespace gaussflow
