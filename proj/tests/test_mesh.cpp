#include "gaussflow/mesh.hpp"
#include "gaussflow/shapes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gaussflow;

namespace {

double max_relative_error(const VectorField& got, const VectorField& want)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < got.cols(); ++i)
        worst = std::max(worst, (got.col(i) - want.col(i)).norm() / want.col(i).norm());
    return worst;
}

/// Circle sampled at theta = s + 0.3 sin(s), s uniform: smooth but non-uniform spacing.
DiscreteImmersion graded_circle(double R, int n)
{
    VectorField v(2, n);
    for (int i = 0; i < n; ++i) {
        const double s = 2.0 * std::numbers::pi * i / n;
        const double th = s + 0.3 * std::sin(s);
        v(0, i) = R * std::cos(th);
        v(1, i) = R * std::sin(th);
    }
    return DiscreteImmersion::curve(std::move(v));
}

VectorField smooth_field(const DiscreteImmersion& s, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd coef(s.ambient_dim(), s.ambient_dim());
    for (Eigen::Index i = 0; i < coef.size(); ++i)
        coef.data()[i] = u(rng);
    VectorField out(s.ambient_dim(), s.vertex_count());
    for (int i = 0; i < s.vertex_count(); ++i)
        out.col(i) = (coef * s.vertex(i)).array().sin().matrix();
    return out;
}

} // namespace

// ----------------------------------------------------------------------------- construction

TEST(Mesh, CurveValidation)
{
    EXPECT_THROW(DiscreteImmersion::curve(VectorField::Zero(2, 3)), invalid_mesh);
    VectorField v = shapes::circle(1.0, 8).vertices();
    v.col(3) = v.col(2);
    EXPECT_THROW(DiscreteImmersion::curve(v), degenerate_mesh);
    v = shapes::circle(1.0, 8).vertices();
    v(0, 1) = std::nan("");
    EXPECT_THROW(DiscreteImmersion::curve(v), invalid_mesh);
}

TEST(Mesh, SurfaceValidation)
{
    auto [v, f] = shapes::unit_icosphere(1);
    auto open = f;
    open.pop_back();
    EXPECT_THROW(DiscreteImmersion::surface(v, open), invalid_mesh);
    auto flipped = f;
    std::swap(flipped[3][0], flipped[3][1]);
    const auto s = DiscreteImmersion::surface(v, flipped);
    // reoriented consistently: total signed volume is positive and matches the original
    auto signed_volume = [](const DiscreteImmersion& m) {
        double vol = 0.0;
        for (const auto& t : m.topology().faces) {
            const Eigen::Vector3d a = m.vertex(t[0]), b = m.vertex(t[1]), c = m.vertex(t[2]);
            vol += a.dot(b.cross(c)) / 6.0;
        }
        return vol;
    };
    EXPECT_NEAR(std::abs(signed_volume(s)), std::abs(signed_volume(DiscreteImmersion::surface(v, f))), 1e-12);
    EXPECT_THROW(DiscreteImmersion::surface(VectorField::Zero(2, 12), f), invalid_mesh);
}

TEST(Mesh, IcosphereVertexCount)
{
    EXPECT_EQ(shapes::icosphere(1.0, 3).vertex_count(), 642);
    EXPECT_EQ(shapes::icosphere(1.0, 3).topology().faces.size(), 1280u);
}

// ----------------------------------------------------------------------------- mean curvature

TEST(Mesh, CircleMeanCurvature)
{
    const auto s = shapes::circle(2.0, 256);
    const VectorField H = mean_curvature_vector(s);
    EXPECT_LT(max_relative_error(H, -s.vertices() / 4.0), 1e-3);
}

TEST(Mesh, IcosphereMeanCurvatureCotan)
{
    const auto s = shapes::icosphere(1.0, 3);
    EXPECT_LT(max_relative_error(mean_curvature_vector(s), -2.0 * s.vertices()), 2e-2);
}

TEST(Mesh, IcosphereMeanCurvatureFit)
{
    for (double R : {0.5, 1.0, 2.0}) {
        const auto s = shapes::icosphere(R, 3);
        const auto fit = fitted_curvature(s);
        EXPECT_LT(max_relative_error(fit.H, -(2.0 / (R * R)) * s.vertices()), 1e-10);
        for (int i = 0; i < s.vertex_count(); ++i)
            EXPECT_NEAR(fit.h2[i], 2.0 / (R * R), 1e-9 / (R * R));
    }
}

TEST(Mesh, EllipsoidFitMatchesAnalyticCurvature)
{
    const double a = 1.0, b = 1.2, c = 0.8;
    const auto s = shapes::ellipsoid(a, b, c, 3);
    const auto fit = fitted_curvature(s);
    for (int i = 0; i < s.vertex_count(); ++i) {
        const Eigen::Vector3d p = s.vertex(i);
        // gradient and Hessian of x^2/a^2 + y^2/b^2 + z^2/c^2
        const Eigen::Vector3d g(2 * p.x() / (a * a), 2 * p.y() / (b * b), 2 * p.z() / (c * c));
        const Eigen::Matrix3d Hs = Eigen::Vector3d(2 / (a * a), 2 / (b * b), 2 / (c * c)).asDiagonal();
        const Eigen::Vector3d n = g.normalized();
        const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - n * n.transpose();
        const Eigen::Matrix3d W = P * Hs * P / g.norm();
        EXPECT_NEAR(fit.h2[i], W.squaredNorm(), 1e-8);
        EXPECT_LT((Eigen::Vector3d(fit.H.col(i)) + W.trace() * n).norm(), 1e-8);
    }
}

TEST(Mesh, CollinearVertexHasZeroCurvature)
{
    VectorField v(2, 4);
    v << 0, 1, 2, 1, 0, 0, 0, 1;
    const auto s = DiscreteImmersion::curve(v);
    EXPECT_EQ(mean_curvature_vector(s).col(1).norm(), 0.0);
}

TEST(Mesh, CurveMeanCurvatureHigherCodimension)
{
    const auto s = shapes::circle(1.5, 128, 4);
    EXPECT_LT(max_relative_error(mean_curvature_vector(s), -s.vertices() / 2.25), 1e-12);
}

TEST(Mesh, RefinementConvergence)
{
    auto err = [](int n) {
        const auto s = graded_circle(1.0, n);
        return max_relative_error(mean_curvature_vector(s), -s.vertices());
    };
    const double e64 = err(64), e128 = err(128), e256 = err(256);
    EXPECT_LT(e128, e64);
    EXPECT_LT(e256, e128);
}

// ----------------------------------------------------------------------------- projection

TEST(Mesh, RadialVectorIsNormalOnRoundShapes)
{
    const auto c = shapes::circle(1.3, 200, 3);
    EXPECT_LT((normal_projection(c, c.vertices()) - c.vertices()).colwise().norm().maxCoeff(), 1e-10);
    const auto s = shapes::icosphere(1.3, 3);
    EXPECT_LT((normal_projection(s, s.vertices()) - s.vertices()).colwise().norm().maxCoeff(), 1e-10);
}

TEST(Mesh, TangentVectorProjectsToZero)
{
    const auto s = shapes::ellipse(2.0, 1.0, 128);
    VectorField v(2, s.vertex_count());
    for (int i = 0; i < s.vertex_count(); ++i)
        v.col(i) = s.vertex(s.next(i)) - s.vertex(s.prev(i));
    EXPECT_LT(normal_projection(s, v).colwise().norm().maxCoeff(), 1e-12);
}

TEST(Mesh, EllipseNormalAtAxisEndpoint)
{
    const auto s = shapes::ellipse(2.0, 1.0, 128);
    const VectorField P = normal_projection(s, s.vertices());
    EXPECT_NEAR(P(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(P(1, 0), 0.0, 1e-12);
}

TEST(Mesh, ProjectionIdempotentAndOrthogonal)
{
    for (const auto& s : {shapes::perturbed_circle(1.0, 0.2, 3, 5, 97, 3), shapes::perturbed_sphere(1.0, 0.2, 2, 5, 2)}) {
        const VectorField v = smooth_field(s, 11);
        const VectorField P = normal_projection(s, v);
        const VectorField PP = normal_projection(s, P);
        EXPECT_LT((PP - P).cwiseAbs().maxCoeff(), 1e-12);
        VectorField normals;
        if (!s.is_curve())
            normals = fitted_curvature(s).normal;
        for (int i = 0; i < s.vertex_count(); ++i) {
            const Eigen::MatrixXd T = tangent_basis(s, i, s.is_curve() ? nullptr : &normals);
            EXPECT_LT((T.transpose() * P.col(i)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

// ----------------------------------------------------------------------------- |h|^2

TEST(Mesh, CircleSecondFundamentalNorm)
{
    const auto s = shapes::circle(2.0, 256);
    const ScalarField h2 = second_fundamental_norm(s);
    EXPECT_LT((h2.array() / 0.25 - 1.0).abs().maxCoeff(), 1e-3);
    const VectorField H = mean_curvature_vector(s);
    for (int i = 0; i < s.vertex_count(); ++i)
        EXPECT_EQ(h2[i], H.col(i).squaredNorm());
}

TEST(Mesh, IcosphereSecondFundamentalNorm)
{
    const ScalarField h2 = second_fundamental_norm(shapes::icosphere(1.0, 3));
    EXPECT_LT((h2.array() - 2.0).abs().maxCoeff(), 5e-2);
}

// ----------------------------------------------------------------------------- Laplace-Beltrami

TEST(Mesh, LaplacianAnnihilatesConstants)
{
    const auto c = shapes::perturbed_circle(1.0, 0.1, 4, 2, 64);
    EXPECT_LT(laplace_beltrami(c, ScalarField::Constant(64, 3.5)).cwiseAbs().maxCoeff(), 1e-12);
    const auto s = shapes::perturbed_sphere(1.0, 0.1, 3, 2, 2);
    EXPECT_LT(laplace_beltrami(s, ScalarField::Constant(s.vertex_count(), 3.5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Mesh, LaplacianOfSquaredNormOnSphere)
{
    for (double R : {1.0, 2.0}) {
        const auto s = shapes::icosphere(R, 3);
        EXPECT_LT(laplace_beltrami(s, squared_norms(s)).cwiseAbs().maxCoeff(), 5e-2);
    }
}

TEST(Mesh, CircleEigenfunction)
{
    const auto s = shapes::circle(1.0, 256);
    const ScalarField f = s.vertices().row(0).transpose();
    EXPECT_LT((laplace_beltrami(s, f) + f).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Mesh, LaplacianSymmetricInAreaInnerProduct)
{
    for (const auto& s : {graded_circle(1.0, 90), shapes::perturbed_sphere(1.0, 0.15, 3, 9, 2)}) {
        const ScalarField A = vertex_areas(s);
        const ScalarField f = s.vertices().row(0).transpose().array().sin();
        const ScalarField g = s.vertices().row(1).transpose().array().exp();
        const double lhs = (A.array() * f.array() * laplace_beltrami(s, g).array()).sum();
        const double rhs = (A.array() * g.array() * laplace_beltrami(s, f).array()).sum();
        EXPECT_NEAR(lhs, rhs, 1e-9);
    }
}

TEST(Mesh, AreaFirstVariation)
{
    // curves use the edge-length formula; surfaces use the cotan mean curvature
    for (const auto& s : {graded_circle(1.0, 80), shapes::perturbed_sphere(1.0, 0.15, 3, 9, 2)}) {
        const VectorField V = smooth_field(s, 3);
        const double eps = 1e-6;
        const double fd = (total_area(s.with_vertices(s.vertices() + eps * V)) -
                           total_area(s.with_vertices(s.vertices() - eps * V))) /
                          (2 * eps);
        const ScalarField A = vertex_areas(s);
        const VectorField H = mean_curvature_vector(s);
        double predicted = 0.0;
        for (int i = 0; i < s.vertex_count(); ++i)
            predicted -= A[i] * H.col(i).dot(V.col(i));
        EXPECT_NEAR(fd, predicted, 1e-3 * std::abs(predicted));
    }
}

// ----------------------------------------------------------------------------- weighted area, quality

TEST(Mesh, WeightedAreaClosedForms)
{
    EXPECT_NEAR(weighted_area(shapes::circle(1.0, 256)) / (2 * std::numbers::pi * std::exp(-0.5)), 1.0, 1e-3);
    EXPECT_NEAR(weighted_area(shapes::icosphere(1.0, 3)) / (4 * std::numbers::pi * std::exp(-0.5)), 1.0, 2e-2);
    EXPECT_NEAR(2 * std::numbers::pi * std::exp(-0.5), 3.81094452946036, 1e-13);
}

TEST(Mesh, WeightedAreaMatchesFineQuadrature)
{
    // coarse square curve versus a densely resampled trapezoid sum
    VectorField sq(2, 4);
    sq << 1.5, -1.5, -1.5, 1.5, 1.5, 1.5, -1.5, -1.5;
    double fine = 0.0;
    const int k = 20000;
    for (int e = 0; e < 4; ++e) {
        const Eigen::Vector2d a = sq.col(e), b = sq.col((e + 1) % 4);
        const double h = (b - a).norm() / k;
        for (int j = 0; j < k; ++j) {
            const Eigen::Vector2d x0 = a + (b - a) * (double(j) / k), x1 = a + (b - a) * (double(j + 1) / k);
            fine += 0.5 * h * (std::exp(-0.5 * x0.squaredNorm()) + std::exp(-0.5 * x1.squaredNorm()));
        }
    }
    EXPECT_NEAR(weighted_area(DiscreteImmersion::curve(sq)), fine, 1e-8);

    // coarse surface versus its own subdivision
    const auto coarse = shapes::ellipsoid(2.0, 1.5, 1.0, 1);
    double lumped_fine = 0.0;
    for (const auto& f : coarse.topology().faces) {
        const Eigen::Vector3d p0 = coarse.vertex(f[0]), p1 = coarse.vertex(f[1]), p2 = coarse.vertex(f[2]);
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        const int n = 200;
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; i + j < n; ++j) {
                const double u = (i + 1.0 / 3.0) / n, v = (j + 1.0 / 3.0) / n;
                sum += std::exp(-0.5 * (p0 + u * (p1 - p0) + v * (p2 - p0)).squaredNorm());
                if (i + j + 1 < n) {
                    const double u2 = (i + 2.0 / 3.0) / n, v2 = (j + 2.0 / 3.0) / n;
                    sum += std::exp(-0.5 * (p0 + u2 * (p1 - p0) + v2 * (p2 - p0)).squaredNorm());
                }
            }
        lumped_fine += area * sum / (n * n);
    }
    EXPECT_NEAR(weighted_area(coarse) / lumped_fine, 1.0, 1e-4);
}

TEST(Mesh, WeightedAreaDecaysWithScale)
{
    const auto s = shapes::icosphere(1.0, 2);
    double prev = weighted_area(s.with_vertices(2.0 * s.vertices()));
    for (double k = 3.0; k <= 12.0; k += 1.0) {
        const double w = weighted_area(s.with_vertices(k * s.vertices()));
        EXPECT_LT(w, prev);
        prev = w;
    }
    EXPECT_LT(prev, 1e-25);
}

TEST(Mesh, QualityMeasures)
{
    EXPECT_NEAR(mesh_quality(shapes::circle(1.0, 37)), 1.0, 1e-12);
    EXPECT_NEAR(mesh_quality(shapes::icosphere(1.0, 0)), 1.0, 1e-12);
    VectorField rect(2, 4);
    rect << 0, 2, 2, 0, 0, 0, 1, 1;
    EXPECT_DOUBLE_EQ(mesh_quality(DiscreteImmersion::curve(rect)), 0.5);
    VectorField poly(2, 5);
    poly << 0, 1, 2, 2, 0, 0, 0, 0, 1, 1;
    // edges 1, 1, 1, 2, 1
    EXPECT_DOUBLE_EQ(mesh_quality(DiscreteImmersion::curve(poly)), 0.5);
    const double q = mesh_quality(shapes::icosphere(1.0, 3));
    EXPECT_GT(q, 0.5);
    EXPECT_LE(q, 1.0);
}

// ----------------------------------------------------------------------------- shapes

TEST(Shapes, BuiltinExamples)
{
    ShapeParams p;
    p.radius = 0.8;
    const auto c = builtin_shape("circle", p, 512);
    EXPECT_EQ(c.vertex_count(), 512);
    EXPECT_NEAR(squared_norms(c).maxCoeff(), 0.64, 1e-15);
    EXPECT_NEAR(squared_norms(c).minCoeff(), 0.64, 1e-15);

    p.radius = 2.0;
    p.subdivisions = 3;
    const auto s = builtin_shape("icosphere", p, 0);
    EXPECT_EQ(s.vertex_count(), 642);
    EXPECT_LT((squared_norms(s).array() - 4.0).abs().maxCoeff(), 1e-12);

    p = {};
    p.radius = 0.8;
    p.amplitude = 0.05;
    p.mode = 3;
    p.seed = 7;
    const auto a = builtin_shape("perturbed_circle", p, 256);
    const auto b = builtin_shape("perturbed_circle", p, 256);
    EXPECT_LE(squared_norms(a).maxCoeff(), 0.85 * 0.85 + 1e-15);
    EXPECT_TRUE(a.vertices() == b.vertices());
}

TEST(Shapes, BuiltinErrors)
{
    ShapeParams p;
    EXPECT_THROW(builtin_shape("circle", p, 8), invalid_config);
    EXPECT_THROW(builtin_shape("torus", p, 64), invalid_config);
    p.radius = -1.0;
    EXPECT_THROW(builtin_shape("circle", p, 64), invalid_config);
    p.radius = 1.0;
    p.amplitude = 0.1;
    EXPECT_THROW(builtin_shape("perturbed_circle", p, 64), invalid_config);
    p.subdivisions = 9;
    EXPECT_THROW(builtin_shape("icosphere", p, 0), invalid_config);
    p = {};
    p.semi_axes = {1.0};
    EXPECT_THROW(builtin_shape("ellipse", p, 64), invalid_config);
}

TEST(Shapes, ScaleToNorm)
{
    const auto e = shapes::ellipsoid(1.0, 1.15, 1.3, 2);
    const auto s = scale_to_norm2(e, 5.0, false);
    EXPECT_NEAR(squared_norms(s).minCoeff(), 5.0, 1e-12);
}
