#pragma once

#include "gaussflow/core.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

namespace gaussflow {

using Face = std::array<int, 3>;

/// Connectivity of a closed, consistently oriented triangle mesh. Shared
/// between all immersions of one flow, since the flow never remeshes.
struct SurfaceTopology {
    std::vector<Face> faces;
    std::vector<std::vector<int>> one_ring;
    std::vector<std::vector<int>> two_ring;
    std::vector<std::pair<int, int>> edges;

    static std::shared_ptr<const SurfaceTopology> build(int vertex_count, std::vector<Face> faces);
};

/// A closed polygonal curve (m = 1, implicit cyclic order) or a closed
/// triangulated surface in R^3 (m = 2). Immutable once constructed.
class DiscreteImmersion {
public:
    static DiscreteImmersion curve(VectorField vertices);
    static DiscreteImmersion surface(VectorField vertices, std::vector<Face> faces);

    /// Same connectivity, new positions. Only finiteness is checked here;
    /// geometric degeneracy surfaces from the operators.
    DiscreteImmersion with_vertices(VectorField vertices) const;

    int m() const { return m_; }
    int ambient_dim() const { return static_cast<int>(vertices_.rows()); }
    int vertex_count() const { return static_cast<int>(vertices_.cols()); }
    const VectorField& vertices() const { return vertices_; }
    auto vertex(int i) const { return vertices_.col(i); }

    bool is_curve() const { return m_ == 1; }
    const SurfaceTopology& topology() const { return *topology_; }
    const std::shared_ptr<const SurfaceTopology>& topology_ptr() const { return topology_; }

    int next(int i) const { return i + 1 == vertex_count() ? 0 : i + 1; }
    int prev(int i) const { return i == 0 ? vertex_count() - 1 : i - 1; }

private:
    DiscreteImmersion(int m, VectorField v, std::shared_ptr<const SurfaceTopology> t)
        : m_(m), vertices_(std::move(v)), topology_(std::move(t))
    {
    }

    int m_ = 1;
    VectorField vertices_;
    std::shared_ptr<const SurfaceTopology> topology_;
};

// ---------------------------------------------------------------------------
// Topology

inline std::shared_ptr<const SurfaceTopology> SurfaceTopology::build(int n, std::vector<Face> faces)
{
    if (faces.size() < 4)
        throw invalid_mesh("a closed surface needs at least 4 faces");
    for (const auto& f : faces) {
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0 || f[k] >= n)
                throw invalid_mesh("face references vertex " + std::to_string(f[k]) + " out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw invalid_mesh("face with repeated vertex");
    }

    // undirected edge -> incident faces
    std::map<std::pair<int, int>, std::vector<int>> edge_faces;
    for (int fi = 0; fi < static_cast<int>(faces.size()); ++fi)
        for (int k = 0; k < 3; ++k) {
            int a = faces[fi][k], b = faces[fi][(k + 1) % 3];
            edge_faces[{std::min(a, b), std::max(a, b)}].push_back(fi);
        }
    for (const auto& [e, fs] : edge_faces)
        if (fs.size() != 2)
            throw invalid_mesh("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                               ") is shared by " + std::to_string(fs.size()) + " faces; surface is not closed");

    // Reorient faces consistently by flood fill; fail if non-orientable.
    auto has_directed = [](const Face& f, int a, int b) {
        for (int k = 0; k < 3; ++k)
            if (f[k] == a && f[(k + 1) % 3] == b)
                return true;
        return false;
    };
    std::vector<int> state(faces.size(), 0); // 0 unvisited, 1 visited
    for (std::size_t seed = 0; seed < faces.size(); ++seed) {
        if (state[seed])
            continue;
        state[seed] = 1;
        std::queue<int> q;
        q.push(static_cast<int>(seed));
        while (!q.empty()) {
            int fi = q.front();
            q.pop();
            for (int k = 0; k < 3; ++k) {
                int a = faces[fi][k], b = faces[fi][(k + 1) % 3];
                const auto& fs = edge_faces[{std::min(a, b), std::max(a, b)}];
                int other = fs[0] == fi ? fs[1] : fs[0];
                // consistent neighbour traverses the shared edge as b -> a
                bool consistent = has_directed(faces[other], b, a);
                if (!state[other]) {
                    if (!consistent)
                        std::swap(faces[other][1], faces[other][2]);
                    state[other] = 1;
                    q.push(other);
                } else if (!consistent) {
                    throw invalid_mesh("surface is not orientable");
                }
            }
        }
    }

    auto topo = std::make_shared<SurfaceTopology>();
    topo->one_ring.assign(n, {});
    for (const auto& [e, fs] : edge_faces) {
        topo->edges.push_back(e);
        topo->one_ring[e.first].push_back(e.second);
        topo->one_ring[e.second].push_back(e.first);
    }
    for (int i = 0; i < n; ++i) {
        auto& r = topo->one_ring[i];
        if (r.empty())
            throw invalid_mesh("vertex " + std::to_string(i) + " is not referenced by any face");
        std::sort(r.begin(), r.end());
    }
    topo->two_ring.assign(n, {});
    for (int i = 0; i < n; ++i) {
        std::vector<int> ring = topo->one_ring[i];
        for (int j : topo->one_ring[i])
            ring.insert(ring.end(), topo->one_ring[j].begin(), topo->one_ring[j].end());
        std::sort(ring.begin(), ring.end());
        ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
        ring.erase(std::remove(ring.begin(), ring.end(), i), ring.end());
        topo->two_ring[i] = std::move(ring);
    }
    topo->faces = std::move(faces);
    return topo;
}

// ---------------------------------------------------------------------------
// Construction

inline DiscreteImmersion DiscreteImmersion::curve(VectorField v)
{
    if (v.rows() < 2)
        throw invalid_mesh("curves need an ambient dimension of at least 2");
    if (v.cols() < 4)
        throw invalid_mesh("closed curves need at least 4 vertices");
    if (!v.allFinite())
        throw invalid_mesh("non-finite vertex coordinates");
    for (Eigen::Index i = 0; i < v.cols(); ++i) {
        Eigen::Index j = (i + 1) % v.cols();
        if ((v.col(j) - v.col(i)).norm() <= kDegenerateTolerance)
            throw degenerate_mesh("consecutive curve vertices " + std::to_string(i) + " and " +
                                  std::to_string(j) + " coincide");
    }
    return DiscreteImmersion(1, std::move(v), nullptr);
}

inline DiscreteImmersion DiscreteImmersion::surface(VectorField v, std::vector<Face> faces)
{
    if (v.rows() != 3)
        throw invalid_mesh("surfaces are supported in R^3 only");
    if (!v.allFinite())
        throw invalid_mesh("non-finite vertex coordinates");
    auto topo = SurfaceTopology::build(static_cast<int>(v.cols()), std::move(faces));
    for (const auto& f : topo->faces) {
        const Eigen::Vector3d p0 = v.col(f[0]), p1 = v.col(f[1]), p2 = v.col(f[2]);
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        if (area <= kDegenerateTolerance)
            throw degenerate_mesh("degenerate triangle");
    }
    return DiscreteImmersion(2, std::move(v), std::move(topo));
}

inline DiscreteImmersion DiscreteImmersion::with_vertices(VectorField v) const
{
    if (v.rows() != vertices_.rows() || v.cols() != vertices_.cols())
        throw invalid_mesh("vertex array shape changed");
    if (!v.allFinite())
        throw degenerate_mesh("non-finite vertex coordinates");
    return DiscreteImmersion(m_, std::move(v), topology_);
}

// ---------------------------------------------------------------------------
// Elementary geometry

inline ScalarField squared_norms(const DiscreteImmersion& s)
{
    return s.vertices().colwise().squaredNorm().transpose();
}

/// Curve edge lengths; edge i joins vertex i to vertex i+1.
inline ScalarField curve_edge_lengths(const DiscreteImmersion& s)
{
    const int n = s.vertex_count();
    ScalarField len(n);
    for (int i = 0; i < n; ++i) {
        len[i] = (s.vertex(s.next(i)) - s.vertex(i)).norm();
        if (!(len[i] > kDegenerateTolerance))
            throw degenerate_mesh("curve edge " + std::to_string(i) + " has vanishing length");
    }
    return len;
}

inline std::pair<double, double> edge_length_range(const DiscreteImmersion& s)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    if (s.is_curve()) {
        for (int i = 0; i < s.vertex_count(); ++i) {
            double l = (s.vertex(s.next(i)) - s.vertex(i)).norm();
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
    } else {
        for (const auto& [a, b] : s.topology().edges) {
            double l = (s.vertex(a) - s.vertex(b)).norm();
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
    }
    return {lo, hi};
}

namespace detail {

/// Cotangent weights (one per undirected edge, keyed by face corner) and
/// mixed Voronoi areas for a triangle mesh.
struct CotanData {
    // per face: cot of the angle at corner k, which faces edge (k+1, k+2)
    std::vector<std::array<double, 3>> cot;
    ScalarField area;
};

inline CotanData cotan_data(const DiscreteImmersion& s)
{
    const auto& faces = s.topology().faces;
    CotanData d;
    d.cot.resize(faces.size());
    d.area = ScalarField::Zero(s.vertex_count());
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        Eigen::Vector3d p[3] = {s.vertex(f[0]), s.vertex(f[1]), s.vertex(f[2])};
        const double twice_area = (p[1] - p[0]).cross(p[2] - p[0]).norm();
        if (!(0.5 * twice_area > kDegenerateTolerance))
            throw degenerate_mesh("triangle " + std::to_string(fi) + " has vanishing area");
        bool obtuse_at[3];
        bool any_obtuse = false;
        for (int k = 0; k < 3; ++k) {
            Eigen::Vector3d u = p[(k + 1) % 3] - p[k], w = p[(k + 2) % 3] - p[k];
            const double dot = u.dot(w);
            d.cot[fi][k] = dot / twice_area;
            obtuse_at[k] = dot < 0.0;
            any_obtuse = any_obtuse || obtuse_at[k];
        }
        const double area = 0.5 * twice_area;
        for (int k = 0; k < 3; ++k) {
            int i = f[k];
            if (!any_obtuse) {
                // Voronoi region: edges to the two other corners, each weighted by the
                // cotangent of the angle opposite that edge.
                const int j = (k + 1) % 3, l = (k + 2) % 3;
                d.area[i] += ((p[j] - p[k]).squaredNorm() * d.cot[fi][l] +
                              (p[l] - p[k]).squaredNorm() * d.cot[fi][j]) /
                             8.0;
            } else if (obtuse_at[k]) {
                d.area[i] += area / 2.0;
            } else {
                d.area[i] += area / 4.0;
            }
        }
    }
    return d;
}

/// Apply sum_j w_ij (f_j - f_i) to the columns of `values` (rows = components).
inline Eigen::MatrixXd cotan_apply(const DiscreteImmersion& s, const CotanData& d,
                                   const Eigen::MatrixXd& values)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(values.rows(), values.cols());
    const auto& faces = s.topology().faces;
    for (std::size_t fi = 0; fi < faces.size(); ++fi) {
        const auto& f = faces[fi];
        for (int k = 0; k < 3; ++k) {
            const int i = f[(k + 1) % 3], j = f[(k + 2) % 3];
            const double w = 0.5 * d.cot[fi][k];
            out.col(i) += w * (values.col(j) - values.col(i));
            out.col(j) += w * (values.col(i) - values.col(j));
        }
    }
    return out;
}

/// Curve second difference with edge-length weights applied to the columns of `values`.
inline Eigen::MatrixXd curve_laplacian(const DiscreteImmersion& s, const ScalarField& len,
                                       const Eigen::MatrixXd& values)
{
    const int n = s.vertex_count();
    Eigen::MatrixXd out(values.rows(), n);
    for (int i = 0; i < n; ++i) {
        const int ip = s.next(i), im = s.prev(i);
        const double l_prev = len[im], l_next = len[i];
        out.col(i) = (2.0 / (l_prev + l_next)) *
                     ((values.col(ip) - values.col(i)) / l_next - (values.col(i) - values.col(im)) / l_prev);
    }
    return out;
}

} // namespace detail

/// Vertex areas: half the incident edge lengths for curves, mixed Voronoi
/// areas for surfaces.
inline ScalarField vertex_areas(const DiscreteImmersion& s)
{
    if (s.is_curve()) {
        const ScalarField len = curve_edge_lengths(s);
        ScalarField a(s.vertex_count());
        for (int i = 0; i < s.vertex_count(); ++i)
            a[i] = 0.5 * (len[s.prev(i)] + len[i]);
        return a;
    }
    return detail::cotan_data(s).area;
}

/// Length of a curve or area of a surface.
inline double total_area(const DiscreteImmersion& s)
{
    if (s.is_curve())
        return curve_edge_lengths(s).sum();
    double area = 0.0;
    for (const auto& f : s.topology().faces) {
        const Eigen::Vector3d p0 = s.vertex(f[0]), p1 = s.vertex(f[1]), p2 = s.vertex(f[2]);
        area += 0.5 * (p1 - p0).cross(p2 - p0).norm();
    }
    return area;
}

// ---------------------------------------------------------------------------
// Laplacian-based operators

/// Discrete mean curvature vector H = Delta_g F.
inline VectorField mean_curvature_vector(const DiscreteImmersion& s)
{
    if (s.is_curve())
        return detail::curve_laplacian(s, curve_edge_lengths(s), s.vertices());
    const auto d = detail::cotan_data(s);
    VectorField H = detail::cotan_apply(s, d, s.vertices());
    for (int i = 0; i < s.vertex_count(); ++i)
        H.col(i) /= d.area[i];
    return H;
}

/// Discrete Laplace-Beltrami of a scalar field, with the same weights as
/// mean_curvature_vector.
inline ScalarField laplace_beltrami(const DiscreteImmersion& s, const ScalarField& f)
{
    if (f.size() != s.vertex_count())
        throw invalid_config("scalar field length does not match the vertex count");
    if (!f.allFinite())
        throw domain_error("scalar field has non-finite entries");
    const Eigen::MatrixXd row = f.transpose();
    if (s.is_curve())
        return detail::curve_laplacian(s, curve_edge_lengths(s), row).row(0).transpose();
    const auto d = detail::cotan_data(s);
    ScalarField out = detail::cotan_apply(s, d, row).row(0).transpose();
    return out.cwiseQuotient(d.area);
}

// ---------------------------------------------------------------------------
// Local quadric fit (surfaces)

/// Per-vertex differential geometry from a local fit.
struct FittedCurvature {
    VectorField H;       ///< mean curvature vector
    ScalarField h2;      ///< |h|^2, sum of squared principal curvatures
    VectorField normal;  ///< unit normal (surfaces only; empty for curves)
};

namespace detail {

struct QuadricFitResult {
    Eigen::Vector3d normal;
    Eigen::Vector3d H;
    double h2;
};

/// Fit an implicit quadric q^T A q + b^T q = 0 through vertex i (placed at the
/// origin) and its 2-ring, minimising the algebraic residual subject to
/// |b| = 1. Points on any quadric, spheres in particular, are reproduced
/// exactly, so the curvature of an inscribed sphere mesh is exact at every
/// vertex. Curvature is read off at the vertex itself.
inline QuadricFitResult quadric_fit(const DiscreteImmersion& s, int i)
{
    const auto& ring = s.topology().two_ring[i];
    const auto& one = s.topology().one_ring[i];
    const int N = static_cast<int>(ring.size());
    if (N < 9)
        throw degenerate_mesh("vertex " + std::to_string(i) + " has fewer than 9 neighbours within two rings");

    const Eigen::Vector3d c = s.vertex(i);
    double scale = 0.0;
    for (int j : one)
        scale += (s.vertex(j) - c).norm();
    scale /= static_cast<double>(one.size());
    if (!(scale > kDegenerateTolerance))
        throw degenerate_mesh("vertex " + std::to_string(i) + " has collapsed neighbourhood");

    // rows: N samples plus 6 ridge rows on the quadratic block
    Eigen::Matrix<double, Eigen::Dynamic, 9> M(N + 6, 9);
    for (int r = 0; r < N; ++r) {
        const Eigen::Vector3d q = (s.vertex(ring[r]) - c) / scale;
        M.row(r) << q.x() * q.x(), q.y() * q.y(), q.z() * q.z(), q.x() * q.y(), q.x() * q.z(),
            q.y() * q.z(), q.x(), q.y(), q.z();
    }
    const double ridge = 1e-9 * M.topLeftCorner(N, 6).norm();
    M.bottomRows(6).setZero();
    M.block(N, 0, 6, 6).diagonal().setConstant(ridge);

    const auto Ma = M.leftCols<6>();
    const auto Mb = M.rightCols<3>();
    Eigen::HouseholderQR<Eigen::Matrix<double, Eigen::Dynamic, 6>> qr(Ma);
    const Eigen::Matrix<double, Eigen::Dynamic, 3> QtMb = qr.householderQ().transpose() * Mb;
    const Eigen::Matrix3d tail = QtMb.bottomRows(N).transpose() * QtMb.bottomRows(N);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(tail);
    const Eigen::Vector3d b = eig.eigenvectors().col(0);
    const Eigen::Matrix<double, 6, 6> R = qr.matrixQR().topRows<6>().triangularView<Eigen::Upper>();
    const Eigen::Matrix<double, 6, 1> a =
        -R.triangularView<Eigen::Upper>().solve(QtMb.topRows<6>() * b);

    Eigen::Matrix3d A;
    A << a[0], 0.5 * a[3], 0.5 * a[4], 0.5 * a[3], a[1], 0.5 * a[5], 0.5 * a[4], 0.5 * a[5], a[2];
    const double bn = b.norm();
    const Eigen::Vector3d n = b / bn;
    const Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - n * n.transpose();
    const Eigen::Matrix3d W = P * (2.0 * A) * P / bn;

    QuadricFitResult out;
    out.normal = n;
    out.H = -(W.trace() / scale) * n;
    out.h2 = W.squaredNorm() / (scale * scale);
    return out;
}

} // namespace detail

/// Mean curvature vector, |h|^2 and normals from the local quadric fit for
/// surfaces; the edge-length-weighted formulas for curves.
inline FittedCurvature fitted_curvature(const DiscreteImmersion& s)
{
    FittedCurvature out;
    if (s.is_curve()) {
        out.H = mean_curvature_vector(s);
        out.h2 = out.H.colwise().squaredNorm().transpose();
        return out;
    }
    const int n = s.vertex_count();
    out.H.resize(3, n);
    out.h2.resize(n);
    out.normal.resize(3, n);
    for (int i = 0; i < n; ++i) {
        const auto r = detail::quadric_fit(s, i);
        out.H.col(i) = r.H;
        out.h2[i] = r.h2;
        out.normal.col(i) = r.normal;
    }
    return out;
}

/// Per-vertex |h|^2: kappa^2 = |H|^2 for curves, sum of squared principal
/// curvatures from the quadric fit for surfaces.
inline ScalarField second_fundamental_norm(const DiscreteImmersion& s)
{
    return fitted_curvature(s).h2;
}

// ---------------------------------------------------------------------------
// Tangent spaces and normal projection

/// Orthonormal tangent basis at vertex i, one column per tangent direction.
inline Eigen::MatrixXd tangent_basis(const DiscreteImmersion& s, int i,
                                     const VectorField* surface_normals = nullptr)
{
    if (s.is_curve()) {
        AmbientVector t = s.vertex(s.next(i)) - s.vertex(s.prev(i));
        const double len = t.norm();
        if (!(len > kDegenerateTolerance))
            throw degenerate_mesh("central-difference tangent vanishes at vertex " + std::to_string(i));
        return t / len;
    }
    Eigen::Vector3d n = surface_normals ? Eigen::Vector3d(surface_normals->col(i))
                                        : detail::quadric_fit(s, i).normal;
    // any vector not parallel to n seeds the basis
    Eigen::Vector3d seed = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
    Eigen::Vector3d t1 = (seed - seed.dot(n) * n).normalized();
    Eigen::Vector3d t2 = n.cross(t1);
    t2 -= t2.dot(n) * n + t2.dot(t1) * t1;
    t2.normalize();
    Eigen::MatrixXd T(3, 2);
    T.col(0) = t1;
    T.col(1) = t2;
    return T;
}

/// Component of each vertex vector normal to the discrete tangent space.
inline VectorField normal_projection(const DiscreteImmersion& s, const VectorField& v,
                                     const VectorField* surface_normals = nullptr)
{
    if (v.rows() != s.ambient_dim() || v.cols() != s.vertex_count())
        throw invalid_config("vector field shape does not match the immersion");
    if (!v.allFinite())
        throw domain_error("vector field has non-finite entries");
    VectorField fitted_normals;
    if (!s.is_curve() && !surface_normals) {
        fitted_normals = fitted_curvature(s).normal;
        surface_normals = &fitted_normals;
    }
    VectorField out(v.rows(), v.cols());
    for (int i = 0; i < s.vertex_count(); ++i) {
        const Eigen::MatrixXd T = tangent_basis(s, i, surface_normals);
        AmbientVector w = v.col(i);
        // two passes of modified Gram-Schmidt keep the residual tangent part at roundoff
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < T.cols(); ++k)
                w -= T.col(k).dot(w) * T.col(k);
        out.col(i) = w;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scalar summaries

/// Gaussian-weighted volume of the piecewise-linear immersion, the integral
/// of e^{-|x|^2/2} over its edges (exact) or faces (7-point degree-5 rule).
inline double weighted_area(const DiscreteImmersion& s)
{
    double total = 0.0;
    if (s.is_curve()) {
        const double r2 = std::sqrt(2.0);
        for (int i = 0; i < s.vertex_count(); ++i) {
            const auto a = s.vertex(i);
            const AmbientVector d = s.vertex(s.next(i)) - a;
            const double L2 = d.squaredNorm();
            if (!(L2 > 0.0))
                throw degenerate_mesh("zero-length edge at vertex " + std::to_string(i));
            const double L = std::sqrt(L2), s0 = a.dot(d) / L2;
            const double perp2 = std::max(0.0, a.squaredNorm() - s0 * s0 * L2);
            total += std::exp(-0.5 * perp2) * std::sqrt(0.5 * std::numbers::pi) *
                     (std::erf(L * (1.0 + s0) / r2) - std::erf(L * s0 / r2));
        }
        return total;
    }
    // barycentric (a, b, b) orbits with their weights
    static constexpr std::array<std::array<double, 3>, 3> rule{{
        {1.0 / 3.0, 1.0 / 3.0, 0.225},
        {0.059715871789769820, 0.47014206410511509, 0.13239415278850618},
        {0.79742698535308732, 0.10128650732345634, 0.12593918054482715},
    }};
    for (const auto& f : s.topology().faces) {
        const Eigen::Vector3d p0 = s.vertex(f[0]), p1 = s.vertex(f[1]), p2 = s.vertex(f[2]);
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        double sum = 0.0;
        for (const auto& [wa, wb, w] : rule) {
            if (wa == wb) {
                sum += w * std::exp(-0.5 * ((p0 + p1 + p2) / 3.0).squaredNorm());
                continue;
            }
            sum += w *
                   (std::exp(-0.5 * (wa * p0 + wb * p1 + wb * p2).squaredNorm()) +
                    std::exp(-0.5 * (wb * p0 + wa * p1 + wb * p2).squaredNorm()) +
                    std::exp(-0.5 * (wb * p0 + wb * p1 + wa * p2).squaredNorm()));
        }
        total += area * sum;
    }
    return total;
}

/// Regularity proxy in [0, 1]: min/max edge length for curves, the worst
/// normalised inradius/circumradius ratio over faces for surfaces.
inline double mesh_quality(const DiscreteImmersion& s)
{
    if (s.is_curve()) {
        auto [lo, hi] = edge_length_range(s);
        if (!(hi > 0.0) || !std::isfinite(lo) || !std::isfinite(hi))
            return 0.0;
        return lo / hi;
    }
    double worst = 1.0;
    for (const auto& f : s.topology().faces) {
        const Eigen::Vector3d p0 = s.vertex(f[0]), p1 = s.vertex(f[1]), p2 = s.vertex(f[2]);
        const double a = (p1 - p2).norm(), b = (p0 - p2).norm(), c = (p0 - p1).norm();
        const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
        if (!(area > 0.0) || !(a * b * c > 0.0))
            return 0.0;
        const double inradius = 2.0 * area / (a + b + c);
        const double circumradius = a * b * c / (4.0 * area);
        worst = std::min(worst, 2.0 * inradius / circumradius);
    }
    return std::clamp(worst, 0.0, 1.0);
}

} // namespace gaussflow
