#pragma once

#include "gaussflow/core.hpp"

#include <string>

namespace gaussflow {

/// R^{dim_total} with the conformal metric e^{-a|x|^2/m} times the flat metric.
/// a = 1 is the standard Gaussian space.
struct GaussianAmbient {
    int dim_total = 3;
    int m = 2;
    double a = 1.0;

    GaussianAmbient() = default;
    GaussianAmbient(int dim_total_, int m_, double a_ = 1.0) : dim_total(dim_total_), m(m_), a(a_)
    {
        if (m < 1)
            throw invalid_config("intrinsic dimension m must be >= 1");
        if (dim_total < m + 1 || dim_total < 2)
            throw invalid_config("ambient dimension must be >= m+1 and >= 2");
        if (!(a > 0.0) || !std::isfinite(a))
            throw invalid_config("conformal exponent a must be positive");
    }
};

/// Sectional curvature of the coordinate 2-plane e_A ^ e_B at x.
///
///   K(e_A, e_B) = (1/m) e^{|x|^2/m} (2 - (1/m) sum_{C != A,B} (x^C)^2)
///
/// Only the a = 1 metric is supported.
inline double sectional_curvature(const GaussianAmbient& ambient, const AmbientVector& x, int A, int B)
{
    if (A == B)
        throw axis_error("section axes must differ");
    if (A < 0 || B < 0 || A >= ambient.dim_total || B >= ambient.dim_total)
        throw axis_error("axis index out of range [0, " + std::to_string(ambient.dim_total) + ")");
    if (ambient.a != 1.0)
        throw unsupported_param("sectional curvature is only available for a = 1");
    if (x.size() != ambient.dim_total)
        throw axis_error("point has " + std::to_string(x.size()) + " components, expected " +
                         std::to_string(ambient.dim_total));
    if (!x.allFinite())
        throw domain_error("point has non-finite components");

    const double m = ambient.m;
    double transverse = 0.0;
    for (int C = 0; C < ambient.dim_total; ++C)
        if (C != A && C != B)
            transverse += x[C] * x[C];
    const double conformal = guarded_exp(x.squaredNorm() / m);
    return conformal / m * (2.0 - transverse / m);
}

/// Mean curvature with respect to the conformal metric, e^{a F2/m} (H + F_perp).
inline AmbientVector gaussian_mean_curvature(const GaussianAmbient& ambient, const AmbientVector& H,
                                             const AmbientVector& F_perp, double F2)
{
    if (!(F2 >= 0.0) || !std::isfinite(F2))
        throw domain_error("|F|^2 must be finite and nonnegative");
    if (H.size() != F_perp.size())
        throw axis_error("H and F_perp dimensions differ");
    const double factor = guarded_exp(ambient.a * F2 / ambient.m);
    if (F2 == 0.0)
        return H + F_perp;
    return factor * (H + F_perp);
}

} // namespace gaussflow
