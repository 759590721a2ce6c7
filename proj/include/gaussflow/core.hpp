#pragma once

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <string>
#include <system_error>

namespace gaussflow {

/// A point or vector of the ambient Euclidean space.
using AmbientVector = Eigen::VectorXd;

/// Vertex positions or per-vertex vectors, one column per vertex.
using VectorField = Eigen::MatrixXd;

/// One scalar per vertex.
using ScalarField = Eigen::VectorXd;

/// Largest exponent fed to std::exp before a run is declared a position blow-up.
/// binary64 overflows near e^709.
inline constexpr double kExponentGuard = 700.0;

/// Lengths and areas below this are treated as degenerate.
inline constexpr double kDegenerateTolerance = 1e-12;

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define GAUSSFLOW_DEFINE_ERROR(name)                  \
    class name : public error {                       \
    public:                                           \
        using error::error;                           \
    };

GAUSSFLOW_DEFINE_ERROR(axis_error)
GAUSSFLOW_DEFINE_ERROR(unsupported_param)
GAUSSFLOW_DEFINE_ERROR(overflow_guard)
GAUSSFLOW_DEFINE_ERROR(degenerate_mesh)
GAUSSFLOW_DEFINE_ERROR(invalid_mesh)
GAUSSFLOW_DEFINE_ERROR(timestep_underflow)
GAUSSFLOW_DEFINE_ERROR(invalid_config)
GAUSSFLOW_DEFINE_ERROR(insufficient_snapshots)
GAUSSFLOW_DEFINE_ERROR(mismatched_times)
GAUSSFLOW_DEFINE_ERROR(domain_error)
GAUSSFLOW_DEFINE_ERROR(hypothesis_violated)
GAUSSFLOW_DEFINE_ERROR(io_error)

#undef GAUSSFLOW_DEFINE_ERROR

/// exp(x) with the position blow-up guard applied.
inline double guarded_exp(double x)
{
    if (!(x < kExponentGuard))
        throw overflow_guard("conformal exponent " + std::to_string(x) + " exceeds guard " +
                             std::to_string(kExponentGuard));
    return std::exp(x);
}

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc())
        throw io_error("cannot format number");
    return std::string(buf, res.ptr);
}

/// Strict parse of a whole token as a double.
inline double parse_double(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw invalid_config("not a number: '" + std::string(s) + "'");
    return v;
}

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m)
{
    return m.allFinite();
}

} // namespace gaussflow
