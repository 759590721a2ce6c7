#pragma once

#include "gaussflow/mesh.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace gaussflow::io {

namespace detail {

inline std::vector<std::string> tokens(const std::string& line)
{
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t)
        out.push_back(t);
    return out;
}

inline std::string strip_comment(std::string line)
{
    auto pos = line.find('#');
    if (pos != std::string::npos)
        line.erase(pos);
    return line;
}

inline double to_double(const std::string& t, const std::string& where)
{
    try {
        return parse_double(t);
    } catch (const invalid_config&) {
        throw io_error(where + ": bad number '" + t + "'");
    }
}

inline int to_int(const std::string& t, const std::string& where)
{
    int v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw io_error(where + ": bad integer '" + t + "'");
    return v;
}

inline std::ifstream open_in(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path.string());
    return in;
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot write " + path.string());
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// OFF

inline DiscreteImmersion read_off(std::istream& in, const std::string& name = "OFF")
{
    std::vector<std::string> toks;
    std::string line;
    while (std::getline(in, line)) {
        auto t = detail::tokens(detail::strip_comment(line));
        toks.insert(toks.end(), t.begin(), t.end());
    }
    std::size_t pos = 0;
    auto next = [&]() -> const std::string& {
        if (pos >= toks.size())
            throw io_error(name + ": unexpected end of file");
        return toks[pos++];
    };
    if (next() != "OFF")
        throw io_error(name + ": missing OFF header");
    const int nv = detail::to_int(next(), name);
    const int nf = detail::to_int(next(), name);
    detail::to_int(next(), name); // edge count, unused
    if (nv < 0 || nf < 0)
        throw io_error(name + ": negative element count");
    VectorField v(3, nv);
    for (int i = 0; i < nv; ++i)
        for (int k = 0; k < 3; ++k)
            v(k, i) = detail::to_double(next(), name);
    std::vector<Face> faces;
    faces.reserve(nf);
    for (int f = 0; f < nf; ++f) {
        const int arity = detail::to_int(next(), name);
        if (arity < 3)
            throw io_error(name + ": face with fewer than 3 vertices");
        std::vector<int> poly(arity);
        for (auto& idx : poly)
            idx = detail::to_int(next(), name);
        for (int k = 1; k + 1 < arity; ++k)
            faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
    if (pos != toks.size())
        throw io_error(name + ": trailing data after faces");
    return DiscreteImmersion::surface(std::move(v), std::move(faces));
}

inline void write_off(std::ostream& out, const DiscreteImmersion& s)
{
    if (s.is_curve())
        throw io_error("OFF holds surfaces only");
    const auto& faces = s.topology().faces;
    out << "OFF\n" << s.vertex_count() << ' ' << faces.size() << " 0\n";
    for (int i = 0; i < s.vertex_count(); ++i)
        out << format_double(s.vertex(i)[0]) << ' ' << format_double(s.vertex(i)[1]) << ' '
            << format_double(s.vertex(i)[2]) << '\n';
    for (const auto& f : faces)
        out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

// ---------------------------------------------------------------------------
// OBJ (vertices and faces only; texture/normal references are ignored)

inline DiscreteImmersion read_obj(std::istream& in, const std::string& name = "OBJ")
{
    std::vector<Eigen::Vector3d> pts;
    std::vector<Face> faces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = name + ":" + std::to_string(lineno);
        auto t = detail::tokens(detail::strip_comment(line));
        if (t.empty())
            continue;
        if (t[0] == "v") {
            if (t.size() < 4)
                throw io_error(where + ": vertex needs 3 coordinates");
            pts.emplace_back(detail::to_double(t[1], where), detail::to_double(t[2], where),
                             detail::to_double(t[3], where));
        } else if (t[0] == "f") {
            if (t.size() < 4)
                throw io_error(where + ": face needs 3 vertices");
            std::vector<int> poly;
            for (std::size_t k = 1; k < t.size(); ++k) {
                const std::string ref = t[k].substr(0, t[k].find('/'));
                int idx = detail::to_int(ref, where);
                if (idx < 0)
                    idx = static_cast<int>(pts.size()) + idx; // relative reference
                else
                    idx -= 1;
                poly.push_back(idx);
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k)
                faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
    }
    VectorField v(3, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i)
        v.col(static_cast<Eigen::Index>(i)) = pts[i];
    return DiscreteImmersion::surface(std::move(v), std::move(faces));
}

inline void write_obj(std::ostream& out, const DiscreteImmersion& s)
{
    if (s.is_curve())
        throw io_error("OBJ export holds surfaces only");
    for (int i = 0; i < s.vertex_count(); ++i)
        out << "v " << format_double(s.vertex(i)[0]) << ' ' << format_double(s.vertex(i)[1]) << ' '
            << format_double(s.vertex(i)[2]) << '\n';
    for (const auto& f : s.topology().faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
}

// ---------------------------------------------------------------------------
// PLINE: one vertex per line, whitespace-separated coordinates, implicit closure.

inline DiscreteImmersion read_pline(std::istream& in, const std::string& name = "PLINE")
{
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto t = detail::tokens(detail::strip_comment(line));
        if (t.empty())
            continue;
        const std::string where = name + ":" + std::to_string(lineno);
        if (!rows.empty() && t.size() != rows.front().size())
            throw io_error(where + ": inconsistent coordinate count");
        std::vector<double> row;
        for (const auto& tok : t)
            row.push_back(detail::to_double(tok, where));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw io_error(name + ": no vertices");
    VectorField v(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            v(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = rows[i][k];
    return DiscreteImmersion::curve(std::move(v));
}

inline void write_pline(std::ostream& out, const DiscreteImmersion& s)
{
    if (!s.is_curve())
        throw io_error("PLINE holds curves only");
    for (int i = 0; i < s.vertex_count(); ++i) {
        for (int k = 0; k < s.ambient_dim(); ++k) {
            if (k)
                out << ' ';
            out << format_double(s.vertex(i)[k]);
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Files, dispatched on extension (.off, .obj, .pline)

inline DiscreteImmersion read_mesh(const std::filesystem::path& path)
{
    auto in = detail::open_in(path);
    const auto ext = path.extension().string();
    if (ext == ".off" || ext == ".OFF")
        return read_off(in, path.string());
    if (ext == ".obj" || ext == ".OBJ")
        return read_obj(in, path.string());
    if (ext == ".pline" || ext == ".PLINE")
        return read_pline(in, path.string());
    throw io_error("unknown mesh extension '" + ext + "' (expected .off, .obj or .pline)");
}

inline void write_mesh(const std::filesystem::path& path, const DiscreteImmersion& s)
{
    auto out = detail::open_out(path);
    const auto ext = path.extension().string();
    if (ext == ".off" || ext == ".OFF")
        write_off(out, s);
    else if (ext == ".obj" || ext == ".OBJ")
        write_obj(out, s);
    else if (ext == ".pline" || ext == ".PLINE")
        write_pline(out, s);
    else
        throw io_error("unknown mesh extension '" + ext + "'");
    if (!out)
        throw io_error("write failed: " + path.string());
}

/// Conventional snapshot extension for an immersion.
inline const char* snapshot_extension(const DiscreteImmersion& s)
{
    return s.is_curve() ? ".pline" : ".off";
}

} // namespace gaussflow::io
