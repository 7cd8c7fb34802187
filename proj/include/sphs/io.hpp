#pragma once

// Text formats: mesh files, matrix triplet dumps, dual dumps, trajectories and
// key = value model files.
//
// Mesh file grammar ('#' starts a comment, blank lines ignored):
//   dimension <1|2>
//   vertices <count>
//   <x> [<y>]            one row per vertex; 1D rows have one coordinate
//   cells <count>
//   <i0> <i1> [<i2>]     one row per top cell, vertex indices are 0-based

#include "sphs/dual.hpp"
#include "sphs/errors.hpp"
#include "sphs/mesh.hpp"
#include "sphs/operators.hpp"
#include "sphs/phs.hpp"

#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace sphs {

/// Shortest round-trip formatting, identical across runs.
inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

/// Splits a line into whitespace-separated tokens after stripping comments.
inline std::vector<std::string> tokens(const std::string& line)
{
    const std::string body = line.substr(0, line.find('#'));
    std::istringstream in(body);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

inline double to_double(const std::string& s, int line)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + s + "'", line);
    }
    if (used != s.size() || !std::isfinite(v)) {
        throw ParseError("expected a finite number, got '" + s + "'", line);
    }
    return v;
}

inline long to_int(const std::string& s, int line)
{
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(s, &used);
    } catch (const std::exception&) {
        throw ParseError("expected an integer, got '" + s + "'", line);
    }
    if (used != s.size()) {
        throw ParseError("expected an integer, got '" + s + "'", line);
    }
    return v;
}

} // namespace detail

// ---------------------------------------------------------------- meshes

struct MeshData {
    int dimension = 0;
    std::vector<Point> vertices;
    std::vector<Simplex> cells;
};

inline MeshData parse_mesh_data(std::istream& in)
{
    std::vector<std::pair<int, std::vector<std::string>>> rows;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto t = detail::tokens(line);
        if (!t.empty()) {
            rows.emplace_back(number, std::move(t));
        }
    }
    if (rows.empty()) {
        throw ParseError("empty mesh file", 0);
    }
    std::size_t r = 0;
    const auto header = [&](const char* key) -> long {
        if (r >= rows.size()) {
            throw ParseError(std::string("missing '") + key + "' section", number);
        }
        const auto& [ln, t] = rows[r];
        if (t.size() != 2 || t[0] != key) {
            throw ParseError(std::string("expected '") + key + " <count>'", ln);
        }
        ++r;
        const long v = detail::to_int(t[1], ln);
        if (v < 0) {
            throw ParseError(std::string(key) + " must be non-negative", ln);
        }
        return v;
    };

    MeshData m;
    const long dim = header("dimension");
    if (dim != 1 && dim != 2) {
        throw ParseError("dimension must be 1 or 2", rows[0].first);
    }
    m.dimension = static_cast<int>(dim);
    const long nv = header("vertices");
    for (long i = 0; i < nv; ++i, ++r) {
        if (r >= rows.size()) {
            throw ParseError("expected " + std::to_string(nv) + " vertex rows", number);
        }
        const auto& [ln, t] = rows[r];
        if (static_cast<long>(t.size()) != dim) {
            throw ParseError("vertex row needs " + std::to_string(dim) + " coordinate(s)", ln);
        }
        m.vertices.emplace_back(detail::to_double(t[0], ln), dim == 2 ? detail::to_double(t[1], ln) : 0.0);
    }
    const long nc = header("cells");
    for (long i = 0; i < nc; ++i, ++r) {
        if (r >= rows.size()) {
            throw ParseError("expected " + std::to_string(nc) + " cell rows", number);
        }
        const auto& [ln, t] = rows[r];
        if (static_cast<long>(t.size()) != dim + 1) {
            throw ParseError("cell row needs " + std::to_string(dim + 1) + " vertex indices", ln);
        }
        Simplex s;
        for (const auto& tok : t) {
            const long v = detail::to_int(tok, ln);
            if (v < 0 || v >= nv) {
                throw ParseError("vertex index " + tok + " out of range", ln);
            }
            s.push_back(static_cast<int>(v));
        }
        m.cells.push_back(std::move(s));
    }
    if (r != rows.size()) {
        throw ParseError("unexpected content after the cells section", rows[r].first);
    }
    return m;
}

inline SimplicialComplex parse_mesh(std::istream& in)
{
    MeshData m = parse_mesh_data(in);
    return build_complex(m.dimension, std::move(m.vertices), std::move(m.cells));
}

inline std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'", 0);
    }
    return in;
}

inline MeshData read_mesh_data(const std::string& path)
{
    std::ifstream in = open_input(path);
    try {
        return parse_mesh_data(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

inline SimplicialComplex read_mesh(const std::string& path)
{
    MeshData m = read_mesh_data(path);
    return build_complex(m.dimension, std::move(m.vertices), std::move(m.cells));
}

/// Writes K in the mesh file format (top cells in stored orientation).
inline void write_mesh(std::ostream& out, const SimplicialComplex& K)
{
    const int n = K.dimension();
    out << "dimension " << n << "\n";
    out << "vertices " << K.count(0) << "\n";
    for (const Point& p : K.vertices()) {
        out << format_double(p.x());
        if (n == 2) {
            out << " " << format_double(p.y());
        }
        out << "\n";
    }
    out << "cells " << K.count(n) << "\n";
    for (int i = 0; i < K.count(n); ++i) {
        Simplex s = K.simplices(n)[static_cast<std::size_t>(i)];
        if (K.top_orientation(i) < 0) {
            std::swap(s[0], s[1]);
        }
        for (std::size_t j = 0; j < s.size(); ++j) {
            out << (j ? " " : "") << s[j];
        }
        out << "\n";
    }
}

/// FNV-1a 64 of the canonical mesh text, as 16 hex digits.
inline std::string mesh_hash(const SimplicialComplex& K)
{
    std::ostringstream text;
    write_mesh(text, K);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

// ---------------------------------------------------------------- matrices

/// "# rows cols nnz" then "row col value" lines sorted by (row, col), 0-based.
inline void write_triplets(std::ostream& out, const SparseMatrix& m)
{
    std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> t;
    for (int c = 0; c < m.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
            if (it.value() != 0.0) {
                t.emplace_back(it.row(), it.col(), it.value());
            }
        }
    }
    std::sort(t.begin(), t.end());
    out << "# " << m.rows() << " " << m.cols() << " " << t.size() << "\n";
    for (const auto& [r, c, v] : t) {
        out << r << " " << c << " " << format_double(v) << "\n";
    }
}

inline SparseMatrix read_triplets(std::istream& in)
{
    std::string line;
    int number = 0;
    long rows = -1, cols = -1, nnz = -1;
    std::vector<Eigen::Triplet<double>> t;
    while (std::getline(in, line)) {
        ++number;
        if (rows < 0) {
            std::istringstream h(line);
            std::string hash;
            if (!(h >> hash >> rows >> cols >> nnz) || hash != "#" || rows < 0 || cols < 0) {
                throw ParseError("expected '# rows cols nnz' header", number);
            }
            continue;
        }
        const auto tok = detail::tokens(line);
        if (tok.empty()) {
            continue;
        }
        if (tok.size() != 3) {
            throw ParseError("expected 'row col value'", number);
        }
        const long r = detail::to_int(tok[0], number);
        const long c = detail::to_int(tok[1], number);
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
            throw ParseError("entry out of range", number);
        }
        t.emplace_back(static_cast<int>(r), static_cast<int>(c), detail::to_double(tok[2], number));
    }
    if (rows < 0) {
        throw ParseError("empty matrix file", 0);
    }
    if (static_cast<long>(t.size()) != nnz) {
        throw ParseError("header announces " + std::to_string(nnz) + " entries, found " + std::to_string(t.size()), 0);
    }
    SparseMatrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

// ---------------------------------------------------------------- dual dump

/// One line per primal simplex: "primal k i |s| |*s| : x y ; x y ...", then
/// one line per boundary cell: "boundary k i |s| |*_b s| : ...".
inline void write_dual(std::ostream& out, const SimplicialComplex& K, const DualComplex& D)
{
    const auto points = [&](const std::vector<Point>& pts) {
        std::string s;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            s += (i ? " ; " : " ") + format_double(pts[i].x()) + " " + format_double(pts[i].y());
        }
        return s;
    };
    out << "# dual complex of a " << K.dimension() << "-complex\n";
    for (int k = 0; k <= K.dimension(); ++k) {
        for (int i = 0; i < K.count(k); ++i) {
            out << "primal " << k << " " << i << " " << format_double(D.primal_measure(k, i)) << " "
                << format_double(D.dual_measure(k, i)) << " :" << points(D.dual_cell(k, i)) << "\n";
        }
    }
    for (int k = 0; k < K.dimension(); ++k) {
        for (int i = 0; i < D.boundary_count(k); ++i) {
            out << "boundary " << k << " " << i << " " << format_double(D.boundary_primal_measure(k, i)) << " "
                << format_double(D.boundary_dual_measure(k, i)) << " :" << points(D.boundary_dual_cell(k, i)) << "\n";
        }
    }
}

// ---------------------------------------------------------------- trajectories

/// Columns: time H P defect a0 a1 ...
inline void write_trajectory(std::ostream& out, const Trajectory& tr)
{
    const std::size_t width = tr.states.empty() ? 0 : static_cast<std::size_t>(tr.states.front().size());
    out << "# time H P defect";
    for (std::size_t i = 0; i < width; ++i) {
        out << " a" << i;
    }
    out << "\n";
    for (std::size_t k = 0; k < tr.time.size(); ++k) {
        out << format_double(tr.time[k]) << " " << format_double(tr.energy[k]) << " " << format_double(tr.power[k])
            << " " << format_double(tr.defect[k]);
        if (k < tr.states.size()) {
            for (int i = 0; i < tr.states[k].size(); ++i) {
                out << " " << format_double(tr.states[k][i]);
            }
        }
        out << "\n";
    }
}

// ---------------------------------------------------------------- key = value

/// Parsed "key = value" file. Every key must be consumed; leftovers are
/// reported by `check_consumed`.
class KeyValues {
public:
    static KeyValues parse(std::istream& in)
    {
        KeyValues kv;
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const std::string body = trim(line.substr(0, line.find('#')));
            if (body.empty()) {
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string::npos) {
                throw ParseError("expected 'key = value'", number);
            }
            const std::string key = trim(body.substr(0, eq));
            const std::string value = trim(body.substr(eq + 1));
            if (key.empty() || value.empty()) {
                throw ParseError("expected 'key = value'", number);
            }
            if (kv.entries_.count(key)) {
                throw ParseError("duplicate key '" + key + "'", number);
            }
            kv.entries_[key] = {value, number};
        }
        return kv;
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    int line(const std::string& key) const
    {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.second;
    }

    std::string get(const std::string& key, const std::string& fallback) const
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) {
            return fallback;
        }
        used_.push_back(key);
        return it->second.first;
    }

    std::string require(const std::string& key) const
    {
        if (!has(key)) {
            throw ParseError("missing key '" + key + "'", 0);
        }
        return get(key, "");
    }

    double number(const std::string& key, double fallback) const
    {
        return has(key) ? detail::to_double(get(key, ""), line(key)) : fallback;
    }

    long integer(const std::string& key, long fallback) const
    {
        return has(key) ? detail::to_int(get(key, ""), line(key)) : fallback;
    }

    void check_consumed() const
    {
        for (const auto& [key, entry] : entries_) {
            if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
                throw ParseError("unknown key '" + key + "'", entry.second);
            }
        }
    }

private:
    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) {
            return "";
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::pair<std::string, int>> entries_;
    mutable std::vector<std::string> used_;
};

} // namespace sphs
