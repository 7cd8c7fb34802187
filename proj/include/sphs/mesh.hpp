#pragma once

// Oriented manifold-like simplicial complexes of dimension 1 and 2 embedded in
// the line or the plane, together with their integer incidence matrices.
//
// Canonical layout:
//   * top cells keep the order and orientation they were given in;
//   * every lower-dimensional simplex is stored once, ordered lexicographically
//     by its sorted vertex tuple, and oriented by ascending vertex index;
//   * incidence(k) is the N_{k-1} x N_k matrix of the boundary map, rows are faces.

#include "sphs/errors.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

using Point = Eigen::Vector2d;
using Simplex = std::vector<int>;
using IntSparse = Eigen::SparseMatrix<int>;

/// A k-simplex lying on the boundary, with the sign of the boundary-induced
/// orientation relative to the stored orientation.
struct BoundaryEntry {
    int index = 0;
    int sign = 1;

    bool operator==(const BoundaryEntry&) const = default;
};

class SimplicialComplex;

namespace detail {
SimplicialComplex assemble(int dimension, int ambient, std::vector<Point> vertices,
                           std::vector<Simplex> top_cells, std::vector<int> top_orientation);
} // namespace detail

class SimplicialComplex {
public:
    SimplicialComplex() = default;

    int dimension() const noexcept { return dimension_; }
    /// 1 for complexes on the line, 2 for the plane. A boundary loop of a planar
    /// complex has dimension 1 and ambient dimension 2.
    int ambient_dimension() const noexcept { return ambient_; }

    const std::vector<Point>& vertices() const noexcept { return vertices_; }

    const std::vector<Simplex>& simplices(int k) const
    {
        check_degree(k, 0, dimension_);
        return simplices_[static_cast<std::size_t>(k)];
    }

    /// N_k. Zero for k outside [0, n].
    int count(int k) const noexcept
    {
        if (k < 0 || k > dimension_ || simplices_.empty()) {
            return 0;
        }
        return static_cast<int>(simplices_[static_cast<std::size_t>(k)].size());
    }

    /// The boundary operator on k-chains, shape N_{k-1} x N_k.
    const IntSparse& incidence(int k) const
    {
        check_degree(k, 1, dimension_);
        return incidence_[static_cast<std::size_t>(k - 1)];
    }

    /// k-simplices lying on the boundary, in stored order, k = 0 .. n-1.
    const std::vector<BoundaryEntry>& boundary_simplices(int k) const
    {
        check_degree(k, 0, dimension_ - 1);
        return boundary_[static_cast<std::size_t>(k)];
    }

    /// Orientation sign of top cell i. Always +1 except for 0-dimensional
    /// complexes, whose points carry the orientation induced from a 1-complex.
    int top_orientation(int i) const { return top_orientation_.at(static_cast<std::size_t>(i)); }

    bool empty() const noexcept { return vertices_.empty(); }

    /// Index of the k-simplex with the same vertex set as `s`, or -1.
    int find(Simplex s) const
    {
        const int k = static_cast<int>(s.size()) - 1;
        if (k < 0 || k > dimension_) {
            return -1;
        }
        std::sort(s.begin(), s.end());
        const auto it = lookup_[static_cast<std::size_t>(k)].find(s);
        return it == lookup_[static_cast<std::size_t>(k)].end() ? -1 : it->second;
    }

    double bounding_box_diagonal() const
    {
        if (vertices_.empty()) {
            return 0.0;
        }
        Point lo = vertices_.front();
        Point hi = vertices_.front();
        for (const auto& v : vertices_) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        return (hi - lo).norm();
    }

    /// Unsigned measure |sigma^k|; 1 for vertices.
    double measure(int k, int i) const
    {
        const auto& s = simplices(k).at(static_cast<std::size_t>(i));
        return std::abs(signed_measure(s));
    }

    /// Length or area with sign, following the vertex order of `s`.
    double signed_measure(const Simplex& s) const
    {
        switch (s.size()) {
        case 1:
            return 1.0;
        case 2: {
            const Point d = vertices_[static_cast<std::size_t>(s[1])] - vertices_[static_cast<std::size_t>(s[0])];
            if (ambient_ == 1) {
                return d.x();
            }
            return d.norm();
        }
        case 3: {
            const Point a = vertices_[static_cast<std::size_t>(s[1])] - vertices_[static_cast<std::size_t>(s[0])];
            const Point b = vertices_[static_cast<std::size_t>(s[2])] - vertices_[static_cast<std::size_t>(s[0])];
            return 0.5 * (a.x() * b.y() - a.y() * b.x());
        }
        default:
            throw DegreeError("simplices of dimension > 2 are not supported");
        }
    }

    /// Sum of top-cell measures.
    double volume() const
    {
        double total = 0.0;
        for (int i = 0; i < count(dimension_); ++i) {
            total += measure(dimension_, i);
        }
        return total;
    }

    bool operator==(const SimplicialComplex& other) const
    {
        return dimension_ == other.dimension_ && ambient_ == other.ambient_ && vertices_ == other.vertices_
            && simplices_ == other.simplices_ && top_orientation_ == other.top_orientation_;
    }

private:
    friend SimplicialComplex detail::assemble(int, int, std::vector<Point>, std::vector<Simplex>,
                                              std::vector<int>);

    static void check_degree(int k, int lo, int hi)
    {
        if (k < lo || k > hi) {
            throw DegreeError("degree " + std::to_string(k) + " outside [" + std::to_string(lo) + ", "
                              + std::to_string(hi) + "]");
        }
    }

    int dimension_ = 0;
    int ambient_ = 1;
    std::vector<Point> vertices_;
    std::vector<std::vector<Simplex>> simplices_;
    std::vector<std::map<Simplex, int>> lookup_;
    std::vector<IntSparse> incidence_;
    std::vector<std::vector<BoundaryEntry>> boundary_;
    std::vector<int> top_orientation_;
};

namespace detail {

/// Sign of the permutation that sorts `s` (distinct entries).
inline int permutation_sign(const Simplex& s)
{
    int inversions = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            if (s[i] > s[j]) {
                ++inversions;
            }
        }
    }
    return inversions % 2 == 0 ? 1 : -1;
}

inline std::string describe(const Simplex& s)
{
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += (i ? "," : "") + std::to_string(s[i]);
    }
    return out + "]";
}

// Checks that the triangles around each vertex form one fan (a path or a cycle).
// Assumes edge-level manifoldness and consistent orientation already hold.
inline void check_vertex_fans(const std::vector<Point>& vertices, const std::vector<Simplex>& triangles)
{
    std::vector<std::vector<std::pair<int, int>>> around(vertices.size()); // (next, prev) per incident triangle
    for (const auto& t : triangles) {
        for (int i = 0; i < 3; ++i) {
            around[static_cast<std::size_t>(t[i])].emplace_back(t[(i + 1) % 3], t[(i + 2) % 3]);
        }
    }
    for (std::size_t v = 0; v < around.size(); ++v) {
        const auto& fan = around[v];
        if (fan.empty()) {
            continue;
        }
        std::map<int, std::size_t> by_next;
        for (std::size_t i = 0; i < fan.size(); ++i) {
            by_next[fan[i].first] = i;
        }
        std::set<int> prevs;
        for (const auto& f : fan) {
            prevs.insert(f.second);
        }
        std::vector<std::size_t> starts;
        for (std::size_t i = 0; i < fan.size(); ++i) {
            if (!prevs.count(fan[i].first)) {
                starts.push_back(i);
            }
        }
        if (starts.size() > 1) {
            throw StructuralError("non-manifold vertex " + std::to_string(v) + ": incident triangles form "
                                  + std::to_string(starts.size()) + " separate fans");
        }
        // Walk from the fan start (or any triangle for an interior vertex).
        std::vector<bool> seen(fan.size(), false);
        std::size_t cur = starts.empty() ? 0 : starts.front();
        std::size_t visited = 0;
        while (!seen[cur]) {
            seen[cur] = true;
            ++visited;
            const auto it = by_next.find(fan[cur].second);
            if (it == by_next.end()) {
                break;
            }
            cur = it->second;
        }
        if (visited != fan.size()) {
            throw StructuralError("non-manifold vertex " + std::to_string(v)
                                  + ": incident triangles do not form a single fan");
        }
    }
}

inline SimplicialComplex assemble(int dimension, int ambient, std::vector<Point> vertices,
                                  std::vector<Simplex> top_cells, std::vector<int> top_orientation)
{
    SimplicialComplex K;
    K.dimension_ = dimension;
    K.ambient_ = ambient;
    K.vertices_ = std::move(vertices);
    const int nv = static_cast<int>(K.vertices_.size());

    if (top_orientation.empty()) {
        top_orientation.assign(top_cells.size(), 1);
    }
    K.top_orientation_ = std::move(top_orientation);

    // Index validity and duplicates.
    std::set<Simplex> seen_cells;
    for (std::size_t c = 0; c < top_cells.size(); ++c) {
        const auto& cell = top_cells[c];
        if (static_cast<int>(cell.size()) != dimension + 1) {
            throw StructuralError("cell " + std::to_string(c) + " has " + std::to_string(cell.size())
                                  + " vertices, expected " + std::to_string(dimension + 1));
        }
        for (int v : cell) {
            if (v < 0 || v >= nv) {
                throw StructuralError("cell " + std::to_string(c) + " references vertex " + std::to_string(v)
                                      + " out of range [0, " + std::to_string(nv) + ")");
            }
        }
        Simplex sorted = cell;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw StructuralError("cell " + std::to_string(c) + " repeats a vertex: " + describe(cell));
        }
        if (!seen_cells.insert(sorted).second) {
            throw StructuralError("duplicate cell " + describe(cell));
        }
    }

    // Enumerate faces of every dimension below the top.
    K.simplices_.assign(static_cast<std::size_t>(dimension + 1), {});
    K.lookup_.assign(static_cast<std::size_t>(dimension + 1), {});
    for (int k = 0; k < dimension; ++k) {
        auto& table = K.lookup_[static_cast<std::size_t>(k)];
        for (const auto& cell : top_cells) {
            Simplex sorted = cell;
            std::sort(sorted.begin(), sorted.end());
            // All (k+1)-subsets of the sorted cell, via a selection mask.
            std::vector<bool> mask(sorted.size(), false);
            std::fill(mask.begin(), mask.begin() + (k + 1), true);
            do {
                Simplex face;
                for (std::size_t i = 0; i < sorted.size(); ++i) {
                    if (mask[i]) {
                        face.push_back(sorted[i]);
                    }
                }
                table.emplace(std::move(face), 0);
            } while (std::prev_permutation(mask.begin(), mask.end()));
        }
        auto& list = K.simplices_[static_cast<std::size_t>(k)];
        for (auto& [face, index] : table) {
            index = static_cast<int>(list.size());
            list.push_back(face);
        }
    }
    K.simplices_[static_cast<std::size_t>(dimension)] = top_cells;
    for (std::size_t c = 0; c < top_cells.size(); ++c) {
        Simplex sorted = top_cells[c];
        std::sort(sorted.begin(), sorted.end());
        K.lookup_[static_cast<std::size_t>(dimension)].emplace(std::move(sorted), static_cast<int>(c));
    }
    if (dimension > 0 && K.count(0) != nv) {
        for (int v = 0; v < nv; ++v) {
            if (K.find({v}) < 0) {
                throw StructuralError("vertex " + std::to_string(v) + " is not used by any cell");
            }
        }
    }
    if (dimension == 0) {
        // Points are their own top cells; keep the given order.
        K.simplices_[0] = top_cells;
    }

    // Incidence matrices.
    for (int k = 1; k <= dimension; ++k) {
        const auto& cells = K.simplices_[static_cast<std::size_t>(k)];
        std::vector<Eigen::Triplet<int>> entries;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto& s = cells[c];
            for (int i = 0; i <= k; ++i) {
                Simplex face;
                for (int j = 0; j <= k; ++j) {
                    if (j != i) {
                        face.push_back(s[static_cast<std::size_t>(j)]);
                    }
                }
                const int sign = (i % 2 == 0 ? 1 : -1) * permutation_sign(face);
                const int row = K.find(face);
                entries.emplace_back(row, static_cast<int>(c), sign);
            }
        }
        IntSparse m(K.count(k - 1), K.count(k));
        m.setFromTriplets(entries.begin(), entries.end());
        m.makeCompressed();
        K.incidence_.push_back(std::move(m));
    }

    if (dimension == 0) {
        return K;
    }

    // Manifold condition on codimension-1 faces: at most two cofaces.
    const IntSparse& top = K.incidence_.back();
    const int nf = K.count(dimension - 1);
    std::vector<std::vector<std::pair<int, int>>> cofaces(static_cast<std::size_t>(nf));
    for (int c = 0; c < top.outerSize(); ++c) {
        for (IntSparse::InnerIterator it(top, c); it; ++it) {
            cofaces[static_cast<std::size_t>(it.row())].emplace_back(c, it.value());
        }
    }
    for (int f = 0; f < nf; ++f) {
        if (cofaces[static_cast<std::size_t>(f)].size() > 2) {
            throw StructuralError("non-manifold face " + describe(K.simplices_[static_cast<std::size_t>(dimension - 1)][static_cast<std::size_t>(f)])
                                  + " shared by " + std::to_string(cofaces[static_cast<std::size_t>(f)].size()) + " cells");
        }
    }

    // Degenerate simplices.
    const double diag = K.bounding_box_diagonal();
    for (int k = 1; k <= dimension; ++k) {
        const double tol = 1e-12 * std::pow(diag, k);
        for (int i = 0; i < K.count(k); ++i) {
            if (K.measure(k, i) < tol || diag == 0.0) {
                throw GeometryError("degenerate " + std::to_string(k) + "-simplex "
                                    + describe(K.simplices_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]));
            }
        }
    }

    // Consistent orientation: interior faces receive opposite signs.
    for (int f = 0; f < nf; ++f) {
        const auto& cf = cofaces[static_cast<std::size_t>(f)];
        if (cf.size() == 2 && cf[0].second == cf[1].second) {
            throw OrientationError("cells " + describe(top_cells[static_cast<std::size_t>(cf[0].first)]) + " and "
                                   + describe(top_cells[static_cast<std::size_t>(cf[1].first)])
                                   + " induce the same orientation on their shared face "
                                   + describe(K.simplices_[static_cast<std::size_t>(dimension - 1)][static_cast<std::size_t>(f)]));
        }
    }

    if (dimension == 2) {
        check_vertex_fans(K.vertices_, top_cells);
    }

    // Positive orientation when the complex fills its ambient space.
    if (dimension == ambient) {
        for (std::size_t c = 0; c < top_cells.size(); ++c) {
            if (K.signed_measure(top_cells[c]) <= 0.0) {
                throw OrientationError("cell " + describe(top_cells[c])
                                       + (dimension == 2 ? " is clockwise; counterclockwise triangles are required"
                                                         : " points in the negative direction"));
            }
        }
    }

    // Boundary simplices with induced orientation.
    K.boundary_.assign(static_cast<std::size_t>(dimension), {});
    auto& outer = K.boundary_[static_cast<std::size_t>(dimension - 1)];
    for (int f = 0; f < nf; ++f) {
        const auto& cf = cofaces[static_cast<std::size_t>(f)];
        if (cf.size() == 1) {
            outer.push_back({f, cf[0].second});
        }
    }
    if (dimension == 2) {
        std::set<int> verts;
        for (const auto& e : outer) {
            for (int v : K.simplices_[1][static_cast<std::size_t>(e.index)]) {
                verts.insert(v);
            }
        }
        for (int v : verts) {
            K.boundary_[0].push_back({K.find({v}), 1});
        }
    }
    return K;
}

} // namespace detail

/// Builds and validates a complex from its top cells.
///
/// 2D triangles must be counterclockwise and 1D segments must point in the
/// positive x direction; such cells are rejected rather than flipped. For 1D
/// complexes only the x coordinate of each vertex is used and y must be zero.
inline SimplicialComplex build_complex(int dimension, std::vector<Point> vertices, std::vector<Simplex> top_cells)
{
    if (dimension != 1 && dimension != 2) {
        throw DegreeError("only complexes of dimension 1 or 2 are supported, got " + std::to_string(dimension));
    }
    if (top_cells.empty()) {
        throw StructuralError("a complex needs at least one top cell");
    }
    if (dimension == 1) {
        for (std::size_t i = 0; i < vertices.size(); ++i) {
            if (vertices[i].y() != 0.0) {
                throw GeometryError("vertex " + std::to_string(i) + " of a 1D complex has a nonzero y coordinate");
            }
        }
    }
    return detail::assemble(dimension, dimension, std::move(vertices), std::move(top_cells), {});
}

/// 1D complex through the given increasing abscissae, edges [i, i+1].
inline SimplicialComplex line_complex(const std::vector<double>& xs)
{
    if (xs.size() < 2) {
        throw StructuralError("a line needs at least two vertices");
    }
    std::vector<Point> vertices;
    std::vector<Simplex> edges;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        vertices.emplace_back(xs[i], 0.0);
        if (i + 1 < xs.size()) {
            edges.push_back({static_cast<int>(i), static_cast<int>(i + 1)});
        }
    }
    return build_complex(1, std::move(vertices), std::move(edges));
}

/// Uniform subdivision of [0, length] into `edges` segments.
inline SimplicialComplex uniform_line(int edges, double length = 1.0)
{
    if (edges < 1) {
        throw StructuralError("a line needs at least one edge");
    }
    if (!(length > 0.0)) {
        throw GeometryError("line length must be positive");
    }
    std::vector<double> xs(static_cast<std::size_t>(edges) + 1);
    for (int i = 0; i <= edges; ++i) {
        xs[static_cast<std::size_t>(i)] = length * static_cast<double>(i) / static_cast<double>(edges);
    }
    return line_complex(xs);
}

inline const IntSparse& boundary_operator(const SimplicialComplex& K, int k)
{
    return K.incidence(k);
}

/// The boundary complex dK with the boundary-induced orientation, plus the map
/// from each of its k-cells back to K.
struct BoundaryComplex {
    SimplicialComplex complex;
    /// parent[k][i]: index in K of the k-cell i of dK.
    std::vector<std::vector<int>> parent;
    /// sign[k][i]: orientation of cell i in dK relative to the stored orientation in K.
    std::vector<std::vector<int>> sign;
};

inline BoundaryComplex boundary_complex(const SimplicialComplex& K)
{
    BoundaryComplex out;
    const int n = K.dimension();
    if (n == 0 || K.empty() || K.boundary_simplices(n - 1).empty()) {
        out.complex = detail::assemble(std::max(n - 1, 0), K.ambient_dimension(), {}, {}, {});
        out.parent.assign(static_cast<std::size_t>(std::max(n, 1)), {});
        out.sign.assign(static_cast<std::size_t>(std::max(n, 1)), {});
        return out;
    }

    // Boundary vertices keep their relative order from K.
    std::vector<int> verts;
    for (const auto& b : K.boundary_simplices(0)) {
        verts.push_back(K.simplices(0)[static_cast<std::size_t>(b.index)][0]);
    }
    std::map<int, int> local;
    std::vector<Point> coords;
    for (int v : verts) {
        local[v] = static_cast<int>(coords.size());
        coords.push_back(K.vertices()[static_cast<std::size_t>(v)]);
    }

    out.parent.assign(static_cast<std::size_t>(n), {});
    out.sign.assign(static_cast<std::size_t>(n), {});
    if (n == 1) {
        std::vector<Simplex> points;
        std::vector<int> orientation;
        for (const auto& b : K.boundary_simplices(0)) {
            const int v = K.simplices(0)[static_cast<std::size_t>(b.index)][0];
            points.push_back({local[v]});
            orientation.push_back(b.sign);
            out.parent[0].push_back(b.index);
            out.sign[0].push_back(b.sign);
        }
        out.complex = detail::assemble(0, K.ambient_dimension(), std::move(coords), std::move(points),
                                       std::move(orientation));
        return out;
    }

    std::vector<Simplex> edges;
    for (const auto& b : K.boundary_simplices(1)) {
        const auto& e = K.simplices(1)[static_cast<std::size_t>(b.index)];
        Simplex oriented = b.sign > 0 ? Simplex{local[e[0]], local[e[1]]} : Simplex{local[e[1]], local[e[0]]};
        edges.push_back(std::move(oriented));
        out.parent[1].push_back(b.index);
        out.sign[1].push_back(b.sign);
    }
    out.complex = detail::assemble(1, K.ambient_dimension(), std::move(coords), std::move(edges), {});
    for (const auto& b : K.boundary_simplices(0)) {
        out.parent[0].push_back(b.index);
        out.sign[0].push_back(b.sign);
    }
    return out;
}

} // namespace sphs
