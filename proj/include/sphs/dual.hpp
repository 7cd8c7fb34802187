#pragma once

// Circumcentric dual of a well-centered complex, restricted to |K|, extended by
// the boundary dual cells that tile dK. Every measure a diagonal Hodge star
// needs is computed here by splitting dual cells into circumcenter-based
// right triangles and segments.

#include "sphs/errors.hpp"
#include "sphs/mesh.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace sphs {

/// Circumcenter of a 0-, 1- or 2-simplex given by its vertex coordinates.
inline Point circumcenter(const std::vector<Point>& simplex)
{
    switch (simplex.size()) {
    case 1:
        return simplex[0];
    case 2:
        if ((simplex[1] - simplex[0]).norm() == 0.0) {
            throw GeometryError("circumcenter of a degenerate segment");
        }
        return 0.5 * (simplex[0] + simplex[1]);
    case 3: {
        const Point a = simplex[1] - simplex[0];
        const Point b = simplex[2] - simplex[0];
        const double det = 2.0 * (a.x() * b.y() - a.y() * b.x());
        const double scale = std::max(a.squaredNorm(), b.squaredNorm());
        if (std::abs(det) <= 1e-12 * scale) {
            throw GeometryError("circumcenter of a degenerate triangle");
        }
        const double a2 = a.squaredNorm();
        const double b2 = b.squaredNorm();
        return simplex[0] + Point((b.y() * a2 - a.y() * b2) / det, (a.x() * b2 - b.x() * a2) / det);
    }
    default:
        throw DegreeError("circumcenter supports simplices of dimension 0, 1 and 2");
    }
}

inline std::vector<Point> simplex_points(const SimplicialComplex& K, const Simplex& s)
{
    std::vector<Point> pts;
    pts.reserve(s.size());
    for (int v : s) {
        pts.push_back(K.vertices()[static_cast<std::size_t>(v)]);
    }
    return pts;
}

struct WellCenteredReport {
    /// flags[k][i] is true when simplex i of dimension k strictly contains its circumcenter.
    std::vector<std::vector<bool>> flags;
    /// (dimension, index) of every violator.
    std::vector<std::pair<int, int>> violators;

    bool well_centered() const noexcept { return violators.empty(); }
};

/// Vertices and edges always contain their circumcenter; a triangle does when
/// all barycentric coordinates of its circumcenter exceed 1e-12.
inline WellCenteredReport is_well_centered(const SimplicialComplex& K)
{
    WellCenteredReport report;
    const int n = K.dimension();
    report.flags.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        report.flags[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(K.count(k)), true);
    }
    if (n < 2) {
        return report;
    }
    for (int t = 0; t < K.count(2); ++t) {
        const auto pts = simplex_points(K, K.simplices(2)[static_cast<std::size_t>(t)]);
        const Point c = circumcenter(pts);
        const double area2 = (pts[1] - pts[0]).x() * (pts[2] - pts[0]).y() - (pts[1] - pts[0]).y() * (pts[2] - pts[0]).x();
        bool inside = true;
        for (int i = 0; i < 3; ++i) {
            const Point& p = pts[static_cast<std::size_t>((i + 1) % 3)];
            const Point& q = pts[static_cast<std::size_t>((i + 2) % 3)];
            const double sub = (p - c).x() * (q - c).y() - (p - c).y() * (q - c).x();
            if (sub / area2 <= 1e-12) {
                inside = false;
            }
        }
        if (!inside) {
            report.flags[2][static_cast<std::size_t>(t)] = false;
            report.violators.emplace_back(2, t);
        }
    }
    return report;
}

/// Immutable circumcentric dual of a complex.
///
/// Measures follow the Hodge conventions |sigma^0| = 1 and |*sigma^n| = 1.
/// Boundary quantities are indexed like the cells of boundary().complex.
class DualComplex {
public:
    int dimension() const noexcept { return n_; }

    const Point& circumcenter(int k, int i) const { return circumcenters_.at(idx(k)).at(idx(i)); }
    double primal_measure(int k, int i) const { return primal_measure_.at(idx(k)).at(idx(i)); }
    double dual_measure(int k, int i) const { return dual_measure_.at(idx(k)).at(idx(i)); }
    /// Measure of the support volume: convex hull of sigma^k and its dual cell.
    double support_volume(int k, int i) const { return support_volume_.at(idx(k)).at(idx(i)); }
    /// Vertex loop (2-cells), endpoints (1-cells) or single point (0-cells) of the dual of sigma^k.
    const std::vector<Point>& dual_cell(int k, int i) const { return dual_cells_.at(idx(k)).at(idx(i)); }

    const std::vector<double>& primal_measures(int k) const { return primal_measure_.at(idx(k)); }
    const std::vector<double>& dual_measures(int k) const { return dual_measure_.at(idx(k)); }

    const BoundaryComplex& boundary() const noexcept { return boundary_; }
    /// |sigma| for the k-cells of dK.
    double boundary_primal_measure(int k, int i) const { return boundary_primal_.at(idx(k)).at(idx(i)); }
    /// Measure of the (n-1-k)-cell of d(*K) attached to the k-cell i of dK.
    double boundary_dual_measure(int k, int i) const { return boundary_dual_.at(idx(k)).at(idx(i)); }
    const std::vector<Point>& boundary_dual_cell(int k, int i) const
    {
        return boundary_dual_cells_.at(idx(k)).at(idx(i));
    }
    int boundary_count(int k) const
    {
        return k >= 0 && k < static_cast<int>(boundary_primal_.size()) ? static_cast<int>(boundary_primal_[idx(k)].size()) : 0;
    }

private:
    friend DualComplex build_dual(const SimplicialComplex& K);

    static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

    int n_ = 0;
    std::vector<std::vector<Point>> circumcenters_;
    std::vector<std::vector<double>> primal_measure_;
    std::vector<std::vector<double>> dual_measure_;
    std::vector<std::vector<double>> support_volume_;
    std::vector<std::vector<std::vector<Point>>> dual_cells_;
    BoundaryComplex boundary_;
    std::vector<std::vector<double>> boundary_primal_;
    std::vector<std::vector<double>> boundary_dual_;
    std::vector<std::vector<std::vector<Point>>> boundary_dual_cells_;
};

/// Builds the dual of a strictly well-centered complex; refuses otherwise.
inline DualComplex build_dual(const SimplicialComplex& K)
{
    const int n = K.dimension();
    if (n != 1 && n != 2) {
        throw DegreeError("dual complexes are built for dimension 1 and 2 only");
    }
    const auto wc = is_well_centered(K);
    if (!wc.well_centered()) {
        std::string msg = "complex is not well-centered; violating simplices:";
        for (const auto& [k, i] : wc.violators) {
            msg += " " + std::to_string(k) + ":" + std::to_string(i);
        }
        throw WellCenteredError(msg, wc.violators);
    }

    DualComplex D;
    D.n_ = n;
    const auto N = [&](int k) { return static_cast<std::size_t>(K.count(k)); };
    D.circumcenters_.resize(static_cast<std::size_t>(n + 1));
    D.primal_measure_.resize(static_cast<std::size_t>(n + 1));
    D.dual_measure_.resize(static_cast<std::size_t>(n + 1));
    D.support_volume_.resize(static_cast<std::size_t>(n + 1));
    D.dual_cells_.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        for (int i = 0; i < K.count(k); ++i) {
            D.circumcenters_[kk].push_back(circumcenter(simplex_points(K, K.simplices(k)[static_cast<std::size_t>(i)])));
            D.primal_measure_[kk].push_back(k == 0 ? 1.0 : K.measure(k, i));
        }
        D.dual_measure_[kk].assign(N(k), 0.0);
        D.support_volume_[kk].assign(N(k), 0.0);
        D.dual_cells_[kk].assign(N(k), {});
    }
    // Top simplices: dual cell is the circumcenter.
    for (std::size_t t = 0; t < N(n); ++t) {
        D.dual_measure_[static_cast<std::size_t>(n)][t] = 1.0;
        D.support_volume_[static_cast<std::size_t>(n)][t] = K.measure(n, static_cast<int>(t));
        D.dual_cells_[static_cast<std::size_t>(n)][t] = {D.circumcenters_[static_cast<std::size_t>(n)][t]};
    }

    const std::vector<Point>& X = K.vertices();
    D.boundary_ = boundary_complex(K);
    const auto& dK = D.boundary_.complex;

    if (n == 1) {
        // Dual of a vertex: from the midpoint (or the vertex itself on the
        // boundary) on the left to the midpoint (or vertex) on the right.
        const IntSparse& b1 = K.incidence(1);
        std::vector<double> left(N(0)), right(N(0));
        for (std::size_t v = 0; v < N(0); ++v) {
            left[v] = right[v] = X[v].x();
        }
        for (int e = 0; e < b1.outerSize(); ++e) {
            const double mid = D.circumcenters_[1][static_cast<std::size_t>(e)].x();
            const double half = 0.5 * K.measure(1, e);
            for (IntSparse::InnerIterator it(b1, e); it; ++it) {
                const auto v = static_cast<std::size_t>(it.row());
                D.dual_measure_[0][v] += half;
                if (mid < X[v].x()) {
                    left[v] = mid;
                } else {
                    right[v] = mid;
                }
            }
            D.support_volume_[1][static_cast<std::size_t>(e)] = K.measure(1, e);
        }
        for (std::size_t v = 0; v < N(0); ++v) {
            D.support_volume_[0][v] = D.dual_measure_[0][v];
            D.dual_cells_[0][v] = {Point(left[v], 0.0), Point(right[v], 0.0)};
        }
        // dK is a set of points; their boundary duals are the same points.
        D.boundary_primal_.assign(1, std::vector<double>(static_cast<std::size_t>(dK.count(0)), 1.0));
        D.boundary_dual_.assign(1, std::vector<double>(static_cast<std::size_t>(dK.count(0)), 1.0));
        D.boundary_dual_cells_.assign(1, {});
        for (int i = 0; i < dK.count(0); ++i) {
            D.boundary_dual_cells_[0].push_back({dK.vertices()[static_cast<std::size_t>(dK.simplices(0)[static_cast<std::size_t>(i)][0])]});
        }
        return D;
    }

    // n == 2. Dual edges: circumcenter of each adjacent triangle to the edge midpoint.
    const IntSparse& b2 = K.incidence(2);
    std::vector<std::vector<int>> edge_triangles(N(1));
    for (int t = 0; t < b2.outerSize(); ++t) {
        for (IntSparse::InnerIterator it(b2, t); it; ++it) {
            edge_triangles[static_cast<std::size_t>(it.row())].push_back(t);
        }
    }
    for (std::size_t e = 0; e < N(1); ++e) {
        const Point& mid = D.circumcenters_[1][e];
        const double len = K.measure(1, static_cast<int>(e));
        double dual_len = 0.0;
        std::vector<Point> ends;
        for (int t : edge_triangles[e]) {
            const Point& cc = D.circumcenters_[2][static_cast<std::size_t>(t)];
            const double h = (cc - mid).norm();
            dual_len += h;
            D.support_volume_[1][e] += 0.5 * len * h;
            ends.push_back(cc);
        }
        if (edge_triangles[e].size() == 1) {
            ends.push_back(mid);
        }
        D.dual_measure_[1][e] = dual_len;
        D.dual_cells_[1][e] = std::move(ends);
    }

    // Dual 2-cells: walk the fan of triangles around each vertex counterclockwise.
    std::vector<std::vector<int>> vertex_triangles(N(0));
    for (std::size_t t = 0; t < N(2); ++t) {
        for (int v : K.simplices(2)[t]) {
            vertex_triangles[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
        }
    }
    const auto mid_of = [&](int a, int b) { return D.circumcenters_[1][static_cast<std::size_t>(K.find({a, b}))]; };
    for (std::size_t v = 0; v < N(0); ++v) {
        const int vi = static_cast<int>(v);
        struct Corner {
            int next, prev, tri;
        };
        std::vector<Corner> fan;
        for (int t : vertex_triangles[v]) {
            const auto& tri = K.simplices(2)[static_cast<std::size_t>(t)];
            for (int i = 0; i < 3; ++i) {
                if (tri[static_cast<std::size_t>(i)] == vi) {
                    fan.push_back({tri[static_cast<std::size_t>((i + 1) % 3)], tri[static_cast<std::size_t>((i + 2) % 3)], t});
                }
            }
        }
        double area = 0.0;
        for (const auto& c : fan) {
            const Point& cc = D.circumcenters_[2][static_cast<std::size_t>(c.tri)];
            for (int w : {c.next, c.prev}) {
                const Point m = mid_of(vi, w);
                area += 0.5 * (X[v] - m).norm() * (m - cc).norm();
            }
        }
        D.dual_measure_[0][v] = area;
        D.support_volume_[0][v] = area;

        // Counterclockwise vertex loop; boundary vertices start at the vertex itself.
        std::size_t start = 0;
        bool on_boundary = false;
        for (std::size_t i = 0; i < fan.size(); ++i) {
            bool has_pred = false;
            for (const auto& c : fan) {
                has_pred = has_pred || c.prev == fan[i].next;
            }
            if (!has_pred) {
                start = i;
                on_boundary = true;
            }
        }
        std::vector<Point> loop;
        if (on_boundary) {
            loop.push_back(X[v]);
        }
        std::size_t cur = start;
        for (std::size_t step = 0; step < fan.size(); ++step) {
            loop.push_back(mid_of(vi, fan[cur].next));
            loop.push_back(D.circumcenters_[2][static_cast<std::size_t>(fan[cur].tri)]);
            bool advanced = false;
            for (std::size_t j = 0; j < fan.size(); ++j) {
                if (fan[j].next == fan[cur].prev) {
                    cur = j;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) {
                loop.push_back(mid_of(vi, fan[cur].prev));
                break;
            }
        }
        D.dual_cells_[0][v] = std::move(loop);
    }

    // Boundary duals: each boundary vertex owns the two half-edges next to it,
    // each boundary edge owns its midpoint.
    D.boundary_primal_.assign(2, {});
    D.boundary_dual_.assign(2, {});
    D.boundary_dual_cells_.assign(2, {});
    const auto& dX = dK.vertices();
    D.boundary_primal_[0].assign(static_cast<std::size_t>(dK.count(0)), 1.0);
    D.boundary_dual_[0].assign(static_cast<std::size_t>(dK.count(0)), 0.0);
    D.boundary_dual_cells_[0].assign(static_cast<std::size_t>(dK.count(0)), {});
    std::vector<Point> incoming(static_cast<std::size_t>(dK.count(0))), outgoing(incoming.size());
    for (int e = 0; e < dK.count(1); ++e) {
        const auto& edge = dK.simplices(1)[static_cast<std::size_t>(e)]; // induced orientation
        const Point a = dX[static_cast<std::size_t>(edge[0])];
        const Point b = dX[static_cast<std::size_t>(edge[1])];
        const Point mid = 0.5 * (a + b);
        const double len = (b - a).norm();
        D.boundary_primal_[1].push_back(len);
        D.boundary_dual_[1].push_back(1.0);
        D.boundary_dual_cells_[1].push_back({mid});
        const int va = dK.find({edge[0]});
        const int vb = dK.find({edge[1]});
        D.boundary_dual_[0][static_cast<std::size_t>(va)] += 0.5 * len;
        D.boundary_dual_[0][static_cast<std::size_t>(vb)] += 0.5 * len;
        outgoing[static_cast<std::size_t>(va)] = mid;
        incoming[static_cast<std::size_t>(vb)] = mid;
    }
    for (int i = 0; i < dK.count(0); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        D.boundary_dual_cells_[0][ii] = {incoming[ii], dX[static_cast<std::size_t>(dK.simplices(0)[ii][0])], outgoing[ii]};
    }
    return D;
}

/// Largest |cos| between a primal edge and the segments of its dual edge.
inline double orthogonality_defect(const SimplicialComplex& K, const DualComplex& D)
{
    if (K.dimension() != 2) {
        return 0.0;
    }
    double worst = 0.0;
    for (int e = 0; e < K.count(1); ++e) {
        const auto& s = K.simplices(1)[static_cast<std::size_t>(e)];
        const Point dir = K.vertices()[static_cast<std::size_t>(s[1])] - K.vertices()[static_cast<std::size_t>(s[0])];
        const Point& mid = D.circumcenter(1, e);
        for (const Point& p : D.dual_cell(1, e)) {
            const Point seg = p - mid;
            if (seg.norm() > 0.0) {
                worst = std::max(worst, std::abs(seg.dot(dir)) / (seg.norm() * dir.norm()));
            }
        }
    }
    return worst;
}

/// max_k |sum of support volumes of k-simplices - |K|| / |K|.
inline double support_volume_defect(const SimplicialComplex& K, const DualComplex& D)
{
    const double vol = K.volume();
    double worst = 0.0;
    for (int k = 0; k <= K.dimension(); ++k) {
        double total = 0.0;
        for (int i = 0; i < K.count(k); ++i) {
            total += D.support_volume(k, i);
        }
        worst = std::max(worst, std::abs(total - vol) / vol);
    }
    return worst;
}

/// Relative mismatch between the boundary dual (n-1)-cells and the measure of dK.
/// Zero for 1D complexes, where both sides are point counts.
inline double boundary_tiling_defect(const DualComplex& D)
{
    const auto& dK = D.boundary().complex;
    if (D.dimension() != 2 || dK.count(1) == 0) {
        return 0.0;
    }
    double perimeter = 0.0;
    for (int e = 0; e < dK.count(1); ++e) {
        perimeter += D.boundary_primal_measure(1, e);
    }
    double tiles = 0.0;
    for (int v = 0; v < dK.count(0); ++v) {
        tiles += D.boundary_dual_measure(0, v);
    }
    return std::abs(tiles - perimeter) / perimeter;
}

} // namespace sphs
