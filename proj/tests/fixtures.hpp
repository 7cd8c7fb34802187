#pragma once

// Mesh generators and independent geometric oracles used only by the tests.

#include "sphs/mesh.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using sphs::Point;
using sphs::Simplex;

/// Equilateral triangular lattice with `cols` x `rows` rhombic cells.
inline sphs::SimplicialComplex equilateral_lattice(int cols, int rows, double jitter = 0.0, unsigned seed = 7)
{
    const double h = std::sqrt(3.0) / 2.0;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    std::vector<Point> pts;
    const auto id = [&](int i, int j) { return j * (cols + 1) + i; };
    for (int j = 0; j <= rows; ++j) {
        for (int i = 0; i <= cols; ++i) {
            Point p(i + 0.5 * j, j * h);
            const bool interior = i > 0 && i < cols && j > 0 && j < rows;
            if (jitter > 0.0 && interior) {
                p += Point(u(rng), u(rng));
            }
            pts.push_back(p);
        }
    }
    std::vector<Simplex> tris;
    for (int j = 0; j < rows; ++j) {
        for (int i = 0; i < cols; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
            tris.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    return sphs::build_complex(2, pts, tris);
}

/// Regular hexagon fanned into six equilateral triangles.
inline sphs::SimplicialComplex hexagon_fan()
{
    std::vector<Point> pts{{0.0, 0.0}};
    const double pi = std::acos(-1.0);
    for (int k = 0; k < 6; ++k) {
        pts.emplace_back(std::cos(pi * k / 3.0), std::sin(pi * k / 3.0));
    }
    std::vector<Simplex> tris;
    for (int k = 0; k < 6; ++k) {
        tris.push_back({0, 1 + k, 1 + (k + 1) % 6});
    }
    return sphs::build_complex(2, pts, tris);
}

inline sphs::SimplicialComplex nonuniform_line()
{
    return sphs::line_complex({0.0, 0.1, 0.35, 0.5, 0.8, 1.0});
}

struct NamedMesh {
    std::string name;
    sphs::SimplicialComplex complex;
};

/// Well-centered meshes shared by the property tests.
inline std::vector<NamedMesh> well_centered_meshes()
{
    const double h = std::sqrt(3.0) / 2.0;
    return {
        {"two triangles", sphs::build_complex(2, {{0, 0}, {1, 0}, {0.5, h}, {1.5, h}}, {{0, 1, 2}, {2, 1, 3}})},
        {"lattice 3x2", equilateral_lattice(3, 2)},
        {"jittered lattice 4x4", equilateral_lattice(4, 4, 0.06)},
        {"hexagon", hexagon_fan()},
        {"uniform line", sphs::uniform_line(6)},
        {"nonuniform line", nonuniform_line()},
    };
}

// ---------------------------------------------------------------- oracles

/// Circumcenter of a triangle from the closed-form determinant expression.
inline Point circumcenter_formula(const Point& a, const Point& b, const Point& c)
{
    const double d = 2.0 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) + c.x() * (a.y() - b.y()));
    const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
    return {(a2 * (b.y() - c.y()) + b2 * (c.y() - a.y()) + c2 * (a.y() - b.y())) / d,
            (a2 * (c.x() - b.x()) + b2 * (a.x() - c.x()) + c2 * (b.x() - a.x())) / d};
}

/// cot of the angle at `apex` in the triangle (apex, p, q).
inline double cot_at(const Point& apex, const Point& p, const Point& q)
{
    const Point u = p - apex;
    const Point v = q - apex;
    return u.dot(v) / std::abs(u.x() * v.y() - u.y() * v.x());
}

/// Dual edge lengths by the cotangent formula: |*e| = |e|/2 * sum of cot of opposite angles.
inline std::vector<double> cotangent_dual_lengths(const sphs::SimplicialComplex& K)
{
    std::vector<double> out(static_cast<std::size_t>(K.count(1)), 0.0);
    const auto& X = K.vertices();
    for (const Simplex& t : K.simplices(2)) {
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<std::size_t>(k)];
            const int b = t[static_cast<std::size_t>((k + 1) % 3)];
            const int c = t[static_cast<std::size_t>((k + 2) % 3)];
            const int e = K.find({std::min(a, b), std::max(a, b)});
            const double len = (X[static_cast<std::size_t>(a)] - X[static_cast<std::size_t>(b)]).norm();
            out[static_cast<std::size_t>(e)] += 0.5 * len
                * cot_at(X[static_cast<std::size_t>(c)], X[static_cast<std::size_t>(a)], X[static_cast<std::size_t>(b)]);
        }
    }
    return out;
}

/// Vertex dual areas: sum over incident edges of (|e|/2) * |*e| / 2.
inline std::vector<double> cotangent_dual_areas(const sphs::SimplicialComplex& K)
{
    const std::vector<double> dl = cotangent_dual_lengths(K);
    std::vector<double> out(static_cast<std::size_t>(K.count(0)), 0.0);
    for (int e = 0; e < K.count(1); ++e) {
        const Simplex& s = K.simplices(1)[static_cast<std::size_t>(e)];
        const double len = K.measure(1, e);
        for (int v : s) {
            out[static_cast<std::size_t>(v)] += 0.25 * len * dl[static_cast<std::size_t>(e)];
        }
    }
    return out;
}

} // namespace fixtures
