// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/types.hpp>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace femlr {

/// Axis-aligned rectangle [x0,x1]×[y0,y1]. For a torus, [0,x1)×[0,y1).
struct Rect
{
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

enum class BoundaryKind { Neumann, Dirichlet };

using Triangle = std::array<Index, 3>;

///
/// Triangulation of a planar rectangle or a flat 2-torus.
///
/// Vertices `[0, node_count())` are the canonical nodes carrying degrees of
/// freedom. On a torus, triangles that straddle a seam reference ghost
/// vertices appended after the canonical ones; a ghost holds the unwrapped
/// coordinate and folds to its canonical node through `node_of()`. Element
/// geometry can therefore always be computed directly from vertex coordinates.
///
class TriMesh
{
public:
    TriMesh() = default;

    /// Validates orientation, area cover and the periodic fold; throws Error otherwise.
    /// `covered_area` defaults to the area of `domain`; a Delaunay mesh of scattered
    /// points passes its convex-hull area instead.
    TriMesh(std::vector<Vec2> vertices,
        std::vector<Triangle> triangles,
        Index node_count,
        std::vector<Index> periodic_map,
        Rect domain,
        bool periodic,
        std::optional<double> covered_area = std::nullopt);

    Index node_count() const { return m_node_count; }
    Index vertex_count() const { return static_cast<Index>(m_vertices.size()); }
    Index triangle_count() const { return static_cast<Index>(m_triangles.size()); }

    const std::vector<Vec2>& vertices() const { return m_vertices; }
    const std::vector<Triangle>& triangles() const { return m_triangles; }
    const Vec2& vertex(Index v) const { return m_vertices[static_cast<size_t>(v)]; }
    const Triangle& triangle(Index t) const { return m_triangles[static_cast<size_t>(t)]; }

    /// Canonical node of a (possibly ghost) vertex.
    Index node_of(Index v) const
    {
        return m_periodic_map.empty() ? v : m_periodic_map[static_cast<size_t>(v)];
    }
    /// Canonical node indices of triangle `t`.
    Triangle triangle_nodes(Index t) const;
    std::array<Vec2, 3> triangle_coords(Index t) const;

    /// Coordinate of canonical node `n`.
    const Vec2& node(Index n) const { return vertex(n); }

    bool periodic() const { return m_periodic; }
    const Rect& domain() const { return m_domain; }
    Vec2 periods() const { return {m_domain.width(), m_domain.height()}; }
    const std::vector<Index>& periodic_map() const { return m_periodic_map; }

    /// Sorted canonical indices of nodes on ∂Ω (empty for a torus).
    const std::vector<Index>& boundary_nodes() const { return m_boundary_nodes; }
    bool is_boundary(Index n) const { return !m_boundary_mask.empty() && m_boundary_mask[static_cast<size_t>(n)]; }

    /// Area of Ω (sum of element areas up to rounding).
    double area() const { return m_area; }

    /// Wraps a point into the fundamental domain (identity on a rectangle mesh).
    Vec2 fold(const Vec2& p) const;

    /// Difference q − p using the minimum-image convention on a torus.
    Vec2 displacement(const Vec2& p, const Vec2& q) const;

    /// Throws Error if Dirichlet conditions cannot be imposed.
    void check_boundary_condition(BoundaryKind kind) const;

private:
    std::vector<Vec2> m_vertices;
    std::vector<Triangle> m_triangles;
    Index m_node_count = 0;
    std::vector<Index> m_periodic_map;
    std::vector<Index> m_boundary_nodes;
    std::vector<bool> m_boundary_mask;
    Rect m_domain;
    double m_area = 0.0;
    bool m_periodic = false;
};

///
/// Regular grid of nx×ny cells, each split along its (0,0)–(1,1) diagonal.
/// A rectangle gives (nx+1)(ny+1) nodes; a torus identifies opposite sides,
/// leaving nx·ny nodes. A periodic domain must have its origin at (0,0).
///
TriMesh grid_mesh(Index nx, Index ny, const Rect& extents, bool periodic);

///
/// Delaunay triangulation of `points`. With `torus_periods` set the points are
/// reduced modulo the periods, triangulated together with their eight periodic
/// copies and folded back onto a torus mesh whose node i is points[i].
///
TriMesh delaunay(std::span<const Vec2> points, std::optional<Vec2> torus_periods = std::nullopt);

template <typename Scalar>
struct ElementGeometryT
{
    Scalar area;
    /// Constant gradients of the three P1 basis functions.
    std::array<Vector2<Scalar>, 3> grad;
};
using ElementGeometry = ElementGeometryT<double>;

/// P1 geometry of the triangle (a, b, c), counterclockwise.
template <typename Scalar>
ElementGeometryT<Scalar> element_geometry(
    const Vector2<Scalar>& a, const Vector2<Scalar>& b, const Vector2<Scalar>& c)
{
    const Vector2<Scalar> e1 = b - a;
    const Vector2<Scalar> e2 = c - a;
    const Scalar det = e1.x() * e2.y() - e1.y() * e2.x();
    if (!(det > Scalar(0))) throw Error("degenerate or inverted triangle", "mesh");
    // ∇φ_i is the inward normal of the opposite edge scaled by 1/(2·area).
    ElementGeometryT<Scalar> g;
    g.area = det / Scalar(2);
    auto perp = [&](const Vector2<Scalar>& p, const Vector2<Scalar>& q) {
        return Vector2<Scalar>((p.y() - q.y()) / det, (q.x() - p.x()) / det);
    };
    g.grad[0] = perp(b, c);
    g.grad[1] = perp(c, a);
    g.grad[2] = perp(a, b);
    return g;
}

ElementGeometry element_geometry(const TriMesh& mesh, Index t);

/// Signed area of (a, b, c); positive when counterclockwise.
inline double signed_area(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

} // namespace femlr
