// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace femlr {

namespace {

double wrap(double x, double period)
{
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    if (r >= period) r -= period;
    return r;
}

} // namespace

TriMesh::TriMesh(std::vector<Vec2> vertices,
    std::vector<Triangle> triangles,
    Index node_count,
    std::vector<Index> periodic_map,
    Rect domain,
    bool periodic,
    std::optional<double> covered_area)
    : m_vertices(std::move(vertices))
    , m_triangles(std::move(triangles))
    , m_node_count(node_count)
    , m_periodic_map(std::move(periodic_map))
    , m_domain(domain)
    , m_area(covered_area.value_or(domain.area()))
    , m_periodic(periodic)
{
    if (m_node_count <= 0 || m_node_count > vertex_count())
        throw Error("node count out of range", "mesh");
    if (m_domain.width() <= 0.0 || m_domain.height() <= 0.0)
        throw Error("domain extents must be positive", "mesh");
    if (m_periodic) {
        if (static_cast<Index>(m_periodic_map.size()) != vertex_count())
            throw Error("periodic map must cover every vertex", "mesh");
        for (Index v = 0; v < vertex_count(); ++v) {
            const Index n = m_periodic_map[static_cast<size_t>(v)];
            if (n < 0 || n >= m_node_count) throw Error("periodic map leaves the canonical node set", "mesh");
            if (v < m_node_count && n != v) throw Error("canonical nodes must fold onto themselves", "mesh");
        }
    } else {
        if (!m_periodic_map.empty()) throw Error("periodic map given for a rectangle mesh", "mesh");
        if (vertex_count() != m_node_count) throw Error("ghost vertices require a periodic mesh", "mesh");
    }

    if (m_periodic && covered_area) throw Error("a torus always covers its full period cell", "mesh");
    const double min_area = 1e-14 * m_domain.area();
    double total = 0.0;
    for (Index t = 0; t < triangle_count(); ++t) {
        const auto& tri = triangle(t);
        for (Index v : tri)
            if (v < 0 || v >= vertex_count()) throw Error("triangle references a missing vertex", "mesh");
        const double a = signed_area(vertex(tri[0]), vertex(tri[1]), vertex(tri[2]));
        if (!(a > min_area)) {
            std::ostringstream os;
            os << "triangle " << t << " has non-positive or degenerate area " << a;
            throw Error(os.str(), "mesh");
        }
        total += a;
    }
    if (std::abs(total - m_area) > 1e-10 * m_area) {
        std::ostringstream os;
        os.precision(17);
        os << "triangles cover area " << total << " but the domain has area " << m_area;
        throw Error(os.str(), "mesh");
    }

    if (!m_periodic) {
        // Boundary edges belong to exactly one triangle.
        std::map<std::pair<Index, Index>, int> edges;
        for (const auto& tri : m_triangles)
            for (int i = 0; i < 3; ++i) {
                Index a = tri[static_cast<size_t>(i)], b = tri[static_cast<size_t>((i + 1) % 3)];
                if (a > b) std::swap(a, b);
                ++edges[{a, b}];
            }
        m_boundary_mask.assign(static_cast<size_t>(m_node_count), false);
        for (const auto& [e, count] : edges)
            if (count == 1) {
                m_boundary_mask[static_cast<size_t>(e.first)] = true;
                m_boundary_mask[static_cast<size_t>(e.second)] = true;
            }
        for (Index n = 0; n < m_node_count; ++n)
            if (m_boundary_mask[static_cast<size_t>(n)]) m_boundary_nodes.push_back(n);
    }
}

Triangle TriMesh::triangle_nodes(Index t) const
{
    const auto& tri = triangle(t);
    return {node_of(tri[0]), node_of(tri[1]), node_of(tri[2])};
}

std::array<Vec2, 3> TriMesh::triangle_coords(Index t) const
{
    const auto& tri = triangle(t);
    return {vertex(tri[0]), vertex(tri[1]), vertex(tri[2])};
}

Vec2 TriMesh::fold(const Vec2& p) const
{
    if (!m_periodic) return p;
    return {wrap(p.x(), m_domain.width()), wrap(p.y(), m_domain.height())};
}

Vec2 TriMesh::displacement(const Vec2& p, const Vec2& q) const
{
    Vec2 d = q - p;
    if (m_periodic) {
        const Vec2 per = periods();
        for (int k = 0; k < 2; ++k) d[k] -= per[k] * std::round(d[k] / per[k]);
    }
    return d;
}

void TriMesh::check_boundary_condition(BoundaryKind kind) const
{
    if (kind == BoundaryKind::Dirichlet && m_boundary_nodes.empty())
        throw Error("Dirichlet conditions need a mesh with boundary nodes", "mesh");
}

TriMesh grid_mesh(Index nx, Index ny, const Rect& extents, bool periodic)
{
    if (nx < 2 || ny < 2) throw Error("grid needs at least 2 cells per direction", "mesh");
    if (!(extents.width() > 0.0) || !(extents.height() > 0.0))
        throw Error("grid extents must be positive", "mesh");
    if (periodic && (extents.x0 != 0.0 || extents.y0 != 0.0))
        throw Error("a periodic grid must have its origin at (0,0)", "mesh");

    const double hx = extents.width() / static_cast<double>(nx);
    const double hy = extents.height() / static_cast<double>(ny);
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<size_t>(2 * nx * ny));

    auto coord = [&](Index i, Index j) {
        return Vec2(extents.x0 + hx * static_cast<double>(i), extents.y0 + hy * static_cast<double>(j));
    };

    if (!periodic) {
        const Index stride = nx + 1;
        for (Index j = 0; j <= ny; ++j)
            for (Index i = 0; i <= nx; ++i) vertices.push_back(coord(i, j));
        for (Index j = 0; j < ny; ++j)
            for (Index i = 0; i < nx; ++i) {
                const Index a = j * stride + i, b = a + 1, c = a + stride + 1, d = a + stride;
                triangles.push_back({a, b, c});
                triangles.push_back({a, c, d});
            }
        const Index n = static_cast<Index>(vertices.size());
        return TriMesh(std::move(vertices), std::move(triangles), n, {}, extents, false);
    }

    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i) vertices.push_back(coord(i, j));
    const Index n = nx * ny;
    std::vector<Index> fold(static_cast<size_t>(n));
    for (Index k = 0; k < n; ++k) fold[static_cast<size_t>(k)] = k;

    // Ghost vertices for the column i = nx and the row j = ny.
    std::map<std::pair<Index, Index>, Index> ghosts;
    auto vertex_at = [&](Index i, Index j) -> Index {
        if (i < nx && j < ny) return j * nx + i;
        auto [it, inserted] = ghosts.try_emplace({i, j}, static_cast<Index>(vertices.size()));
        if (inserted) {
            vertices.push_back(coord(i, j));
            fold.push_back((j % ny) * nx + (i % nx));
        }
        return it->second;
    };
    for (Index j = 0; j < ny; ++j)
        for (Index i = 0; i < nx; ++i) {
            const Index a = vertex_at(i, j), b = vertex_at(i + 1, j), c = vertex_at(i + 1, j + 1),
                        d = vertex_at(i, j + 1);
            triangles.push_back({a, b, c});
            triangles.push_back({a, c, d});
        }
    return TriMesh(std::move(vertices), std::move(triangles), n, std::move(fold), extents, true);
}

ElementGeometry element_geometry(const TriMesh& mesh, Index t)
{
    if (t < 0 || t >= mesh.triangle_count()) throw Error("triangle index out of range", "mesh");
    const auto p = mesh.triangle_coords(t);
    return element_geometry<double>(p[0], p[1], p[2]);
}

} // namespace femlr
