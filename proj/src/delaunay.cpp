// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

// Incremental Delaunay triangulation (point insertion + Lawson flips).
//
// Every predicate is evaluated on coordinate differences formed from a
// canonical point plus an integer period offset. A torus vertex and all of
// its periodic copies therefore see bit-identical predicate inputs, so the
// nine tiles of a periodic point set are triangulated identically and the
// fold back onto the torus is consistent. Exactly cocircular quadrilaterals
// (regular grids) are resolved by a rule that depends only on canonical ids.

#include <femlr/mesh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace femlr {

namespace {

constexpr Index kNone = -1;

struct TiledVertex
{
    Index canonical;
    int ox;
    int oy;
};

struct Tri
{
    std::array<Index, 3> v;
    std::array<Index, 3> n; // n[i] is the neighbour across the edge opposite v[i]
};

uint64_t hilbert_key(uint32_t x, uint32_t y)
{
    constexpr uint32_t order = 1u << 16;
    uint64_t d = 0;
    for (uint32_t s = order / 2; s > 0; s /= 2) {
        const uint32_t rx = (x & s) > 0 ? 1u : 0u;
        const uint32_t ry = (y & s) > 0 ? 1u : 0u;
        d += static_cast<uint64_t>(s) * s * ((3 * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = order - 1 - x;
                y = order - 1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

class Triangulator
{
public:
    Triangulator(std::vector<Vec2> base, std::vector<TiledVertex> tiled, Vec2 periods)
        : m_base(std::move(base))
        , m_tiled(std::move(tiled))
        , m_periods(periods)
    {
        const Index nv = static_cast<Index>(m_tiled.size());
        m_pos.resize(static_cast<size_t>(nv + 3));
        Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity());
        Vec2 hi = -lo;
        for (Index i = 0; i < nv; ++i) {
            const auto& t = m_tiled[static_cast<size_t>(i)];
            m_pos[static_cast<size_t>(i)] = m_base[static_cast<size_t>(t.canonical)]
                + Vec2(t.ox * m_periods.x(), t.oy * m_periods.y());
            lo = lo.cwiseMin(m_pos[static_cast<size_t>(i)]);
            hi = hi.cwiseMax(m_pos[static_cast<size_t>(i)]);
        }
        const Vec2 c = 0.5 * (lo + hi);
        const double big = 1e4 * std::max((hi - lo).maxCoeff(), 1.0);
        m_super = nv;
        m_pos[static_cast<size_t>(nv)] = c + Vec2(-3 * big, -3 * big);
        m_pos[static_cast<size_t>(nv + 1)] = c + Vec2(3 * big, 0.0);
        m_pos[static_cast<size_t>(nv + 2)] = c + Vec2(0.0, 3 * big);
        m_tris.push_back({{nv, nv + 1, nv + 2}, {kNone, kNone, kNone}});
    }

    void run()
    {
        const Index nv = m_super;
        std::vector<Index> order(static_cast<size_t>(nv));
        std::vector<uint64_t> keys(static_cast<size_t>(nv));
        Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
        for (Index i = 0; i < nv; ++i) {
            lo = lo.cwiseMin(m_pos[static_cast<size_t>(i)]);
            hi = hi.cwiseMax(m_pos[static_cast<size_t>(i)]);
        }
        const Vec2 span = (hi - lo).cwiseMax(1e-300);
        for (Index i = 0; i < nv; ++i) {
            order[static_cast<size_t>(i)] = i;
            const Vec2 r = (m_pos[static_cast<size_t>(i)] - lo).cwiseQuotient(span);
            keys[static_cast<size_t>(i)] = hilbert_key(static_cast<uint32_t>(std::min(r.x(), 1.0) * 65535.0),
                static_cast<uint32_t>(std::min(r.y(), 1.0) * 65535.0));
        }
        std::stable_sort(order.begin(), order.end(),
            [&](Index a, Index b) { return keys[static_cast<size_t>(a)] < keys[static_cast<size_t>(b)]; });
        for (Index p : order) insert(p);
        sweep();
    }

    const std::vector<Tri>& triangles() const { return m_tris; }
    bool is_super(Index v) const { return v >= m_super; }
    const Vec2& position(Index v) const { return m_pos[static_cast<size_t>(v)]; }

    /// q − p, translation invariant for tiled vertices.
    Vec2 diff(Index q, Index p) const
    {
        if (is_super(p) || is_super(q)) return m_pos[static_cast<size_t>(q)] - m_pos[static_cast<size_t>(p)];
        const auto& a = m_tiled[static_cast<size_t>(q)];
        const auto& b = m_tiled[static_cast<size_t>(p)];
        return (m_base[static_cast<size_t>(a.canonical)] - m_base[static_cast<size_t>(b.canonical)])
            + Vec2((a.ox - b.ox) * m_periods.x(), (a.oy - b.oy) * m_periods.y());
    }

private:
    /// Orientation evaluated in a canonical vertex order, so every triangle
    /// sharing an edge sees the same rounded value (up to sign) for a point
    /// on that edge. The order is invariant under a common period shift.
    double orient(Index a, Index b, Index c) const
    {
        std::array<Index, 3> v{a, b, c};
        bool odd = false;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2 - i; ++j)
                if (precedes(v[static_cast<size_t>(j + 1)], v[static_cast<size_t>(j)])) {
                    std::swap(v[static_cast<size_t>(j)], v[static_cast<size_t>(j + 1)]);
                    odd = !odd;
                }
        const Vec2 u = diff(v[1], v[0]), w = diff(v[2], v[0]);
        const double o = u.x() * w.y() - u.y() * w.x();
        return odd ? -o : o;
    }

    bool precedes(Index p, Index q) const
    {
        if (is_super(p) || is_super(q)) return is_super(q) && (!is_super(p) || p < q);
        const auto& a = m_tiled[static_cast<size_t>(p)];
        const auto& b = m_tiled[static_cast<size_t>(q)];
        return std::tie(a.canonical, a.ox, a.oy) < std::tie(b.canonical, b.ox, b.oy);
    }

    /// > 0 when the quad (a,b,c | q) should be flipped to the diagonal through q.
    bool illegal(Index a, Index b, Index c, Index q) const
    {
        const Vec2 ad = diff(a, q), bd = diff(b, q), cd = diff(c, q);
        const double a2 = ad.squaredNorm(), b2 = bd.squaredNorm(), c2 = cd.squaredNorm();
        const double det = a2 * (bd.x() * cd.y() - cd.x() * bd.y()) + b2 * (cd.x() * ad.y() - ad.x() * cd.y())
            + c2 * (ad.x() * bd.y() - bd.x() * ad.y());
        const bool any_super = is_super(a) || is_super(b) || is_super(c) || is_super(q);
        const double scale = std::max({a2, b2, c2});
        if (any_super || std::abs(det) > 1e-10 * scale * scale) return det > 0.0;
        // Cocircular: use the diagonal that touches the smallest canonical id.
        // The current diagonal is (b, c); the alternative is (a, q).
        const Index ka = key(a), kb = key(b), kc = key(c), kq = key(q);
        const Index kmin = std::min({ka, kb, kc, kq});
        return (ka == kmin || kq == kmin) && kb != kmin && kc != kmin;
    }

    Index key(Index v) const { return m_tiled[static_cast<size_t>(v)].canonical; }

    void replace_neighbor(Index t, Index old_nb, Index new_nb)
    {
        if (t == kNone) return;
        for (auto& n : m_tris[static_cast<size_t>(t)].n)
            if (n == old_nb) {
                n = new_nb;
                return;
            }
        throw Error("triangulation adjacency corrupted", "delaunay");
    }

    void rotate_to(Index t, int i)
    {
        auto& tri = m_tris[static_cast<size_t>(t)];
        std::rotate(tri.v.begin(), tri.v.begin() + i, tri.v.end());
        std::rotate(tri.n.begin(), tri.n.begin() + i, tri.n.end());
    }

    /// Returns (triangle, -1) if strictly inside, (triangle, i) if on the edge opposite v[i].
    std::pair<Index, int> locate(Index p)
    {
        Index t = m_last;
        const size_t cap = 4 * m_tris.size() + 64;
        for (size_t step = 0; step < cap; ++step) {
            const auto& tri = m_tris[static_cast<size_t>(t)];
            int on_edge = -1;
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                const int i = static_cast<int>((k + m_rotor) % 3);
                const double o = orient(tri.v[static_cast<size_t>((i + 1) % 3)], tri.v[static_cast<size_t>((i + 2) % 3)], p);
                if (o < 0.0) {
                    t = tri.n[static_cast<size_t>(i)];
                    if (t == kNone) throw Error("point lies outside the enclosing triangle", "delaunay");
                    moved = true;
                    break;
                }
                if (o == 0.0) on_edge = i;
            }
            ++m_rotor;
            if (!moved) return {t, on_edge};
        }
        // The walk can cycle when rounding leaves a few edges locally
        // non-Delaunay; fall back to scanning every triangle.
        for (Index s = 0; s < static_cast<Index>(m_tris.size()); ++s) {
            const auto& tri = m_tris[static_cast<size_t>(s)];
            int on_edge = -1;
            bool inside = true;
            for (int i = 0; i < 3 && inside; ++i) {
                const double o = orient(tri.v[static_cast<size_t>((i + 1) % 3)], tri.v[static_cast<size_t>((i + 2) % 3)], p);
                if (o < 0.0) inside = false;
                else if (o == 0.0) on_edge = i;
            }
            if (inside) return {s, on_edge};
        }
        throw Error("point location failed", "delaunay");
    }

    Index add(const Tri& tri)
    {
        m_tris.push_back(tri);
        return static_cast<Index>(m_tris.size()) - 1;
    }

    void insert(Index p)
    {
        auto [t, edge] = locate(p);
        std::vector<Index> stack;
        if (edge < 0) {
            const Tri old = m_tris[static_cast<size_t>(t)];
            const auto [a, b, c] = old.v;
            const auto [na, nb, nc] = old.n;
            const Index ta = t;
            const Index tb = add({{p, c, a}, {nb, kNone, kNone}});
            const Index tc = add({{p, a, b}, {nc, kNone, kNone}});
            m_tris[static_cast<size_t>(ta)] = {{p, b, c}, {na, tb, tc}};
            m_tris[static_cast<size_t>(tb)].n = {nb, tc, ta};
            m_tris[static_cast<size_t>(tc)].n = {nc, ta, tb};
            replace_neighbor(nb, t, tb);
            replace_neighbor(nc, t, tc);
            stack = {ta, tb, tc};
        } else {
            rotate_to(t, edge);
            const Tri old = m_tris[static_cast<size_t>(t)];
            const auto [a, b, c] = old.v;
            const Index u = old.n[0];
            if (u == kNone) throw Error("point on the enclosing boundary", "delaunay");
            int j = 0;
            while (m_tris[static_cast<size_t>(u)].n[static_cast<size_t>(j)] != t) ++j;
            rotate_to(u, j);
            const Tri uo = m_tris[static_cast<size_t>(u)]; // (d, c, b)
            const Index d = uo.v[0];
            const Index a1 = t, a2 = add({}), b1 = u, b2 = add({});
            m_tris[static_cast<size_t>(a1)] = {{p, c, a}, {old.n[1], a2, b2}};
            m_tris[static_cast<size_t>(a2)] = {{p, a, b}, {old.n[2], b1, a1}};
            m_tris[static_cast<size_t>(b1)] = {{p, b, d}, {uo.n[1], b2, a2}};
            m_tris[static_cast<size_t>(b2)] = {{p, d, c}, {uo.n[2], a1, b1}};
            replace_neighbor(old.n[2], t, a2);
            replace_neighbor(uo.n[2], u, b2);
            stack = {a1, a2, b1, b2};
        }
        while (!stack.empty()) {
            const Index s = stack.back();
            stack.pop_back();
            if (try_flip(s)) {
                stack.push_back(s);
                stack.push_back(m_flipped);
            }
        }
        m_last = t;
    }

    /// Flip the edge opposite v[0] of `t` if illegal. On success `t` and
    /// `m_flipped` both have v[0] unchanged at position 0.
    bool try_flip(Index t)
    {
        const Tri tt = m_tris[static_cast<size_t>(t)];
        const Index u = tt.n[0];
        if (u == kNone) return false;
        int j = 0;
        while (m_tris[static_cast<size_t>(u)].n[static_cast<size_t>(j)] != t) ++j;
        const Index q = m_tris[static_cast<size_t>(u)].v[static_cast<size_t>(j)];
        const auto [p, b, c] = tt.v;
        if (!illegal(p, b, c, q)) return false;
        if (!(orient(p, b, q) > 0.0 && orient(p, q, c) > 0.0)) return false;
        rotate_to(u, j);
        const Tri uo = m_tris[static_cast<size_t>(u)]; // (q, c, b)
        m_tris[static_cast<size_t>(t)] = {{p, b, q}, {uo.n[1], u, tt.n[2]}};
        m_tris[static_cast<size_t>(u)] = {{p, q, c}, {uo.n[2], tt.n[1], t}};
        replace_neighbor(uo.n[1], u, t);
        replace_neighbor(tt.n[1], t, u);
        m_flipped = u;
        return true;
    }

    void sweep()
    {
        for (int pass = 0; pass < 64; ++pass) {
            size_t flips = 0;
            for (Index t = 0; t < static_cast<Index>(m_tris.size()); ++t)
                for (int i = 0; i < 3; ++i) {
                    if (m_tris[static_cast<size_t>(t)].n[static_cast<size_t>(i)] == kNone) continue;
                    rotate_to(t, i);
                    if (try_flip(t)) ++flips;
                }
            if (flips == 0) return;
        }
        throw Error("edge legalisation did not converge", "delaunay");
    }

    std::vector<Vec2> m_base;
    std::vector<TiledVertex> m_tiled;
    Vec2 m_periods;
    std::vector<Vec2> m_pos;
    std::vector<Tri> m_tris;
    Index m_super = 0;
    Index m_last = 0;
    Index m_flipped = kNone;
    size_t m_rotor = 0;
};

void check_input(const std::vector<Vec2>& base, const std::vector<Vec2>& tiled_pos)
{
    if (base.size() < 3) throw Error("at least 3 points are required", "delaunay");

    // Collinearity, relative to the bounding box.
    Vec2 lo = base.front(), hi = base.front();
    for (const auto& p : base) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double diag = (hi - lo).norm();
    size_t far = 0;
    for (size_t i = 1; i < base.size(); ++i)
        if ((base[i] - base[0]).norm() > (base[far] - base[0]).norm()) far = i;
    const Vec2 dir = (base[far] - base[0]).normalized();
    bool collinear = true;
    for (const auto& p : base) {
        const Vec2 r = p - base[0];
        if (std::abs(dir.x() * r.y() - dir.y() * r.x()) > 1e-12 * diag) {
            collinear = false;
            break;
        }
    }
    if (diag == 0.0 || collinear) throw Error("all points are collinear", "delaunay");

    std::vector<size_t> order(tiled_pos.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return tiled_pos[a].x() < tiled_pos[b].x(); });
    for (size_t i = 0; i < order.size(); ++i)
        for (size_t j = i + 1; j < order.size() && tiled_pos[order[j]].x() - tiled_pos[order[i]].x() <= 1e-12; ++j)
            if ((tiled_pos[order[j]] - tiled_pos[order[i]]).lpNorm<Eigen::Infinity>() <= 1e-12) {
                std::ostringstream os;
                os << "duplicate points within 1e-12 near (" << tiled_pos[order[i]].x() << ", "
                   << tiled_pos[order[i]].y() << ")";
                throw Error(os.str(), "delaunay");
            }
}

double hull_area(std::vector<Vec2> pts)
{
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return std::tie(a.x(), a.y()) < std::tie(b.x(), b.y());
    });
    std::vector<Vec2> hull(2 * pts.size());
    size_t k = 0;
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    for (size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
        hull[k++] = pts[i - 1];
    }
    double area = 0.0;
    for (size_t i = 0; i + 1 < k; ++i) area += hull[i].x() * hull[i + 1].y() - hull[i + 1].x() * hull[i].y();
    return 0.5 * area;
}

} // namespace

TriMesh delaunay(std::span<const Vec2> points, std::optional<Vec2> torus_periods)
{
    const bool torus = torus_periods.has_value();
    Vec2 periods = torus ? *torus_periods : Vec2::Zero();
    if (torus && !(periods.x() > 0.0 && periods.y() > 0.0)) throw Error("torus periods must be positive", "delaunay");

    std::vector<Vec2> base(points.begin(), points.end());
    if (torus)
        for (auto& p : base)
            for (int k = 0; k < 2; ++k) {
                p[k] = std::fmod(p[k], periods[k]);
                if (p[k] < 0.0) p[k] += periods[k];
                if (p[k] >= periods[k]) p[k] -= periods[k];
            }

    const Index n = static_cast<Index>(base.size());
    std::vector<TiledVertex> tiled;
    std::vector<Vec2> tiled_pos;
    const int reach = torus ? 1 : 0;
    for (int oy = -reach; oy <= reach; ++oy)
        for (int ox = -reach; ox <= reach; ++ox)
            for (Index i = 0; i < n; ++i) {
                tiled.push_back({i, ox, oy});
                tiled_pos.push_back(base[static_cast<size_t>(i)] + Vec2(ox * periods.x(), oy * periods.y()));
            }
    check_input(base, tiled_pos);

    Triangulator tr(base, tiled, periods);
    tr.run();

    std::vector<Triangle> triangles;
    if (!torus) {
        for (const auto& t : tr.triangles()) {
            if (tr.is_super(t.v[0]) || tr.is_super(t.v[1]) || tr.is_super(t.v[2])) continue;
            triangles.push_back({t.v[0], t.v[1], t.v[2]});
        }
        Vec2 lo = base.front(), hi = base.front();
        for (const auto& p : base) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        return TriMesh(std::move(base), std::move(triangles), n, {}, Rect{lo.x(), lo.y(), hi.x(), hi.y()}, false,
            hull_area(std::vector<Vec2>(points.begin(), points.end())));
    }

    std::vector<Vec2> vertices = base;
    std::vector<Index> fold(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) fold[static_cast<size_t>(i)] = i;
    std::map<std::tuple<Index, int, int>, Index> ghosts;
    auto vertex_of = [&](const TiledVertex& tv) -> Index {
        if (tv.ox == 0 && tv.oy == 0) return tv.canonical;
        auto [it, inserted] = ghosts.try_emplace({tv.canonical, tv.ox, tv.oy}, static_cast<Index>(vertices.size()));
        if (inserted) {
            vertices.push_back(base[static_cast<size_t>(tv.canonical)] + Vec2(tv.ox * periods.x(), tv.oy * periods.y()));
            fold.push_back(tv.canonical);
        }
        return it->second;
    };

    for (const auto& t : tr.triangles()) {
        if (tr.is_super(t.v[0]) || tr.is_super(t.v[1]) || tr.is_super(t.v[2])) continue;
        // Anchor on the smallest canonical id so every periodic copy computes the
        // same relative centroid; exactly one copy lands in the central tile.
        int anchor = 0;
        for (int i = 1; i < 3; ++i)
            if (tiled[static_cast<size_t>(t.v[static_cast<size_t>(i)])].canonical
                < tiled[static_cast<size_t>(t.v[static_cast<size_t>(anchor)])].canonical)
                anchor = i;
        const Index av = t.v[static_cast<size_t>(anchor)];
        const auto& a = tiled[static_cast<size_t>(av)];
        Vec2 rel = Vec2::Zero();
        for (Index v : t.v) rel += tr.diff(v, av);
        const Vec2 centroid = base[static_cast<size_t>(a.canonical)] + rel / 3.0;
        const int tx = static_cast<int>(std::floor(centroid.x() / periods.x())) + a.ox;
        const int ty = static_cast<int>(std::floor(centroid.y() / periods.y())) + a.oy;
        if (tx != 0 || ty != 0) continue;
        triangles.push_back({vertex_of(tiled[static_cast<size_t>(t.v[0])]), vertex_of(tiled[static_cast<size_t>(t.v[1])]),
            vertex_of(tiled[static_cast<size_t>(t.v[2])])});
    }
    return TriMesh(std::move(vertices), std::move(triangles), n, std::move(fold), Rect{0.0, 0.0, periods.x(), periods.y()},
        true);
}

} // namespace femlr
