// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/coherent.hpp>
#include <femlr/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace femlr {

namespace {

Vec2 min_image(Vec2 d, const std::optional<Vec2>& periods)
{
    if (periods)
        for (int k = 0; k < 2; ++k) d[k] -= (*periods)[k] * std::round(d[k] / (*periods)[k]);
    return d;
}

} // namespace

LevelSetCurve extract_level_set(const TriMesh& mesh, const VectorX& u, double c, const LevelSetOptions& options)
{
    if (u.size() != mesh.node_count()) throw Error("field size does not match the mesh", "coherent");
    const double umin = u.minCoeff(), umax = u.maxCoeff();
    if (!(umax > umin)) throw Error("degenerate field: u is constant", "coherent");
    const double lift = 1e-14 * (umax - umin);

    LevelSetCurve curve;
    curve.c = c;
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto nodes = mesh.triangle_nodes(t);
        const auto p = mesh.triangle_coords(t);
        const double area = signed_area(p[0], p[1], p[2]);
        std::array<double, 3> f;
        for (int i = 0; i < 3; ++i) {
            f[static_cast<size_t>(i)] = u[nodes[static_cast<size_t>(i)]] - c;
            if (f[static_cast<size_t>(i)] == 0.0) f[static_cast<size_t>(i)] = lift;
        }
        const int above = (f[0] > 0) + (f[1] > 0) + (f[2] > 0);
        if (above == 0 || above == 3) {
            (above == 3 ? curve.area_above : curve.area_below) += area;
            continue;
        }
        // The isolated vertex is the one whose side holds a single corner.
        const bool iso_above = above == 1;
        int a = 0;
        while ((f[static_cast<size_t>(a)] > 0) != iso_above) ++a;
        const int b = (a + 1) % 3, d = (a + 2) % 3;
        const double fa = f[static_cast<size_t>(a)];
        const double tb = fa / (fa - f[static_cast<size_t>(b)]);
        const double td = fa / (fa - f[static_cast<size_t>(d)]);
        const Vec2& pa = p[static_cast<size_t>(a)];
        const Vec2 q0 = pa + tb * (p[static_cast<size_t>(b)] - pa);
        const Vec2 q1 = pa + td * (p[static_cast<size_t>(d)] - pa);
        const double corner = area * tb * td;
        (iso_above ? curve.area_above : curve.area_below) += corner;
        (iso_above ? curve.area_below : curve.area_above) += area - corner;
        curve.segments.push_back({q0, q1});
        curve.elements.push_back(t);
        curve.length += (q1 - q0).norm();
    }

    if (!options.map || curve.segments.empty()) {
        curve.image_length = curve.length;
        return curve;
    }
    const int pieces = std::max(1, options.subdivisions);
    std::vector<double> lengths(curve.segments.size());
    parallel_for(static_cast<Index>(curve.segments.size()), options.threads, [&](Index s) {
        const auto& seg = curve.segments[static_cast<size_t>(s)];
        Vec2 prev = options.map(seg[0]);
        double len = 0.0;
        for (int k = 1; k <= pieces; ++k) {
            const Vec2 x = seg[0] + (static_cast<double>(k) / pieces) * (seg[1] - seg[0]);
            const Vec2 y = options.map(x);
            len += min_image(y - prev, options.image_periods).norm();
            prev = y;
        }
        lengths[static_cast<size_t>(s)] = len;
    });
    for (double l : lengths) curve.image_length += l;
    return curve;
}

double cheeger_value(const LevelSetCurve& curve)
{
    const double smaller = std::min(curve.area_below, curve.area_above);
    if (!(smaller > 0.0)) throw Error("level set does not split the domain (zero area side)", "coherent");
    return 0.5 * (curve.length + curve.image_length) / smaller;
}

LineSearchResult line_search_c(
    const TriMesh& mesh, const VectorX& u, const LevelSetOptions& options, Index grid_size, bool full_range)
{
    if (grid_size < 1) throw Error("line search needs at least one level", "coherent");
    const double umax = u.maxCoeff(), umin = u.minCoeff();
    if (!(umax > umin)) throw Error("degenerate field: u is constant", "coherent");
    const double lo = full_range ? umin : 0.0;
    if (!(umax > lo)) throw Error("no positive levels to search", "coherent");

    LineSearchResult r;
    r.h_star = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < grid_size; ++i) {
        const double c = lo + (umax - lo) * static_cast<double>(i + 1) / static_cast<double>(grid_size + 1);
        r.levels.push_back(c);
        const LevelSetCurve curve = extract_level_set(mesh, u, c, options);
        if (curve.empty() || !(std::min(curve.area_below, curve.area_above) > 0.0)) {
            r.values.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double h = cheeger_value(curve);
        r.values.push_back(h);
        if (h < r.h_star) {
            r.h_star = h;
            r.c_star = c;
        }
    }
    if (!std::isfinite(r.h_star)) throw Error("every level in the line search is degenerate", "coherent");
    return r;
}

std::vector<Vec2> recover_gradient(const TriMesh& mesh, const VectorX& u)
{
    if (u.size() != mesh.node_count()) throw Error("field size does not match the mesh", "coherent");
    std::vector<Vec2> grad(static_cast<size_t>(mesh.node_count()), Vec2::Zero());
    std::vector<double> weight(static_cast<size_t>(mesh.node_count()), 0.0);
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const ElementGeometry g = element_geometry(mesh, t);
        const auto nodes = mesh.triangle_nodes(t);
        Vec2 ge = Vec2::Zero();
        for (int i = 0; i < 3; ++i) ge += u[nodes[static_cast<size_t>(i)]] * g.grad[static_cast<size_t>(i)];
        for (Index n : nodes) {
            grad[static_cast<size_t>(n)] += g.area * ge;
            weight[static_cast<size_t>(n)] += g.area;
        }
    }
    for (size_t n = 0; n < grad.size(); ++n) grad[n] /= weight[n];
    return grad;
}

LevelVelocityField level_velocity(const TriMesh& mesh, const VectorX& u0, const VectorX& u_dot, double grad_floor)
{
    if (u0.size() != mesh.node_count() || u_dot.size() != mesh.node_count())
        throw Error("u0 and u_dot must both have one value per node", "coherent");
    LevelVelocityField field;
    field.gradient = recover_gradient(mesh, u0);
    double gmax = 0.0;
    for (const auto& g : field.gradient) gmax = std::max(gmax, g.norm());
    field.grad_floor = grad_floor < 0.0 ? 1e-3 * gmax : grad_floor;
    field.velocity.assign(field.gradient.size(), Vec2::Zero());
    field.masked.assign(field.gradient.size(), false);
    for (size_t n = 0; n < field.gradient.size(); ++n) {
        const Vec2& g = field.gradient[n];
        const double gn = g.norm();
        if (gn < field.grad_floor || gn == 0.0) {
            field.masked[n] = true;
            continue;
        }
        field.velocity[n] = (-u_dot[static_cast<Index>(n)] / gn) * g;
    }
    return field;
}

} // namespace femlr
