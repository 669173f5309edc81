// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/coherent.hpp>
#include <femlr/dynamics.hpp>

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace femlr;

namespace {

constexpr double kPi = std::numbers::pi;

VectorX nodal(const TriMesh& mesh, const std::function<double(const Vec2&)>& f)
{
    VectorX u(mesh.node_count());
    for (Index i = 0; i < mesh.node_count(); ++i) u[i] = f(mesh.node(i));
    return u;
}

} // namespace

TEST_CASE("straight level set of u = x")
{
    const TriMesh mesh = grid_mesh(10, 10, {0.0, 0.0, 1.0, 1.0}, false);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return p.x(); });
    const LevelSetCurve c = extract_level_set(mesh, u, 0.33);
    CHECK(c.length == doctest::Approx(1.0));
    CHECK(c.image_length == doctest::Approx(1.0));
    CHECK(c.area_below == doctest::Approx(0.33));
    CHECK(c.area_above == doctest::Approx(0.67));
    CHECK(c.segments.size() == c.elements.size());
    for (const auto& s : c.segments) {
        CHECK(s[0].x() == doctest::Approx(0.33));
        CHECK(s[1].x() == doctest::Approx(0.33));
    }
    CHECK(cheeger_value(c) == doctest::Approx(1.0 / 0.33));
}

TEST_CASE("levels through nodes are lifted and areas still partition the domain")
{
    const TriMesh mesh = grid_mesh(10, 10, {0.0, 0.0, 1.0, 1.0}, false);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return p.x(); });
    const LevelSetCurve c = extract_level_set(mesh, u, 0.5);
    CHECK(c.length == doctest::Approx(1.0));
    CHECK(c.area_below + c.area_above == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(c.area_below == doctest::Approx(0.5));
}

TEST_CASE("segment endpoints interpolate the crossing edges")
{
    const TriMesh mesh = grid_mesh(16, 16, {0.0, 0.0, 1.0, 1.0}, false);
    const auto f = [](const Vec2& p) { return std::sin(3 * p.x()) * std::cos(2 * p.y()) + 0.3 * p.y(); };
    const VectorX u = nodal(mesh, f);
    const double level = 0.2;
    const LevelSetCurve c = extract_level_set(mesh, u, level);
    REQUIRE(!c.empty());
    CHECK(c.area_below + c.area_above == doctest::Approx(1.0).epsilon(1e-8));
    for (size_t k = 0; k < c.segments.size(); ++k) {
        const auto nodes = mesh.triangle_nodes(c.elements[k]);
        const auto p = mesh.triangle_coords(c.elements[k]);
        for (const Vec2& e : c.segments[k]) {
            // e lies on an edge (p_i, p_j) with u_i ≤ c ≤ u_j or vice versa, at the interpolated point
            bool found = false;
            for (int i = 0; i < 3 && !found; ++i) {
                const int j = (i + 1) % 3;
                const double ui = u[nodes[i]], uj = u[nodes[j]];
                if ((ui - level) * (uj - level) > 0) continue;
                const double t = (level - ui) / (uj - ui);
                found = (e - (p[i] + t * (p[j] - p[i]))).norm() < 1e-12;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("circle under identity dynamics has Cheeger value 2/r")
{
    const TriMesh mesh = grid_mesh(128, 128, {0.0, 0.0, 1.0, 1.0}, false);
    const double r = 0.25;
    const VectorX u = nodal(mesh, [](const Vec2& p) { return 0.0625 - (p - Vec2(0.5, 0.5)).squaredNorm(); });
    LevelSetOptions opts;
    opts.map = identity_model().map;
    const LevelSetCurve c = extract_level_set(mesh, u, 0.0, opts);
    CHECK(c.length == doctest::Approx(2 * kPi * r).epsilon(1e-3));
    CHECK(c.area_above == doctest::Approx(kPi * r * r).epsilon(1e-3));
    CHECK(std::abs(cheeger_value(c) - 8.0) < 0.08);
}

TEST_CASE("Cheeger value is invariant under rescaling u")
{
    const TriMesh mesh = grid_mesh(24, 24, {0.0, 0.0, 1.0, 1.0}, false);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return std::cos(kPi * p.x()) + 0.2 * p.y(); });
    for (double alpha : {0.01, 3.0, 1e4}) {
        const double h0 = cheeger_value(extract_level_set(mesh, u, 0.1));
        const double h1 = cheeger_value(extract_level_set(mesh, VectorX(alpha * u), alpha * 0.1));
        CHECK(h1 == doctest::Approx(h0).epsilon(1e-10));
    }
    const LineSearchResult a = line_search_c(mesh, u, {}, 50);
    const LineSearchResult b = line_search_c(mesh, VectorX(7.0 * u), {}, 50);
    CHECK(b.c_star == doctest::Approx(7.0 * a.c_star));
    CHECK(b.h_star == doctest::Approx(a.h_star));
}

TEST_CASE("line search agrees with a dense brute-force scan")
{
    const TriMesh mesh = grid_mesh(16, 32, {0.0, 0.0, 1.0, 2.0}, false);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return std::cos(kPi * p.y() / 2); });
    const LineSearchResult ls = line_search_c(mesh, u, {}, 100);
    CHECK(ls.levels.size() == 100);
    CHECK(ls.values.size() == 100);
    const double umax = u.maxCoeff();
    CHECK(ls.levels.front() > 0.0);
    CHECK(ls.levels.back() < umax);

    double best_c = 0.0, best_h = std::numeric_limits<double>::infinity();
    for (int i = 1; i < 1000; ++i) {
        const double c = umax * i / 1000.0;
        const LevelSetCurve curve = extract_level_set(mesh, u, c);
        if (curve.empty() || curve.area_below <= 0 || curve.area_above <= 0) continue;
        const double h = cheeger_value(curve);
        if (h < best_h) {
            best_h = h;
            best_c = c;
        }
    }
    CHECK(ls.h_star >= best_h - 1e-12);
    CHECK(ls.h_star <= best_h * 1.01);
    CHECK(std::abs(ls.c_star - best_c) <= 2 * umax / 101);
    // the horizontal line y = 1 (the symmetric bisector, c = 0) is the shortest split
    CHECK(ls.c_star < 0.05);
}

TEST_CASE("full-range search starts from the minimum")
{
    const TriMesh mesh = grid_mesh(16, 16, {0.0, 0.0, 1.0, 1.0}, false);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return p.x() - 0.7; });
    const LineSearchResult ls = line_search_c(mesh, u, {}, 20, true);
    CHECK(ls.levels.front() < 0.0);
    // equal areas at x = 0.5
    CHECK(std::abs(ls.c_star + 0.2) < 0.05);
}

TEST_CASE("image length on the torus uses minimum-image distances")
{
    constexpr double tau = 2 * kPi;
    const TriMesh mesh = grid_mesh(40, 40, {0.0, 0.0, tau, tau}, true);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return std::sin(p.x()); });
    LevelSetOptions opts;
    const DynamicsModel m = standard_map(0.98);
    opts.map = m.map;
    opts.image_periods = m.torus_periods;
    const LevelSetCurve c = extract_level_set(mesh, u, 0.0, opts);
    // two vertical circles x = 0, x = π, each of length 2π
    CHECK(c.length == doctest::Approx(2 * tau).epsilon(1e-10));
    CHECK(c.area_below == doctest::Approx(tau * tau / 2).epsilon(1e-3));
    // T maps {x = x₀} to a line of slope one: length √2·2π per circle
    CHECK(c.image_length == doctest::Approx(2 * std::sqrt(2.0) * tau).epsilon(1e-6));
}

TEST_CASE("degenerate inputs")
{
    const TriMesh mesh = grid_mesh(4, 4, {0.0, 0.0, 1.0, 1.0}, false);
    CHECK_THROWS_AS(extract_level_set(mesh, VectorX::Constant(25, 2.0), 1.0), Error);
    const VectorX u = nodal(mesh, [](const Vec2& p) { return p.x(); });
    CHECK(extract_level_set(mesh, u, 2.0).empty());
    CHECK_THROWS_AS(cheeger_value(extract_level_set(mesh, u, 2.0)), Error);
}

TEST_CASE("level-set velocity of a linear field")
{
    const TriMesh mesh = grid_mesh(8, 8, {0.0, 0.0, 1.0, 1.0}, false);
    const VectorX u0 = nodal(mesh, [](const Vec2& p) { return 2.0 * p.x(); });
    const VectorX ud = VectorX::Constant(mesh.node_count(), 0.5);
    const LevelVelocityField v = level_velocity(mesh, u0, ud);
    for (Index i = 0; i < mesh.node_count(); ++i) {
        CHECK(v.gradient[static_cast<size_t>(i)].isApprox(Vec2(2.0, 0.0)));
        CHECK(v.velocity[static_cast<size_t>(i)].isApprox(Vec2(-0.5, 0.0)));
        CHECK(!v.masked[static_cast<size_t>(i)]);
    }
}

TEST_CASE("level-set velocity masks flat regions")
{
    const TriMesh mesh = grid_mesh(20, 4, {-1.0, 0.0, 1.0, 1.0}, false);
    const VectorX u0 = nodal(mesh, [](const Vec2& p) { return p.x() * p.x(); });
    const VectorX ud = VectorX::Ones(mesh.node_count());
    const LevelVelocityField v = level_velocity(mesh, u0, ud, 0.15);
    CHECK(v.grad_floor == 0.15);
    bool any_masked = false;
    for (Index i = 0; i < mesh.node_count(); ++i) {
        const auto k = static_cast<size_t>(i);
        if (std::abs(mesh.node(i).x()) < 1e-12) {
            CHECK(v.masked[k]);
            CHECK(v.velocity[k].norm() == 0.0);
        }
        any_masked = any_masked || v.masked[k];
        if (!v.masked[k]) CHECK(v.velocity[k].norm() == doctest::Approx(1.0));
    }
    CHECK(any_masked);
    const LevelVelocityField d = level_velocity(mesh, u0, ud);
    CHECK(d.grad_floor == doctest::Approx(1e-3 * 2.0).epsilon(0.2));
}
