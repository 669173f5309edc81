// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/mesh.hpp>
#include <femlr/types.hpp>

#include <array>
#include <functional>
#include <optional>
#include <vector>

namespace femlr {

using PointMap = std::function<Vec2(const Vec2&)>;

struct LevelSetOptions
{
    /// Map applied to the curve for its image length (identity when empty).
    PointMap map;
    /// Image-space periods for minimum-image distances on a torus.
    std::optional<Vec2> image_periods;
    /// Pieces each segment is cut into before mapping.
    int subdivisions = 8;
    int threads = 0;
};

/// Zero set {u = c} of a P1 function with its Cheeger data.
struct LevelSetCurve
{
    double c = 0.0;
    std::vector<std::array<Vec2, 2>> segments;
    /// Element that produced each segment.
    std::vector<Index> elements;
    double length = 0.0;
    double image_length = 0.0;
    double area_below = 0.0; // |{u < c}|
    double area_above = 0.0; // |{u > c}|

    bool empty() const { return segments.empty(); }
};

///
/// Marching-triangles extraction of {u = c}. Each element crossed by the level
/// contributes one segment between the linear interpolation zeros on its two
/// crossing edges; side areas come from clipping the element along that
/// segment. Nodal values exactly equal to c are lifted by 1e-14·(max u − min u).
/// Segments are in the element's unwrapped chart. Throws Error for constant u.
///
LevelSetCurve extract_level_set(const TriMesh& mesh, const VectorX& u, double c, const LevelSetOptions& options = {});

/// Dynamic Cheeger value ½(ℓ(Γ) + ℓ(T(Γ))) / min(|Ω₁|, |Ω₂|).
double cheeger_value(const LevelSetCurve& curve);

struct LineSearchResult
{
    double c_star = 0.0;
    double h_star = 0.0;
    std::vector<double> levels;
    std::vector<double> values; // NaN where the level was skipped
};

///
/// Minimises the Cheeger value over grid_size uniformly spaced levels strictly
/// inside (0, max u), or (min u, max u) when `full_range` is set.
///
LineSearchResult line_search_c(const TriMesh& mesh, const VectorX& u, const LevelSetOptions& options,
    Index grid_size = 100, bool full_range = false);

struct LevelVelocityField
{
    std::vector<Vec2> velocity;
    std::vector<Vec2> gradient; // recovered nodal ∇u₀
    std::vector<bool> masked;
    double grad_floor = 0.0;
};

/// Area-weighted average of the elementwise constant gradients at each node.
std::vector<Vec2> recover_gradient(const TriMesh& mesh, const VectorX& u);

///
/// v_level = −u̇₀ ∇u₀ / |∇u₀| at every node, with ∇u₀ recovered by
/// area-weighted averaging. Nodes where |∇u₀| < grad_floor are masked and get
/// a zero vector; a negative grad_floor selects 1e-3·max|∇u₀|.
///
LevelVelocityField level_velocity(const TriMesh& mesh, const VectorX& u0, const VectorX& u_dot, double grad_floor = -1.0);

} // namespace femlr
