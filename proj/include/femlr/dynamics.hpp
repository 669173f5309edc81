// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/mesh.hpp>
#include <femlr/ode.hpp>
#include <femlr/types.hpp>

#include <functional>
#include <optional>
#include <string>

namespace femlr {

/// Everything a discretisation needs from the dynamics at one point.
struct DynamicsSample
{
    Vec2 image;        // T₀(x)
    Mat2 jacobian;     // DT₀(x)
    Vec2 map_dot;      // Ṫ₀(x)
    Mat2 jacobian_dot; // DṪ₀(x)
};

///
/// Evaluator bundle for a map T₀ and its parameter derivative Ṫ₀.
///
/// `sample` returns all four quantities at once and is what the assembly
/// routines call; it lets flow-backed models share one integration.
///
struct DynamicsModel
{
    std::string name;
    std::function<Vec2(const Vec2&)> map;
    std::function<Mat2(const Vec2&)> jacobian;
    std::function<Vec2(const Vec2&)> map_dot;
    std::function<Mat2(const Vec2&)> jacobian_dot;
    std::function<DynamicsSample(const Vec2&)> sample;
    /// Set for maps of the flat torus [0,P₁)×[0,P₂); images are reduced mod P.
    std::optional<Vec2> torus_periods;
    /// Set for maps of a rectangle onto itself.
    std::optional<Rect> invariant_domain;
    bool has_jacobian = true;
};

/// One-parameter family ε ↦ T_ε; `at(0)` is the unperturbed model.
struct DynamicsFamily
{
    std::string name;
    std::function<DynamicsModel(double eps)> at;
};

/// Chirikov standard map on [0,2π)² with nonlinearity a; Ṫ is ∂/∂a.
DynamicsModel standard_map(double a);
DynamicsFamily standard_map_family(double a);

/// Non-autonomous planar vector field with its spatial Jacobian.
struct FlowSpec
{
    std::function<Vec2(const Vec2& x, double t)> velocity;
    std::function<Mat2(const Vec2& x, double t)> velocity_jacobian;
    double t0 = 0.0;
    double t1 = 0.0;
    OdeOptions tolerances;
    std::optional<Rect> invariant_domain;
};

struct FlowResult
{
    Vec2 image;
    Mat2 jacobian;
};

/// Flow map φ^{t0,t1}(x) together with its Jacobian from the variational equation.
FlowResult flow_map(const FlowSpec& spec, const Vec2& x);

/// Flow map position only (no variational equation).
Vec2 flow_position(const FlowSpec& spec, const Vec2& x);

/// Frame in which the flow-time derivative Ṫ₀ = v(·, t1) is evaluated.
enum class MapDotFrame
{
    /// Ṫ₀(x) = v(T₀(x), t1): the trajectory velocity at the final time.
    Lagrangian,
    /// Ṫ₀(x) = v(x, t1): the velocity field evaluated at the initial point.
    Eulerian,
};

/// Flow map T₀ = φ^{t0,t1} with the final time as parameter (T_ε = φ^{t0,t1+ε}).
DynamicsModel flow_time_model(const FlowSpec& spec, MapDotFrame frame = MapDotFrame::Lagrangian);
DynamicsFamily flow_time_family(const FlowSpec& spec, MapDotFrame frame = MapDotFrame::Lagrangian);

/// Smooth transition s(t): 0 before 0, t²(3−2t) on [0,1], 1 after 1.
double transition(double t);

/// Transitory double gyre on [0,1]² (Hamiltonian H = −ψ, ẋ = −ψ_y, ẏ = ψ_x).
FlowSpec double_gyre_spec(double t0, double t1);

/// T = identity with Ṫ = 0, on a torus or a rectangle.
DynamicsModel identity_model(std::optional<Vec2> torus_periods = std::nullopt, std::optional<Rect> domain = std::nullopt);

/// Central-difference Jacobian of `model.map`, torus aware.
Mat2 finite_difference_jacobian(const DynamicsModel& model, const Vec2& x, double h);

} // namespace femlr
