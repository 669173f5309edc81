// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/types.hpp>

#include <array>
#include <vector>

namespace femlr {

/// Symmetric quadrature on the reference triangle. Weights are relative to the
/// triangle area and sum to one.
struct QuadratureRule
{
    int degree = 0;
    std::vector<Eigen::Vector3d> points; // barycentric
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
};

///
/// Gauss rule exact to `degree`. Supported degrees are 1 (centroid), 2 (3 points),
/// 3 (6 points, exact to degree 4) and 5 (7 points). Degree 4 and anything in
/// between falls back to the next supported rule with a warning.
///
QuadratureRule gauss_rule(int degree);

/// Physical location of a barycentric point in the triangle (a, b, c).
template <typename Scalar>
Vector2<Scalar> map_to_element(const Eigen::Vector3d& bary,
    const Vector2<Scalar>& a,
    const Vector2<Scalar>& b,
    const Vector2<Scalar>& c)
{
    return Scalar(bary[0]) * a + Scalar(bary[1]) * b + Scalar(bary[2]) * c;
}

} // namespace femlr
