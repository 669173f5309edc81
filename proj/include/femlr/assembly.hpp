// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/LU>

#include <femlr/dynamics.hpp>
#include <femlr/mesh.hpp>
#include <femlr/quadrature.hpp>
#include <femlr/types.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace femlr {

/// Symmetric 2×2 coefficient x ↦ A(x).
using CoeffField = std::function<Mat2(const Vec2&)>;

/// Condition-number bound on DT beyond which the coefficient is rejected.
inline constexpr double kMaxJacobianCondition = 1e12;

///
/// A = ½(I + (DTᵀDT)⁻¹), the averaged inverse Cauchy–Green coefficient of
/// the dynamic Laplacian. Throws Error when DTᵀDT is numerically singular.
///
template <typename Scalar>
Matrix2<Scalar> dynamic_coefficient(const Matrix2<Scalar>& jacobian)
{
    using std::abs;
    using std::sqrt;
    const Matrix2<Scalar> cg = jacobian.transpose() * jacobian;
    // det(DTᵀDT) = det(DT)², which avoids the cancellation in cg.determinant()
    // for strongly stretching maps.
    const Scalar dj = jacobian.determinant();
    const Scalar tr = cg.trace(), det = dj * dj;
    const Scalar disc = sqrt(std::max(Scalar(0), tr * tr / 4 - det));
    const Scalar lmax = tr / 2 + disc;
    if (!(abs(dj) > Scalar(0)) || lmax > Scalar(kMaxJacobianCondition) * abs(dj))
        throw Error("Cauchy–Green tensor is singular", "assembly");
    Matrix2<Scalar> inv;
    inv << cg(1, 1), -cg(0, 1), -cg(1, 0), cg(0, 0);
    return Scalar(0.5) * (Matrix2<Scalar>::Identity() + inv / det);
}

///
/// Ȧ = −(DT⁻¹ · DṪ · DT⁻¹ · DT⁻ᵀ)^sym, the ε-derivative of the coefficient.
///
template <typename Scalar>
Matrix2<Scalar> dynamic_coefficient_derivative(const Matrix2<Scalar>& jacobian, const Matrix2<Scalar>& jacobian_dot)
{
    // Validates conditioning with the same rule as the coefficient itself.
    (void)dynamic_coefficient(jacobian);
    const Matrix2<Scalar> inv = jacobian.inverse();
    return -sym(inv * jacobian_dot * inv * inv.transpose());
}

CoeffField coeff_A0(const DynamicsModel& model);
CoeffField coeff_A0dot(const DynamicsModel& model);

/// Exact P1 mass matrix.
SparseMatrix assemble_mass(const TriMesh& mesh);

/// Positive P1 Laplace stiffness ∫∇φ_j·∇φ_k.
SparseMatrix assemble_laplace(const TriMesh& mesh);

///
/// K[j][k] = −∫ A ∇φ_j·∇φ_k with A evaluated at the physical quadrature
/// points of `rule`. Passing Ȧ instead of A yields the response matrix L.
///
SparseMatrix assemble_stiffness_cg(const TriMesh& mesh, const CoeffField& field, const QuadratureRule& rule);

/// Same, with the coefficient precomputed per (element, quadrature point),
/// stored element-major.
SparseMatrix assemble_stiffness_cg(const TriMesh& mesh, std::span<const Mat2> coefficients, const QuadratureRule& rule);

/// Dynamics sampled once at every (element, quadrature point), element-major.
std::vector<DynamicsSample> sample_quadrature_points(
    const TriMesh& mesh, const DynamicsModel& model, const QuadratureRule& rule, int threads = 0);

struct StiffnessPair
{
    SparseMatrix K;
    SparseMatrix L;
};

/// CG discretisation: one dynamics sample per quadrature point feeds both A₀ and Ȧ₀.
StiffnessPair assemble_cg(const TriMesh& mesh, const DynamicsModel& model, const QuadratureRule& rule, int threads = 0);

struct TransferOperatorResult
{
    SparseMatrix K;
    SparseMatrix L;
    TriMesh image_mesh;
    /// Ṫ₀ at the nodes (the matrix W, one column per node).
    std::vector<Vec2> node_velocity;
};

///
/// Adaptive transfer-operator discretisation. Nodes are mapped by T₀ and
/// re-triangulated; since node i of the image mesh is T₀(xᵢ), the pushforward
/// of φᵢ is the image-mesh hat function at that node. K = −½(K⁰ + K¹) with K⁰, K¹
/// the Laplace stiffness on the two meshes, and L is assembled on the image
/// mesh from the elementwise constant (W·DΦ)^sym.
///
/// For a map of a rectangle onto itself, images are clamped to the rectangle
/// and the image of a node on a side is snapped back onto that side when within 1e-6·extent of it.
///
TransferOperatorResult assemble_to(const TriMesh& mesh, const DynamicsModel& model, int threads = 0);

/// L on a given image mesh from node values of Ṫ₀.
SparseMatrix assemble_to_response(const TriMesh& image_mesh, std::span<const Vec2> node_velocity);

/// Nodes that carry unknowns under `kind` (all nodes for Neumann).
std::vector<Index> free_nodes(const TriMesh& mesh, BoundaryKind kind);

/// Principal submatrix on `keep` (sorted node indices).
SparseMatrix restrict_matrix(const SparseMatrix& a, std::span<const Index> keep);
VectorX restrict_vector(const VectorX& v, std::span<const Index> keep);
/// Inverse of restrict_vector with zeros on removed entries.
VectorX extend_vector(const VectorX& v, std::span<const Index> keep, Index full_size);

} // namespace femlr
