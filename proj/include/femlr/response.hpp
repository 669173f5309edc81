// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/spectral.hpp>
#include <femlr/types.hpp>

#include <functional>
#include <span>
#include <vector>

namespace femlr {

/// First-order response (u̇, λ̇) of an eigenpair with u̇ M-orthogonal to u.
struct ResponsePair
{
    VectorX u_dot;
    double lambda_dot = 0.0;
    /// Relative residual of the bordered system.
    double residual = 0.0;
    /// uᵀ M u̇.
    double orthogonality = 0.0;
    /// Largest |vᵀ L u| over the cluster partners v (zero for a simple eigenvalue).
    double coupling = 0.0;
};

///
/// Solves
///
///     [ K − λM   −Mu ] [ u̇ ]   [ −Lu ]
///     [ uᵀM       0  ] [ λ̇ ] = [  0  ]
///
/// with a sparse LU factorisation. When λ is a repeated eigenvalue the other
/// M-orthonormal eigenvectors of its cluster are passed as `partners`; they
/// border the system as further columns of −MU and rows of UᵀM, so u̇ is
/// M-orthogonal to the whole eigenspace. Throws Error if the bordered matrix
/// is singular.
///
ResponsePair solve_response(const SparseMatrix& K, const SparseMatrix& M, const SparseMatrix& L, const EigenPair& pair,
    std::span<const VectorX> partners = {});

struct ClusterChoice
{
    EigenPair pair;
    std::vector<VectorX> partners;
    /// Relative spread of the eigenvalues of UᵀLU; zero for a simple eigenvalue.
    double split = 0.0;
};

///
/// Picks the eigenvector of a repeated eigenvalue that the perturbation
/// continues. If UᵀLU (U the cluster basis) is a multiple of the identity up to
/// `split_tol`, every vector of the eigenspace continues and the first one is
/// kept; otherwise the eigenvector of UᵀLU with the largest component along the
/// first vector is taken. The remaining directions are returned as partners.
///
ClusterChoice resolve_cluster(const std::vector<EigenPair>& pairs, std::span<const std::size_t> cluster,
    const SparseMatrix& L, double split_tol = 1e-6);

/// λ̇ from the Rayleigh identity uᵀLu / uᵀMu.
double rayleigh_lambda_dot(const SparseMatrix& M, const SparseMatrix& L, const VectorX& u);

struct Prediction
{
    VectorX u;     // u + ε u̇ (not renormalised)
    double lambda; // λ + ε λ̇
};

Prediction predict(const EigenPair& pair, const ResponsePair& response, double eps);

/// The pair among `candidates` with the largest |uᵀMu₀|, sign aligned to u₀.
/// If that eigenvalue is repeated (relative spread below `cluster_tol`), the
/// vector is the normalised M-projection of u₀ onto its eigenspace instead.
/// Throws Error if no candidate overlaps u₀ by more than `min_overlap`.
EigenPair track_pair(const std::vector<EigenPair>& candidates, const VectorX& u0, const SparseMatrix& M,
    double min_overlap = 0.5, double cluster_tol = 1e-8);

/// Pipeline closure: eigenpairs of the problem re-assembled at parameter ε.
using PerturbedProblem = std::function<std::vector<EigenPair>(double eps)>;

struct FdRow
{
    double eps = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
    double lambda_dot_fd = 0.0;
    double lambda_dot_error = 0.0;     // |λ̇ − FD|
    double lambda_dot_rel_error = 0.0; // |λ̇ − FD| / |FD|
    double u_dot_error = 0.0;          // ‖u̇ − FD‖_M
    double u_dot_rel_error = 0.0;      // ‖u̇ − FD‖_M / ‖FD‖_M
};

struct FdReport
{
    std::vector<FdRow> rows;
    /// Both error sequences shrink along the (decreasing) ε list.
    bool lambda_decreasing = false;
    bool u_decreasing = false;
};

///
/// Central-difference check of a response: for each ε, re-solves the problem
/// at ±ε, tracks the eigenpair and compares (λ_ε − λ_{−ε})/2ε and the
/// sign-aligned (u_ε − u_{−ε})/2ε against λ̇ and u̇.
///
FdReport validate_fd(const PerturbedProblem& problem, const EigenPair& pair, const ResponsePair& response,
    const SparseMatrix& M, const std::vector<double>& eps_list);

} // namespace femlr
