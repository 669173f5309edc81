// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <femlr/types.hpp>

#include <vector>

namespace femlr {

/// Generalised eigenpair K u = λ M u with uᵀMu = 1 and its largest-magnitude entry positive.
struct EigenPair
{
    double lambda = 0.0;
    VectorX u;
    /// ‖Ku − λMu‖ / ((‖K‖₁ + |λ|‖M‖₁)‖u‖), the normwise backward error.
    double residual = 0.0;
};

struct EigsOptions
{
    /// Shift of the shift-invert operator; σM − K is positive definite for σ > 0
    /// and σ = 1 keeps the operator norm at most one.
    double sigma = 1.0;
    /// Ritz residual tolerance relative to the Ritz value.
    double tol = 1e-10;
    /// Restart cap is max_restarts_per_pair·k.
    int max_restarts_per_pair = 10;
    /// Krylov subspace dimension (0: automatic).
    Index subspace = 0;
    /// Problems up to this size use a dense solver directly.
    Index dense_below = 500;
    /// Problems up to this size fall back to the dense solver if Lanczos stalls.
    Index dense_fallback = 2000;
    unsigned seed = 20240531u;
};

///
/// The k algebraically largest eigenvalues of the symmetric pencil (K, M)
/// (M positive definite, K negative semidefinite), in descending order, with
/// M-orthonormal eigenvectors.
///
/// Uses thick-restart Lanczos in the M inner product on (σM − K)⁻¹M with a
/// sparse Cholesky factorisation. Eigenvalues are returned as Rayleigh quotients.
///
std::vector<EigenPair> eigs(const SparseMatrix& K, const SparseMatrix& M, Index k, const EigsOptions& options = {});

/// Dense reference solver (all eigenpairs, descending).
std::vector<EigenPair> eigs_dense(const SparseMatrix& K, const SparseMatrix& M, Index k);

/// u or −u, whichever has nonnegative M-inner product with `reference`.
/// An exactly M-orthogonal pair is returned unchanged with a warning.
VectorX align_sign(const VectorX& u, const VectorX& reference, const SparseMatrix& M);

/// M-weighted norm √(vᵀMv).
double m_norm(const VectorX& v, const SparseMatrix& M);

/// Relative gap of pairs[index] to its neighbours; warns below 1e-6 (non-simple eigenvalue).
double check_simple(const std::vector<EigenPair>& pairs, std::size_t index);

/// Indices of the pairs whose eigenvalue lies within rel_tol·max(|λ|, 1) of pairs[index].
std::vector<std::size_t> eigen_cluster(const std::vector<EigenPair>& pairs, std::size_t index, double rel_tol = 1e-8);

/// Fix the sign so that the first entry whose magnitude is within a relative
/// 1e-8 of the largest is positive. The tolerance makes the choice stable for
/// eigenvectors of symmetric problems, whose extreme entries tie.
void apply_sign_convention(VectorX& u);

/// Normalise to uᵀMu = 1 and apply the sign convention.
void normalize_pair(VectorX& u, const SparseMatrix& M);

} // namespace femlr
