// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/response.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace femlr {

ResponsePair solve_response(const SparseMatrix& K, const SparseMatrix& M, const SparseMatrix& L, const EigenPair& pair,
    std::span<const VectorX> partners)
{
    const Index n = K.rows();
    if (M.rows() != n || L.rows() != n || pair.u.size() != n)
        throw Error("K, M, L and the eigenvector must share one dimension", "response");
    for (const auto& v : partners)
        if (v.size() != n) throw Error("cluster partners must match the eigenvector dimension", "response");

    const Index c = 1 + static_cast<Index>(partners.size());
    MatrixX MU(n, c);
    MU.col(0) = M * pair.u;
    for (Index j = 1; j < c; ++j) MU.col(j) = M * partners[static_cast<size_t>(j - 1)];

    const SparseMatrix shifted = K - pair.lambda * M;
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<size_t>(shifted.nonZeros() + 2 * n * c));
    for (Index k = 0; k < shifted.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(shifted, k); it; ++it) triplets.emplace_back(it.row(), it.col(), it.value());
    for (Index j = 0; j < c; ++j)
        for (Index i = 0; i < n; ++i) {
            if (MU(i, j) == 0.0) continue;
            triplets.emplace_back(i, n + j, -MU(i, j));
            triplets.emplace_back(n + j, i, MU(i, j));
        }
    SparseMatrix bordered(n + c, n + c);
    bordered.setFromTriplets(triplets.begin(), triplets.end());
    bordered.makeCompressed();

    VectorX rhs = VectorX::Zero(n + c);
    rhs.head(n) = -(L * pair.u);

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(bordered);
    lu.factorize(bordered);
    if (lu.info() != Eigen::Success)
        throw Error("bordered matrix is singular (eigenvalue not simple?): " + lu.lastErrorMessage(), "response");
    VectorX sol = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !sol.allFinite()) throw Error("bordered solve failed", "response");

    // One step of iterative refinement.
    const VectorX r0 = rhs - bordered * sol;
    sol += lu.solve(r0);

    ResponsePair out;
    out.u_dot = sol.head(n);
    out.lambda_dot = sol[n];
    const VectorX r = rhs - bordered * sol;
    const double scale = std::max(rhs.norm(), 1e-300);
    out.residual = r.norm() / scale;
    out.orthogonality = MU.col(0).dot(out.u_dot);
    if (c > 1) out.coupling = sol.tail(c - 1).cwiseAbs().maxCoeff();
    return out;
}

ClusterChoice resolve_cluster(const std::vector<EigenPair>& pairs, std::span<const std::size_t> cluster,
    const SparseMatrix& L, double split_tol)
{
    if (cluster.empty()) throw Error("empty eigenvalue cluster", "response");
    ClusterChoice out;
    out.pair = pairs.at(cluster[0]);
    if (cluster.size() == 1) return out;

    const Index n = out.pair.u.size();
    const Index c = static_cast<Index>(cluster.size());
    MatrixX U(n, c);
    for (Index j = 0; j < c; ++j) U.col(j) = pairs.at(cluster[static_cast<size_t>(j)]).u;
    MatrixX G = U.transpose() * (L * U);
    G = 0.5 * (G + G.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixX> es(G);
    const VectorX mu = es.eigenvalues();
    const double spread = mu.maxCoeff() - mu.minCoeff();
    const double scale = std::max(mu.cwiseAbs().maxCoeff(), 1e-300);
    out.split = spread / scale;

    MatrixX W = MatrixX::Identity(c, c);
    if (out.split > split_tol) {
        // The perturbation lifts the degeneracy; continue along the direction of
        // the projected response closest to the given vector.
        W = es.eigenvectors();
        Index best = 0;
        W.row(0).cwiseAbs().maxCoeff(&best);
        W.col(0).swap(W.col(best));
    }
    const MatrixX X = U * W;
    out.pair.u = X.col(0);
    apply_sign_convention(out.pair.u);
    for (Index j = 1; j < c; ++j) out.partners.push_back(X.col(j));
    return out;
}

double rayleigh_lambda_dot(const SparseMatrix& M, const SparseMatrix& L, const VectorX& u)
{
    return u.dot(L * u) / u.dot(M * u);
}

Prediction predict(const EigenPair& pair, const ResponsePair& response, double eps)
{
    return {pair.u + eps * response.u_dot, pair.lambda + eps * response.lambda_dot};
}

EigenPair track_pair(const std::vector<EigenPair>& candidates, const VectorX& u0, const SparseMatrix& M, double min_overlap,
    double cluster_tol)
{
    if (candidates.empty()) throw Error("no eigenpairs to track", "response");
    const VectorX mu0 = M * u0;
    size_t best = 0;
    double best_overlap = -1.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const double o = std::abs(candidates[i].u.dot(mu0)) / (m_norm(candidates[i].u, M) * std::sqrt(u0.dot(mu0)));
        if (o > best_overlap) {
            best_overlap = o;
            best = i;
        }
    }
    if (best_overlap < min_overlap) {
        std::ostringstream os;
        os << "eigenvalue tracking failed: best overlap " << best_overlap;
        throw Error(os.str(), "response");
    }
    EigenPair p = candidates[best];
    std::vector<std::size_t> group = eigen_cluster(candidates, best, cluster_tol);
    if (group.size() > 1) {
        // Degenerate eigenspace: the tracked vector is the projection of u0 onto it.
        VectorX proj = VectorX::Zero(u0.size());
        for (std::size_t i : group) {
            const VectorX& v = candidates[i].u;
            proj += (v.dot(mu0) / v.dot(M * v)) * v;
        }
        const double nrm = m_norm(proj, M);
        if (!(nrm > 0.0)) throw Error("eigenvalue tracking failed: zero projection", "response");
        p.u = proj / nrm;
        return p;
    }
    p.u = align_sign(p.u, u0, M);
    return p;
}

FdReport validate_fd(const PerturbedProblem& problem, const EigenPair& pair, const ResponsePair& response,
    const SparseMatrix& M, const std::vector<double>& eps_list)
{
    FdReport report;
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw Error("finite-difference steps must be positive", "response");
        const EigenPair plus = track_pair(problem(eps), pair.u, M);
        const EigenPair minus = track_pair(problem(-eps), pair.u, M);
        FdRow row;
        row.eps = eps;
        row.lambda_plus = plus.lambda;
        row.lambda_minus = minus.lambda;
        row.lambda_dot_fd = (plus.lambda - minus.lambda) / (2 * eps);
        row.lambda_dot_error = std::abs(response.lambda_dot - row.lambda_dot_fd);
        row.lambda_dot_rel_error = row.lambda_dot_error / std::max(std::abs(row.lambda_dot_fd), 1e-300);
        const VectorX u_fd = (plus.u - minus.u) / (2 * eps);
        row.u_dot_error = m_norm(response.u_dot - u_fd, M);
        row.u_dot_rel_error = row.u_dot_error / std::max(m_norm(u_fd, M), 1e-300);
        report.rows.push_back(row);
    }
    report.lambda_decreasing = true;
    report.u_decreasing = true;
    for (size_t i = 1; i < report.rows.size(); ++i) {
        if (report.rows[i].eps >= report.rows[i - 1].eps) continue;
        if (!(report.rows[i].lambda_dot_error < report.rows[i - 1].lambda_dot_error)) report.lambda_decreasing = false;
        if (!(report.rows[i].u_dot_error < report.rows[i - 1].u_dot_error)) report.u_decreasing = false;
    }
    return report;
}

} // namespace femlr
