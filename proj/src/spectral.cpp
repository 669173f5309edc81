// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/log.hpp>
#include <femlr/spectral.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace femlr {

namespace {

double one_norm(const SparseMatrix& a)
{
    double best = 0.0;
    for (Index k = 0; k < a.outerSize(); ++k) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

EigenPair finish_pair(VectorX u, const SparseMatrix& K, const SparseMatrix& M, double norm_k, double norm_m)
{
    normalize_pair(u, M);
    const VectorX ku = K * u;
    const VectorX mu = M * u;
    EigenPair p;
    p.lambda = u.dot(ku) / u.dot(mu);
    p.residual = (ku - p.lambda * mu).norm() / ((norm_k + std::abs(p.lambda) * norm_m) * u.norm());
    p.u = std::move(u);
    return p;
}

struct LanczosFailure
{
    std::string message;
};

std::vector<EigenPair> lanczos(const SparseMatrix& K, const SparseMatrix& M, Index k, const EigsOptions& opt)
{
    const Index n = K.rows();
    SparseMatrix b = opt.sigma * M - K;
    Eigen::SimplicialLDLT<SparseMatrix> chol(b);
    if (chol.info() != Eigen::Success) throw Error("factorisation of K − σM failed", "spectral");
    if ((chol.vectorD().array() <= 0.0).any())
        throw Error("K − σM is not definite; is K negative semidefinite?", "spectral");

    auto apply = [&](const VectorX& x) -> VectorX { return chol.solve(M * x); };

    const Index m = std::min(n, opt.subspace > 0 ? opt.subspace : std::max<Index>(2 * k + 20, 40));
    if (m <= k) throw Error("subspace dimension must exceed k", "spectral");

    MatrixX V(n, m), MV(n, m), OpV(n, m);
    Index size = 0;

    auto m_orthonormalize = [&](VectorX w, Index count) -> std::pair<VectorX, double> {
        for (int pass = 0; pass < 2; ++pass) {
            const VectorX c = MV.leftCols(count).transpose() * w;
            w -= V.leftCols(count) * c;
        }
        const double nrm = std::sqrt(std::max(0.0, w.dot(M * w)));
        return {w, nrm};
    };

    std::mt19937 rng(opt.seed);
    std::normal_distribution<double> gauss;
    auto random_vector = [&] {
        VectorX r(n);
        for (Index i = 0; i < n; ++i) r[i] = gauss(rng);
        return r;
    };

    VectorX next = random_vector();
    const int max_restarts = opt.max_restarts_per_pair * static_cast<int>(k);
    double worst = 0.0;
    for (int restart = 0; restart <= max_restarts; ++restart) {
        while (size < m) {
            auto [w, nrm] = m_orthonormalize(next, size);
            if (!(nrm > 1e-12 * std::max(1.0, w.norm()))) {
                // invariant subspace found; continue with a fresh direction
                std::tie(w, nrm) = m_orthonormalize(random_vector(), size);
            }
            V.col(size) = w / nrm;
            MV.col(size) = M * V.col(size);
            OpV.col(size) = apply(V.col(size));
            next = OpV.col(size);
            ++size;
        }

        MatrixX H = MV.transpose() * OpV;
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<MatrixX> ritz(H);
        if (ritz.info() != Eigen::Success) throw Error("projected eigenproblem failed", "spectral");
        // Ascending θ; the wanted ones are the largest.
        const MatrixX S = ritz.eigenvectors().rowwise().reverse();
        const VectorX theta = ritz.eigenvalues().reverse();

        const MatrixX X = V * S;
        const MatrixX OpX = OpV * S;
        bool converged = true;
        worst = 0.0;
        for (Index i = 0; i < k; ++i) {
            const VectorX r = OpX.col(i) - theta[i] * X.col(i);
            const double rel = std::sqrt(std::max(0.0, r.dot(M * r))) / std::abs(theta[i]);
            worst = std::max(worst, rel);
            if (!(rel <= opt.tol)) converged = false;
        }
        const bool last = restart == max_restarts;
        if (last && !converged && worst <= 100.0 * opt.tol) {
            std::ostringstream os;
            os << "Lanczos stopped at Ritz residual " << worst << " (tolerance " << opt.tol << ")";
            log::warn(os.str());
            converged = true;
        }
        if (converged) {
            std::vector<EigenPair> out;
            const double nk = one_norm(K), nm = one_norm(M);
            for (Index i = 0; i < k; ++i) out.push_back(finish_pair(X.col(i), K, M, nk, nm));
            return out;
        }

        // Thick restart: keep the leading Ritz vectors and continue the Krylov
        // sequence from the last operator image.
        const Index keep = std::min<Index>(m - 1, std::max<Index>(k + (m - k) / 2, k + 1));
        VectorX carry = OpV.col(m - 1);
        for (int pass = 0; pass < 2; ++pass) carry -= V * (MV.transpose() * carry).eval();
        V.leftCols(keep) = X.leftCols(keep);
        OpV.leftCols(keep) = OpX.leftCols(keep);
        MV.leftCols(keep) = MV * S.leftCols(keep);
        size = keep;
        next = carry;
    }
    std::ostringstream os;
    os << "Lanczos did not converge after " << max_restarts << " restarts (worst Ritz residual " << worst << ")";
    throw LanczosFailure{os.str()};
}

} // namespace

void normalize_pair(VectorX& u, const SparseMatrix& M)
{
    const double nrm = m_norm(u, M);
    if (!(nrm > 0.0)) throw Error("cannot normalise a zero vector", "spectral");
    u /= nrm;
    apply_sign_convention(u);
}

void apply_sign_convention(VectorX& u)
{
    if (u.size() == 0) return;
    const double top = u.cwiseAbs().maxCoeff();
    for (Index i = 0; i < u.size(); ++i)
        if (std::abs(u[i]) >= (1.0 - 1e-8) * top) {
            if (u[i] < 0.0) u = -u;
            return;
        }
}

double m_norm(const VectorX& v, const SparseMatrix& M)
{
    return std::sqrt(std::max(0.0, v.dot(M * v)));
}

std::vector<EigenPair> eigs_dense(const SparseMatrix& K, const SparseMatrix& M, Index k)
{
    const MatrixX kd(K), md(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixX> solver(kd, md);
    if (solver.info() != Eigen::Success) throw Error("dense generalised eigensolver failed", "spectral");
    const Index n = K.rows();
    std::vector<EigenPair> out;
    const double nk = one_norm(K), nm = one_norm(M);
    for (Index i = 0; i < k; ++i) out.push_back(finish_pair(solver.eigenvectors().col(n - 1 - i), K, M, nk, nm));
    return out;
}

std::vector<EigenPair> eigs(const SparseMatrix& K, const SparseMatrix& M, Index k, const EigsOptions& options)
{
    const Index n = K.rows();
    if (K.cols() != n || M.rows() != n || M.cols() != n) throw Error("K and M must be square and of equal size", "spectral");
    if (k < 1 || k > n) throw Error("requested eigenpair count out of range", "spectral");
    if (n <= options.dense_below || k == n) return eigs_dense(K, M, k);
    try {
        return lanczos(K, M, k, options);
    } catch (const LanczosFailure& f) {
        if (n <= options.dense_fallback) {
            log::warn(f.message + "; using the dense solver");
            return eigs_dense(K, M, k);
        }
        throw Error(f.message, "spectral");
    }
}

VectorX align_sign(const VectorX& u, const VectorX& reference, const SparseMatrix& M)
{
    const double s = u.dot(M * reference);
    if (s == 0.0) {
        log::warn("align_sign: vectors are M-orthogonal; sign left unchanged");
        return u;
    }
    return s < 0.0 ? VectorX(-u) : u;
}

double check_simple(const std::vector<EigenPair>& pairs, std::size_t index)
{
    if (index >= pairs.size()) throw Error("eigenpair index out of range", "spectral");
    const double lambda = pairs[index].lambda;
    double gap = std::numeric_limits<double>::infinity();
    if (index > 0) gap = std::min(gap, std::abs(pairs[index - 1].lambda - lambda));
    if (index + 1 < pairs.size()) gap = std::min(gap, std::abs(pairs[index + 1].lambda - lambda));
    const double rel = gap / std::max(std::abs(lambda), 1e-300);
    if (rel < 1e-6) {
        std::ostringstream os;
        os << "eigenvalue " << lambda << " is not numerically simple (relative gap " << rel << ")";
        log::warn(os.str());
    }
    return rel;
}

std::vector<std::size_t> eigen_cluster(const std::vector<EigenPair>& pairs, std::size_t index, double rel_tol)
{
    if (index >= pairs.size()) throw Error("eigenpair index out of range", "spectral");
    const double lambda = pairs[index].lambda;
    const double tol = rel_tol * std::max(std::abs(lambda), 1.0);
    std::vector<std::size_t> out{index};
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (i != index && std::abs(pairs[i].lambda - lambda) <= tol) out.push_back(i);
    return out;
}

} // namespace femlr
