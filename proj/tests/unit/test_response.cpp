// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/assembly.hpp>
#include <femlr/response.hpp>

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace femlr;

namespace {

SparseMatrix from_dense(const MatrixX& a) { return a.sparseView(); }

/// K(ε) = diag(0, −1, −3, −6) + ε·L with M = I, solved densely.
struct Toy
{
    MatrixX K0 = VectorX((VectorX(4) << 0, -1, -3, -6).finished()).asDiagonal();
    MatrixX L = (MatrixX(4, 4) << 0, 0.2, 0.1, 0.3, 0.2, -0.5, 0.4, -0.1, 0.1, 0.4, 0.3, 0.2, 0.3, -0.1, 0.2, 0.6)
                    .finished();
    SparseMatrix M = from_dense(MatrixX::Identity(4, 4));

    std::vector<EigenPair> at(double eps) const { return eigs_dense(from_dense(K0 + eps * L), M, 4); }
};

} // namespace

TEST_CASE("response of a diagonal pencil matches perturbation theory")
{
    const Toy toy;
    const auto pairs = toy.at(0.0);
    const EigenPair& p = pairs[1]; // λ = −1, u = e₁
    CHECK(p.lambda == doctest::Approx(-1.0));
    const ResponsePair r = solve_response(from_dense(toy.K0), toy.M, from_dense(toy.L), p);
    // λ̇ = L₁₁; u̇_j = L_j1/(λ₁ − λ_j) for j ≠ 1, u̇₁ = 0.
    CHECK(r.lambda_dot == doctest::Approx(-0.5));
    const VectorX lambdas = (VectorX(4) << 0, -1, -3, -6).finished();
    const double s = p.u[1];
    for (int j : {0, 2, 3}) CHECK(r.u_dot[j] == doctest::Approx(s * toy.L(j, 1) / (-1.0 - lambdas[j])));
    CHECK(std::abs(r.u_dot[1]) < 1e-14);
    CHECK(r.residual < 1e-12);
    CHECK(std::abs(r.orthogonality) < 1e-14);
}

TEST_CASE("zero perturbation gives zero response")
{
    const Toy toy;
    const auto pairs = toy.at(0.0);
    const ResponsePair r = solve_response(from_dense(toy.K0), toy.M, SparseMatrix(4, 4), pairs[2]);
    CHECK(r.u_dot.norm() == 0.0);
    CHECK(r.lambda_dot == 0.0);
}

TEST_CASE("sign flip of the eigenvector flips u_dot only")
{
    const Toy toy;
    EigenPair p = toy.at(0.0)[2];
    const ResponsePair a = solve_response(from_dense(toy.K0), toy.M, from_dense(toy.L), p);
    p.u = -p.u;
    const ResponsePair b = solve_response(from_dense(toy.K0), toy.M, from_dense(toy.L), p);
    CHECK(b.lambda_dot == doctest::Approx(a.lambda_dot));
    CHECK((a.u_dot + b.u_dot).norm() < 1e-14);
}

TEST_CASE("finite-difference validation on a linear family")
{
    const Toy toy;
    const auto pairs = toy.at(0.0);
    const ResponsePair r = solve_response(from_dense(toy.K0), toy.M, from_dense(toy.L), pairs[1]);
    const FdReport rep = validate_fd([&](double e) { return toy.at(e); }, pairs[1], r, toy.M, {1e-2, 1e-3});
    REQUIRE(rep.rows.size() == 2);
    CHECK(rep.rows[1].lambda_dot_rel_error < 1e-4);
    CHECK(rep.lambda_decreasing);
    CHECK(rep.u_decreasing);
    CHECK(rep.rows[1].lambda_dot_fd == doctest::Approx(-0.5).epsilon(1e-4));
}

TEST_CASE("FEM response identities on the standard map")
{
    constexpr double tau = 2 * std::numbers::pi;
    const TriMesh mesh = grid_mesh(30, 30, {0.0, 0.0, tau, tau}, true);
    const StiffnessPair kl = assemble_cg(mesh, standard_map(0.98), gauss_rule(2));
    const SparseMatrix m = assemble_mass(mesh);
    const auto pairs = eigs(kl.K, m, 4);
    // the first nontrivial eigenvalue is double; border with the whole cluster
    const auto cluster = eigen_cluster(pairs, 1);
    REQUIRE(cluster.size() == 2);
    const ClusterChoice choice = resolve_cluster(pairs, cluster, kl.L);
    CHECK(choice.split < 1e-8);
    const ResponsePair r = solve_response(kl.K, m, kl.L, choice.pair, choice.partners);
    CHECK(r.residual < 1e-8);
    CHECK(std::abs(r.orthogonality) < 1e-8);
    CHECK(std::abs(choice.partners[0].dot(m * r.u_dot)) < 1e-8);
    CHECK(r.coupling < 1e-8);
    const double rayleigh = rayleigh_lambda_dot(m, kl.L, choice.pair.u);
    CHECK(std::abs(r.lambda_dot - rayleigh) < 1e-8 * std::abs(rayleigh));
}

TEST_CASE("a split cluster continues along an eigenvector of UᵀLU")
{
    const MatrixX k = VectorX((VectorX(4) << 0, -1, -1, -3).finished()).asDiagonal();
    MatrixX l = MatrixX::Zero(4, 4);
    l(1, 1) = 0.2;
    l(2, 2) = -0.4;
    l(1, 2) = l(2, 1) = 0.3;
    l(0, 3) = l(3, 0) = 0.1;
    const SparseMatrix m = from_dense(MatrixX::Identity(4, 4));
    const auto pairs = eigs_dense(from_dense(k), m, 4);
    const std::vector<std::size_t> cluster{1, 2};
    const ClusterChoice c = resolve_cluster(pairs, cluster, from_dense(l));
    CHECK(c.split > 0.1);
    // the continued vector diagonalises the projected perturbation
    const Eigen::Vector2d w(c.pair.u[1], c.pair.u[2]);
    const Eigen::Matrix2d g = l.block(1, 1, 2, 2);
    const Eigen::Vector2d gw = g * w;
    CHECK(std::abs(gw.x() * w.y() - gw.y() * w.x()) < 1e-12);
    const ResponsePair r = solve_response(from_dense(k), m, from_dense(l), c.pair, c.partners);
    CHECK(r.coupling < 1e-12);
    CHECK(r.lambda_dot == doctest::Approx(w.dot(g * w)));
}

TEST_CASE("prediction is the first-order Taylor polynomial")
{
    EigenPair p{-2.0, VectorX::Ones(3), 0.0};
    ResponsePair r;
    r.u_dot = VectorX::LinSpaced(3, 0.0, 1.0);
    r.lambda_dot = -0.5;
    const Prediction q = predict(p, r, 0.2);
    CHECK(q.lambda == doctest::Approx(-2.1));
    CHECK(q.u.isApprox(VectorX::Ones(3) + 0.2 * r.u_dot));
}

TEST_CASE("tracking picks the overlapping pair and aligns its sign")
{
    const SparseMatrix m = from_dense(MatrixX::Identity(3, 3));
    std::vector<EigenPair> cand{{0.0, Eigen::Vector3d(1, 0, 0), 0}, {-1.0, Eigen::Vector3d(0, -0.8, -0.6), 0},
        {-2.0, Eigen::Vector3d(0, 0.6, -0.8), 0}};
    const EigenPair t = track_pair(cand, Eigen::Vector3d(0, 1, 0), m);
    CHECK(t.lambda == -1.0);
    CHECK(t.u.isApprox(Eigen::Vector3d(0, 0.8, 0.6)));
    CHECK_THROWS_AS(track_pair(cand, Eigen::Vector3d(0.5, 0.5, 0.5).normalized(), m, 0.9), Error);
}

TEST_CASE("tracking a repeated eigenvalue projects onto its eigenspace")
{
    const SparseMatrix m = from_dense(MatrixX::Identity(3, 3));
    const double c = std::cos(0.3), s = std::sin(0.3);
    std::vector<EigenPair> cand{{-1.0, Eigen::Vector3d(c, s, 0), 0}, {-1.0, Eigen::Vector3d(-s, c, 0), 0},
        {-4.0, Eigen::Vector3d(0, 0, 1), 0}};
    const Eigen::Vector3d u0 = Eigen::Vector3d(0.6, 0.7, 0.1).normalized();
    const EigenPair t = track_pair(cand, u0, m);
    CHECK(t.lambda == -1.0);
    CHECK(t.u.isApprox(Eigen::Vector3d(0.6, 0.7, 0.0).normalized()));
}
