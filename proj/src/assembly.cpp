// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#include <femlr/assembly.hpp>
#include <femlr/parallel.hpp>

#include <sstream>

namespace femlr {

namespace {

using ElementMatrix = Eigen::Matrix3d;

std::string location(const Vec2& x)
{
    std::ostringstream os;
    os.precision(17);
    os << " at (" << x.x() << ", " << x.y() << ")";
    return os.str();
}

/// Scatter element matrices through the periodic fold. Element order fixes
/// the summation order, so the result is reproducible and exactly symmetric.
SparseMatrix scatter(const TriMesh& mesh, const std::vector<ElementMatrix>& local)
{
    std::vector<Triplet> triplets;
    triplets.reserve(9 * local.size());
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto nodes = mesh.triangle_nodes(t);
        const auto& e = local[static_cast<size_t>(t)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) triplets.emplace_back(nodes[static_cast<size_t>(i)], nodes[static_cast<size_t>(j)], e(i, j));
    }
    SparseMatrix a(mesh.node_count(), mesh.node_count());
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

/// area·(C ∇φ_j)·∇φ_i, symmetrised entrywise. The diagonal is formed from
/// the off-diagonal entries (Σ_j ∇φ_j = 0), so constants are annihilated to
/// rounding in the entries rather than in the gradients.
ElementMatrix weighted_stiffness(const ElementGeometry& g, const Mat2& c)
{
    ElementMatrix e = ElementMatrix::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double v = g.area * g.grad[static_cast<size_t>(i)].dot(c * g.grad[static_cast<size_t>(j)]);
            e(i, j) = v;
            e(j, i) = v;
            e(i, i) -= v;
            e(j, j) -= v;
        }
    return e;
}

} // namespace

CoeffField coeff_A0(const DynamicsModel& model)
{
    return [jac = model.jacobian](const Vec2& x) {
        try {
            return dynamic_coefficient<double>(jac(x));
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + location(x), "assembly");
        }
    };
}

CoeffField coeff_A0dot(const DynamicsModel& model)
{
    return [sample = model.sample](const Vec2& x) {
        const DynamicsSample s = sample(x);
        try {
            return dynamic_coefficient_derivative<double>(s.jacobian, s.jacobian_dot);
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + location(x), "assembly");
        }
    };
}

SparseMatrix assemble_mass(const TriMesh& mesh)
{
    std::vector<ElementMatrix> local(static_cast<size_t>(mesh.triangle_count()));
    const ElementMatrix ref = (ElementMatrix() << 2, 1, 1, 1, 2, 1, 1, 1, 2).finished();
    for (Index t = 0; t < mesh.triangle_count(); ++t)
        local[static_cast<size_t>(t)] = element_geometry(mesh, t).area / 12.0 * ref;
    return scatter(mesh, local);
}

SparseMatrix assemble_laplace(const TriMesh& mesh)
{
    std::vector<ElementMatrix> local(static_cast<size_t>(mesh.triangle_count()));
    for (Index t = 0; t < mesh.triangle_count(); ++t)
        local[static_cast<size_t>(t)] = weighted_stiffness(element_geometry(mesh, t), Mat2::Identity());
    return scatter(mesh, local);
}

SparseMatrix assemble_stiffness_cg(const TriMesh& mesh, const CoeffField& field, const QuadratureRule& rule)
{
    std::vector<Mat2> coefficients;
    coefficients.reserve(static_cast<size_t>(mesh.triangle_count()) * rule.size());
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        const auto p = mesh.triangle_coords(t);
        for (const auto& b : rule.points) {
            try {
                coefficients.push_back(field(map_to_element<double>(b, p[0], p[1], p[2])));
            } catch (const Error& e) {
                throw Error(std::string(e.what()) + " in element " + std::to_string(t), "assembly");
            }
        }
    }
    return assemble_stiffness_cg(mesh, coefficients, rule);
}

SparseMatrix assemble_stiffness_cg(const TriMesh& mesh, std::span<const Mat2> coefficients, const QuadratureRule& rule)
{
    const size_t nq = rule.size();
    if (coefficients.size() != static_cast<size_t>(mesh.triangle_count()) * nq)
        throw Error("coefficient count does not match elements × quadrature points", "assembly");
    std::vector<ElementMatrix> local(static_cast<size_t>(mesh.triangle_count()));
    for (Index t = 0; t < mesh.triangle_count(); ++t) {
        Mat2 avg = Mat2::Zero();
        for (size_t q = 0; q < nq; ++q) avg += rule.weights[q] * coefficients[static_cast<size_t>(t) * nq + q];
        // P1 gradients are constant, so only the weighted mean of A matters.
        local[static_cast<size_t>(t)] = -weighted_stiffness(element_geometry(mesh, t), sym(avg));
    }
    return scatter(mesh, local);
}

std::vector<DynamicsSample> sample_quadrature_points(
    const TriMesh& mesh, const DynamicsModel& model, const QuadratureRule& rule, int threads)
{
    const size_t nq = rule.size();
    std::vector<DynamicsSample> samples(static_cast<size_t>(mesh.triangle_count()) * nq);
    parallel_for(mesh.triangle_count(), threads, [&](Index t) {
        const auto p = mesh.triangle_coords(t);
        for (size_t q = 0; q < nq; ++q)
            samples[static_cast<size_t>(t) * nq + q] = model.sample(map_to_element<double>(rule.points[q], p[0], p[1], p[2]));
    });
    return samples;
}

StiffnessPair assemble_cg(const TriMesh& mesh, const DynamicsModel& model, const QuadratureRule& rule, int threads)
{
    if (!model.has_jacobian) throw Error("the CG method needs model Jacobians", "assembly");
    const auto samples = sample_quadrature_points(mesh, model, rule, threads);
    std::vector<Mat2> a(samples.size()), adot(samples.size());
    const size_t nq = rule.size();
    for (size_t i = 0; i < samples.size(); ++i) {
        try {
            a[i] = dynamic_coefficient<double>(samples[i].jacobian);
            adot[i] = dynamic_coefficient_derivative<double>(samples[i].jacobian, samples[i].jacobian_dot);
        } catch (const Error& e) {
            const Index t = static_cast<Index>(i / nq);
            const auto p = mesh.triangle_coords(t);
            throw Error(std::string(e.what()) + " in element " + std::to_string(t)
                    + location(map_to_element<double>(rule.points[i % nq], p[0], p[1], p[2])),
                "assembly");
        }
    }
    return {assemble_stiffness_cg(mesh, a, rule), assemble_stiffness_cg(mesh, adot, rule)};
}

SparseMatrix assemble_to_response(const TriMesh& image_mesh, std::span<const Vec2> node_velocity)
{
    if (static_cast<Index>(node_velocity.size()) != image_mesh.node_count())
        throw Error("one velocity per image node is required", "assembly");
    std::vector<ElementMatrix> local(static_cast<size_t>(image_mesh.triangle_count()));
    for (Index t = 0; t < image_mesh.triangle_count(); ++t) {
        const ElementGeometry g = element_geometry(image_mesh, t);
        const auto nodes = image_mesh.triangle_nodes(t);
        Mat2 w_dphi = Mat2::Zero();
        for (int s = 0; s < 3; ++s)
            w_dphi += node_velocity[static_cast<size_t>(nodes[static_cast<size_t>(s)])] * g.grad[static_cast<size_t>(s)].transpose();
        local[static_cast<size_t>(t)] = weighted_stiffness(g, sym(w_dphi));
    }
    return scatter(image_mesh, local);
}

TransferOperatorResult assemble_to(const TriMesh& mesh, const DynamicsModel& model, int threads)
{
    const Index n = mesh.node_count();
    std::vector<Vec2> images(static_cast<size_t>(n));
    std::vector<Vec2> velocity(static_cast<size_t>(n));
    parallel_for(n, threads, [&](Index i) {
        images[static_cast<size_t>(i)] = model.map(mesh.node(i));
        velocity[static_cast<size_t>(i)] = model.map_dot(mesh.node(i));
    });

    if (model.invariant_domain && !model.torus_periods) {
        const Rect& r = *model.invariant_domain;
        const Vec2 lo(r.x0, r.y0), hi(r.x1, r.y1);
        const Vec2 tol = 1e-6 * (hi - lo);
        for (Index i = 0; i < n; ++i) {
            Vec2& y = images[static_cast<size_t>(i)];
            y = y.cwiseMax(lo).cwiseMin(hi);
            if (!mesh.is_boundary(i)) continue;
            const Vec2& x = mesh.node(i);
            for (int k = 0; k < 2; ++k) {
                if (x[k] - lo[k] <= tol[k] && y[k] - lo[k] <= tol[k]) y[k] = lo[k];
                if (hi[k] - x[k] <= tol[k] && hi[k] - y[k] <= tol[k]) y[k] = hi[k];
            }
        }
    }

    TransferOperatorResult r;
    try {
        r.image_mesh = delaunay(images, model.torus_periods);
    } catch (const Error& e) {
        throw Error(std::string("image triangulation failed: ") + e.what(), "assembly");
    }
    if (r.image_mesh.node_count() != n) throw Error("image mesh lost nodes", "assembly");
    SparseMatrix k0 = assemble_laplace(mesh);
    SparseMatrix k1 = assemble_laplace(r.image_mesh);
    r.K = -0.5 * (k0 + k1);
    r.K.makeCompressed();
    r.L = assemble_to_response(r.image_mesh, velocity);
    r.node_velocity = std::move(velocity);
    return r;
}

std::vector<Index> free_nodes(const TriMesh& mesh, BoundaryKind kind)
{
    mesh.check_boundary_condition(kind);
    std::vector<Index> keep;
    keep.reserve(static_cast<size_t>(mesh.node_count()));
    for (Index i = 0; i < mesh.node_count(); ++i)
        if (kind == BoundaryKind::Neumann || !mesh.is_boundary(i)) keep.push_back(i);
    return keep;
}

SparseMatrix restrict_matrix(const SparseMatrix& a, std::span<const Index> keep)
{
    std::vector<Index> map(static_cast<size_t>(a.rows()), -1);
    for (size_t i = 0; i < keep.size(); ++i) map[static_cast<size_t>(keep[i])] = static_cast<Index>(i);
    std::vector<Triplet> triplets;
    triplets.reserve(static_cast<size_t>(a.nonZeros()));
    for (Index k = 0; k < a.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
            const Index r = map[static_cast<size_t>(it.row())], c = map[static_cast<size_t>(it.col())];
            if (r >= 0 && c >= 0) triplets.emplace_back(r, c, it.value());
        }
    SparseMatrix out(static_cast<Index>(keep.size()), static_cast<Index>(keep.size()));
    out.setFromTriplets(triplets.begin(), triplets.end());
    out.makeCompressed();
    return out;
}

VectorX restrict_vector(const VectorX& v, std::span<const Index> keep)
{
    VectorX out(static_cast<Index>(keep.size()));
    for (size_t i = 0; i < keep.size(); ++i) out[static_cast<Index>(i)] = v[keep[i]];
    return out;
}

VectorX extend_vector(const VectorX& v, std::span<const Index> keep, Index full_size)
{
    VectorX out = VectorX::Zero(full_size);
    for (size_t i = 0; i < keep.size(); ++i) out[keep[i]] = v[static_cast<Index>(i)];
    return out;
}

} // namespace femlr
