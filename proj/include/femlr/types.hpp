// Copyright 2026 The femlr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace femlr {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Symmetric operators are stored with both triangles populated.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Error raised by any pipeline stage. `stage()` names the failing step.
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& what, std::string stage = {})
        : std::runtime_error(stage.empty() ? what : stage + ": " + what)
        , m_stage(std::move(stage))
    {}

    const std::string& stage() const noexcept { return m_stage; }

private:
    std::string m_stage;
};

/// Symmetric part ½(Q + Qᵀ).
template <typename Derived>
auto sym(const Eigen::MatrixBase<Derived>& q)
{
    return (0.5 * (q + q.transpose())).eval();
}

} // namespace femlr
