#pragma once

#include <cstdint>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace tpsfem {

using Point = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using TriId = std::int32_t;

inline constexpr std::int32_t kNone = -1;

}  // namespace tpsfem
