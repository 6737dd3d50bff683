#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace mmlab {

using Vector = Eigen::VectorXd;
/// Samples are rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Labels in {-1, +1}.
using Labels = Eigen::VectorXi;
using IndexSet = std::vector<std::size_t>;

}  // namespace mmlab
