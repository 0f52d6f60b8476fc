#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace tensorank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

} // namespace tensorank
