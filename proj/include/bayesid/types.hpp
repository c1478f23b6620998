#pragma once

#include <Eigen/Dense>

namespace bayesid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace bayesid
