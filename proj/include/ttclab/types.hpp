#pragma once

#include <Eigen/Core>

namespace ttclab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace ttclab
