#pragma once

#include <Eigen/Dense>

namespace dirac_loc {

/// Matrix exponential by scaling and squaring with a [6/6] Pade approximant.
/// The argument is scaled to 1-norm <= 1/2, where the approximant error is
/// below double rounding.
Eigen::MatrixXd expm(const Eigen::MatrixXd& A);

}  // namespace dirac_loc
