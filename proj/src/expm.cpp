#include "dirac_loc/expm.hpp"

#include <cmath>

#include "dirac_loc/errors.hpp"

namespace dirac_loc {

Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  using Eigen::MatrixXd;
  if (A.rows() != A.cols()) throw DimensionError("expm expects a square matrix");
  if (!A.allFinite()) throw NumericalError("expm: non-finite input");
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > 0.5) s = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const MatrixXd X = A / std::ldexp(1.0, s);

  static constexpr double c[7] = {1.0,           1.0 / 2.0,      5.0 / 44.0,       1.0 / 66.0,
                                  1.0 / 792.0,   1.0 / 15840.0,  1.0 / 665280.0};
  const Eigen::Index n = A.rows();
  const MatrixXd I = MatrixXd::Identity(n, n);
  const MatrixXd X2 = X * X;
  const MatrixXd X4 = X2 * X2;
  const MatrixXd X6 = X4 * X2;
  const MatrixXd even = c[0] * I + c[2] * X2 + c[4] * X4 + c[6] * X6;
  const MatrixXd odd = X * (c[1] * I + c[3] * X2 + c[5] * X4);
  MatrixXd E = (even - odd).partialPivLu().solve(even + odd);
  for (int k = 0; k < s; ++k) E = E * E;
  if (!E.allFinite()) throw NumericalError("expm: overflow");
  return E;
}

}  // namespace dirac_loc
