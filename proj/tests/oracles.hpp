#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat M(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) M(i, j) = g(rng);
  return M;
}

inline Mat J(int N) {
  Mat j = Mat::Zero(2 * N, 2 * N);
  j.topRightCorner(N, N) = -Mat::Identity(N, N);
  j.bottomLeftCorner(N, N) = Mat::Identity(N, N);
  return j;
}

/// Taylor series after exact power-of-two scaling, then repeated squaring.
inline Mat taylor_expm(const Mat& A, int terms = 40) {
  int s = 0;
  double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm *= 0.5;
    ++s;
  }
  const Mat B = A / std::ldexp(1.0, s);
  Mat term = Mat::Identity(A.rows(), A.cols()), sum = term;
  for (int k = 1; k <= terms; ++k) {
    term = term * B / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// Classical RK4 for u' = X(x) u from x0 to x1.
inline Mat rk4(const std::function<Mat(double)>& X, const Mat& u0, double x0, double x1, int steps) {
  Mat u = u0;
  const double h = (x1 - x0) / steps;
  for (int k = 0; k < steps; ++k) {
    const double x = x0 + h * k;
    const Mat k1 = X(x) * u;
    const Mat k2 = X(x + h / 2) * (u + h / 2 * k1);
    const Mat k3 = X(x + h / 2) * (u + h / 2 * k2);
    const Mat k4 = X(x + h) * (u + h * k3);
    u += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return u;
}

/// Dimension of the Lie algebra generated by `gens`: repeatedly appends all brackets
/// of an SVD-orthonormalized spanning set until the numerical rank stabilizes.
inline int brute_force_closure_dim(const std::vector<Mat>& gens, double rel_tol = 1e-9) {
  const Eigen::Index n = gens.front().rows();
  auto basis_of = [&](const std::vector<Mat>& mats) {
    Mat A(n * n, static_cast<Eigen::Index>(mats.size()));
    for (std::size_t c = 0; c < mats.size(); ++c)
      A.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vec>(mats[c].data(), n * n);
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
    const Vec& s = svd.singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * std::max(1.0, s(0))) ++r;
    std::vector<Mat> out;
    for (int i = 0; i < r; ++i) {
      const Vec col = svd.matrixU().col(i);
      out.push_back(Eigen::Map<const Mat>(col.data(), n, n));
    }
    return out;
  };
  std::vector<Mat> basis = basis_of(gens);
  for (;;) {
    std::vector<Mat> all = basis;
    for (std::size_t i = 0; i < basis.size(); ++i)
      for (std::size_t j = i + 1; j < basis.size(); ++j) all.push_back(basis[i] * basis[j] - basis[j] * basis[i]);
    std::vector<Mat> next = basis_of(all);
    if (next.size() == basis.size()) return static_cast<int>(basis.size());
    basis = std::move(next);
  }
}

}  // namespace oracle
