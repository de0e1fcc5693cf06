#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dirac_loc/errors.hpp"

namespace dirac_loc {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

enum class GroupTag { GeneralLinear, Symplectic, OrthoSymplectic, SpecialOrthogonal, ComplexSymplectic };

enum class Classification { FullSymplectic, OrthoSymplectic, InsideSpecialOrthogonal, Other };

const char* to_string(GroupTag tag);
const char* to_string(Classification c);

struct StructuralSet {
  int N = 0;
  Mat J, S, K, P, Delta;
  std::array<CMat, 4> pauli;
};

StructuralSet structural_set(int N);

/// J = [[0, -I], [I, 0]] of size 2N.
Mat symplectic_form(int N);
/// K = diag((-1)^(i+1)), i = 1..N.
Mat k_form(int N);
/// S = diag(K, K).
Mat s_form(int N);
/// P = [[I, I], [I, -I]] / sqrt(2).
Mat duality_p(int N);
/// Tridiagonal, zero diagonal, unit off-diagonals.
Mat delta_matrix(int N);

template <typename Derived>
double default_tol(const Eigen::MatrixBase<Derived>& M) {
  return 1e-9 * std::max(1.0, static_cast<double>(M.norm()));
}

namespace detail {
template <typename Derived>
int half_dim(const Eigen::MatrixBase<Derived>& M) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0)
    throw DimensionError("expected a square matrix of even size");
  return static_cast<int>(M.rows() / 2);
}
}  // namespace detail

/// ||M^* J M - J||_F <= tol. Uses the conjugate transpose for complex input.
template <typename Derived>
bool is_symplectic(const Eigen::MatrixBase<Derived>& M, double tol) {
  using Scalar = typename Derived::Scalar;
  const int N = detail::half_dim(M);
  const auto J = symplectic_form(N).template cast<Scalar>().eval();
  return (M.adjoint() * J * M - J).norm() <= tol;
}

template <typename Derived>
bool is_symplectic(const Eigen::MatrixBase<Derived>& M) {
  return is_symplectic(M, default_tol(M));
}

/// Real orthosymplectic membership: M^T J M = J and M^T S M = S.
template <typename Derived>
bool is_spo(const Eigen::MatrixBase<Derived>& M, double tol) {
  const int N = detail::half_dim(M);
  const Mat S = s_form(N);
  return is_symplectic(M, tol) && (M.transpose() * S * M - S).norm() <= tol;
}

template <typename Derived>
bool is_spo(const Eigen::MatrixBase<Derived>& M) {
  return is_spo(M, default_tol(M));
}

template <typename Derived>
bool is_orthogonal(const Eigen::MatrixBase<Derived>& M, double tol) {
  if (M.rows() != M.cols()) throw DimensionError("expected a square matrix");
  return (M.transpose() * M - Mat::Identity(M.rows(), M.cols())).norm() <= tol;
}

/// Most specific tag consistent with the membership predicates.
GroupTag group_tag(const Mat& M, double tol);

/// (^s M)_ij = (-1)^(i-j+1) M_ji.
Mat s_transpose(const Mat& M);

template <typename A, typename B>
Mat lie_bracket(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows() || b.rows() != b.cols())
    throw DimensionError("bracket operands must be square of equal size");
  return a * b - b * a;
}

/// Frobenius-orthonormal spanning set of a matrix Lie algebra.
struct LieBasis {
  std::vector<Mat> elements;
  int dim = 0;
  Classification classification = Classification::Other;
  double tol = 1e-9;
  bool closed = true;
};

/// Generators V_ij and W_ij of spo_N, 1-based indices, unnormalized.
Mat spo_v(int N, int i, int j);
Mat spo_w(int N, int i, int j);

LieBasis spo_basis(int N);

struct KruDecomposition {
  Mat K, R, U;
  Vec t;  // t_1 >= ... >= t_d >= 0, d = floor(N/2)
};

/// Normal form: diag(B_t1, ..., B_td [, 1], B_-t1, ..., B_-td [, 1]).
Mat kru_normal_form(int N, const Vec& t);

/// M = K R U with K, U in SO(2N) cap SpO_N and R in normal form.
KruDecomposition kru_decompose(const Mat& M);

/// Residual of the closed-form [V_ij, W_kr] and [W_ij, W_kr] identities.
double bracket_identity_check(int N, int i, int j, int k, int r);

}  // namespace dirac_loc
