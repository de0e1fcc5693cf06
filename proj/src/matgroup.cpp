#include "dirac_loc/matgroup.hpp"

#include <cmath>

namespace dirac_loc {

const char* to_string(GroupTag tag) {
  switch (tag) {
    case GroupTag::GeneralLinear: return "GeneralLinear";
    case GroupTag::Symplectic: return "Symplectic";
    case GroupTag::OrthoSymplectic: return "OrthoSymplectic";
    case GroupTag::SpecialOrthogonal: return "SpecialOrthogonal";
    case GroupTag::ComplexSymplectic: return "ComplexSymplectic";
  }
  return "?";
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::FullSymplectic: return "FullSymplectic";
    case Classification::OrthoSymplectic: return "OrthoSymplectic";
    case Classification::InsideSpecialOrthogonal: return "InsideSpecialOrthogonal";
    case Classification::Other: return "Other";
  }
  return "?";
}

Mat symplectic_form(int N) {
  Mat J = Mat::Zero(2 * N, 2 * N);
  J.topRightCorner(N, N) = -Mat::Identity(N, N);
  J.bottomLeftCorner(N, N) = Mat::Identity(N, N);
  return J;
}

Mat k_form(int N) {
  Mat K = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) K(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
  return K;
}

Mat s_form(int N) {
  Mat S = Mat::Zero(2 * N, 2 * N);
  S.topLeftCorner(N, N) = k_form(N);
  S.bottomRightCorner(N, N) = k_form(N);
  return S;
}

Mat duality_p(int N) {
  Mat P(2 * N, 2 * N);
  const Mat I = Mat::Identity(N, N);
  P << I, I, I, -I;
  return P / std::sqrt(2.0);
}

Mat delta_matrix(int N) {
  Mat D = Mat::Zero(N, N);
  for (int i = 0; i + 1 < N; ++i) D(i, i + 1) = D(i + 1, i) = 1.0;
  return D;
}

StructuralSet structural_set(int N) {
  if (N < 1) throw DimensionError("N must be positive");
  StructuralSet s;
  s.N = N;
  s.J = symplectic_form(N);
  s.S = s_form(N);
  s.K = k_form(N);
  s.P = duality_p(N);
  s.Delta = delta_matrix(N);
  using C = std::complex<double>;
  s.pauli[0] = CMat::Identity(2, 2);
  s.pauli[1] = CMat::Zero(2, 2);
  s.pauli[1](0, 1) = s.pauli[1](1, 0) = 1.0;
  s.pauli[2] = CMat::Zero(2, 2);
  s.pauli[2](0, 1) = C(0, -1);
  s.pauli[2](1, 0) = C(0, 1);
  s.pauli[3] = CMat::Zero(2, 2);
  s.pauli[3](0, 0) = 1.0;
  s.pauli[3](1, 1) = -1.0;
  return s;
}

GroupTag group_tag(const Mat& M, double tol) {
  if (is_spo(M, tol)) return GroupTag::OrthoSymplectic;
  if (is_symplectic(M, tol))
    return is_orthogonal(M, tol) ? GroupTag::SpecialOrthogonal : GroupTag::Symplectic;
  return GroupTag::GeneralLinear;
}

Mat s_transpose(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("s_transpose expects a square matrix");
  const Eigen::Index n = M.rows();
  Mat out(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      out(i, j) = ((i - j + 1) % 2 == 0 ? 1.0 : -1.0) * M(j, i);
  return out;
}

namespace {

double parity(int p) { return (p % 2 == 0) ? 1.0 : -1.0; }

Mat unit(int N, int i, int j) {
  Mat E = Mat::Zero(N, N);
  E(i - 1, j - 1) = 1.0;
  return E;
}

}  // namespace

Mat spo_v(int N, int i, int j) {
  Mat out = Mat::Zero(2 * N, 2 * N);
  out.topLeftCorner(N, N) = unit(N, i, j) + parity(i - j + 1) * unit(N, j, i);
  out.bottomRightCorner(N, N) = parity(i - j) * unit(N, i, j) - unit(N, j, i);
  return out;
}

Mat spo_w(int N, int i, int j) {
  Mat out = Mat::Zero(2 * N, 2 * N);
  const Mat B = unit(N, i, j) + unit(N, j, i);
  out.topRightCorner(N, N) = B;
  out.bottomLeftCorner(N, N) = parity(i - j + 1) * B;
  return out;
}

LieBasis spo_basis(int N) {
  if (N < 1) throw DimensionError("N must be positive");
  LieBasis basis;
  for (int i = 1; i <= N; ++i)
    for (int j = i + 1; j <= N; ++j) {
      Mat v = spo_v(N, i, j);
      basis.elements.push_back(v / v.norm());
    }
  for (int i = 1; i <= N; ++i)
    for (int j = i; j <= N; ++j) {
      Mat w = spo_w(N, i, j);
      basis.elements.push_back(w / w.norm());
    }
  basis.dim = static_cast<int>(basis.elements.size());
  basis.classification = Classification::OrthoSymplectic;
  return basis;
}

double bracket_identity_check(int N, int i, int j, int k, int r) {
  auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  const Mat lhs1 = lie_bracket(spo_v(N, i, j), spo_w(N, k, r));
  const Mat rhs1 = parity(i - j + 1) * (d(i, k) * spo_w(N, j, r) + d(i, r) * spo_w(N, j, k)) +
                   d(j, k) * spo_w(N, i, r) + d(j, r) * spo_w(N, i, k);
  const Mat lhs2 = lie_bracket(spo_w(N, i, j), spo_w(N, k, r));
  const Mat rhs2 = parity(k - r + 1) * (d(j, k) * spo_v(N, i, r) + d(j, r) * spo_v(N, i, k) +
                                        d(i, k) * spo_v(N, j, r) + d(i, r) * spo_v(N, j, k));
  return std::max((lhs1 - rhs1).norm(), (lhs2 - rhs2).norm());
}

Mat kru_normal_form(int N, const Vec& t) {
  const int d = N / 2;
  if (t.size() != d) throw DimensionError("normal form needs floor(N/2) parameters");
  Mat R = Mat::Identity(2 * N, 2 * N);
  for (int i = 0; i < d; ++i) {
    const double c = std::cosh(t(i)), s = std::sinh(t(i));
    const int a = 2 * i, b = N + 2 * i;
    R(a, a) = R(a + 1, a + 1) = c;
    R(a, a + 1) = R(a + 1, a) = s;
    R(b, b) = R(b + 1, b + 1) = c;
    R(b, b + 1) = R(b + 1, b) = -s;
  }
  return R;
}

namespace {

// Greedy selection of an orthonormal family {w_1, Cw_1, w_2, Cw_2, ...} inside
// span(pool), where C is an orthogonal complex structure preserving that span.
std::vector<Vec> pair_with(const Mat& pool, const Mat& C, Eigen::Index want) {
  std::vector<Vec> chosen, all;
  for (Eigen::Index c = 0; c < pool.cols() && static_cast<Eigen::Index>(chosen.size()) < want; ++c) {
    Vec v = pool.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& a : all) v -= a.dot(v) * a;
    if (v.norm() < 0.5) continue;
    v.normalize();
    Vec w = C * v;
    for (const Vec& a : all) w -= a.dot(w) * a;
    w.normalize();
    chosen.push_back(v);
    all.push_back(v);
    all.push_back(w);
  }
  if (static_cast<Eigen::Index>(chosen.size()) != want)
    throw NumericalError("kru_decompose: eigenspace pairing failed");
  return chosen;
}

Mat orthonormal_range(const Mat& A) {
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 0.5) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

KruDecomposition kru_decompose(const Mat& M) {
  const int N = detail::half_dim(M);
  if (!is_spo(M)) throw MembershipError("kru_decompose: input is not orthosymplectic");
  const int d = N / 2;
  const Mat J = symplectic_form(N), S = s_form(N), JS = J * S;

  const Mat A = M.transpose() * M;
  Eigen::SelfAdjointEigenSolver<Mat> eig(A);
  if (eig.info() != Eigen::Success) throw NumericalError("kru_decompose: eigen-solver failure");
  const Vec lam = eig.eigenvalues();
  const Mat& vecs = eig.eigenvectors();
  const Eigen::Index n = lam.size();
  Vec t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = 0.5 * std::log(std::max(lam(i), 1e-300));

  const double zero_tol = std::max(1e-9, 1e-12 * A.norm());
  std::vector<Vec> vs;
  std::vector<double> ts;
  // Eigenvalues ascending; walk positive t from the top in clusters.
  Eigen::Index hi = n - 1;
  while (hi >= 0 && t(hi) > zero_tol) {
    Eigen::Index lo = hi;
    while (lo - 1 >= 0 && t(lo - 1) > zero_tol &&
           t(hi) - t(lo - 1) <= zero_tol * std::max(1.0, t(hi)))
      --lo;
    const Eigen::Index m = hi - lo + 1;
    if (m % 2 != 0) throw NumericalError("kru_decompose: odd eigenspace dimension");
    const std::vector<Vec> chosen = pair_with(vecs.middleCols(lo, m), JS, m / 2);
    const double tc = t.segment(lo, m).mean();
    for (const Vec& v : chosen) {
      vs.push_back(v);
      ts.push_back(tc);
    }
    hi = lo - 1;
  }
  if (static_cast<int>(vs.size()) > d) throw NumericalError("kru_decompose: too many stretch directions");

  std::vector<Vec> plus, minus;
  Eigen::Index zlo = 0;
  while (zlo < n && t(zlo) < -zero_tol) ++zlo;
  Eigen::Index zhi = zlo;
  while (zhi < n && std::abs(t(zhi)) <= zero_tol) ++zhi;
  const int q = static_cast<int>(vs.size());
  const int want_plus = (N + 1) / 2 - q, want_minus = N / 2 - q;
  if (zhi > zlo) {
    const Mat E0 = vecs.middleCols(zlo, zhi - zlo);
    const Mat I = Mat::Identity(2 * N, 2 * N);
    const Mat Bp = orthonormal_range(0.5 * (I + S) * E0);
    const Mat Bm = orthonormal_range(0.5 * (I - S) * E0);
    plus = pair_with(Bp, J, want_plus);
    minus = pair_with(Bm, J, want_minus);
  } else if (want_plus != 0 || want_minus != 0) {
    throw NumericalError("kru_decompose: missing unit eigenspace");
  }

  Mat Ut(2 * N, 2 * N);
  Vec tout = Vec::Zero(d);
  const double r2 = std::sqrt(0.5);
  int pi = 0, mi = 0;
  for (int i = 0; i < d; ++i) {
    Vec a, b;
    if (i < q) {
      const Vec Sv = S * vs[i];
      a = r2 * (vs[i] + Sv);
      b = r2 * (vs[i] - Sv);
      tout(i) = ts[i];
    } else {
      a = plus[pi++];
      b = minus[mi++];
    }
    Ut.col(2 * i) = a;
    Ut.col(2 * i + 1) = b;
  }
  if (N % 2 == 1) Ut.col(N - 1) = plus[pi++];
  Ut.rightCols(N) = J * Ut.leftCols(N);

  KruDecomposition out;
  out.t = tout;
  out.U = Ut.transpose();
  out.R = kru_normal_form(N, tout);
  out.K = M * Ut * kru_normal_form(N, -tout);
  if ((out.K * out.R * out.U - M).norm() > 1e-6 * std::max(1.0, M.norm()))
    throw NumericalError("kru_decompose: reconstruction failed");
  return out;
}

}  // namespace dirac_loc
