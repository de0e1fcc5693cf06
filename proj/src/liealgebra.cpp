#include "dirac_loc/liealgebra.hpp"

#include <cmath>

#include "dirac_loc/parallel.hpp"

namespace dirac_loc {

std::vector<Mat> vertex_generators(const ModelSpec& spec, double E) {
  if (spec.N > 16) throw DomainError("vertex_generators: N too large for 2^N enumeration");
  const int N = spec.N;
  std::vector<Mat> out;
  out.reserve(std::size_t{1} << N);
  for (unsigned long mask = 0; mask < (1ul << N); ++mask) {
    Vec P(N);
    for (int i = 0; i < N; ++i) P(i) = static_cast<double>((mask >> (N - 1 - i)) & 1ul);
    out.push_back(generator(spec, P, E));
  }
  return out;
}

namespace {

struct Span {
  std::vector<Vec> vecs;
  std::vector<Mat> mats;
  Eigen::Index rows = 0;

  // Double Gram-Schmidt; admits m when the residual exceeds threshold.
  bool admit(const Mat& m, double threshold) {
    Vec v = Eigen::Map<const Vec>(m.data(), m.size());
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& b : vecs) v -= b.dot(v) * b;
    const double r = v.norm();
    if (!(r > threshold)) return false;
    v /= r;
    mats.push_back(Eigen::Map<const Mat>(v.data(), rows, rows));
    vecs.push_back(std::move(v));
    return true;
  }
};

}  // namespace

LieBasis generate_algebra(const std::vector<Mat>& generators, double tol, int max_dim) {
  if (generators.empty()) throw DomainError("generate_algebra: empty generator list");
  const Eigen::Index n = generators.front().rows();
  for (const Mat& g : generators)
    if (g.rows() != n || g.cols() != n) throw DimensionError("generators must share a square shape");
  if (max_dim <= 0) max_dim = static_cast<int>(n * n) + 1;

  Span span;
  span.rows = n;
  LieBasis basis;
  basis.tol = tol;
  for (const Mat& g : generators) {
    if (static_cast<int>(span.vecs.size()) >= max_dim) break;
    span.admit(g, tol * g.norm());
  }
  std::size_t next = 0;
  while (next < span.mats.size()) {
    if (static_cast<int>(span.vecs.size()) >= max_dim) {
      basis.closed = false;
      break;
    }
    const std::size_t i = next++;
    for (std::size_t j = 0; j < i; ++j) {
      if (static_cast<int>(span.vecs.size()) >= max_dim) break;
      // Basis elements have unit norm, so the operand scale is 1.
      span.admit(lie_bracket(span.mats[i], span.mats[j]), tol);
    }
  }
  if (static_cast<int>(span.vecs.size()) >= max_dim) basis.closed = false;
  basis.elements = std::move(span.mats);
  basis.dim = static_cast<int>(basis.elements.size());
  if (basis.closed && n % 2 == 0) basis.classification = classify(basis, static_cast<int>(n / 2));
  return basis;
}

Classification classify(const LieBasis& basis, int N) {
  if (!basis.closed) throw DomainError("classify: basis is not closed");
  const Mat J = symplectic_form(N), S = s_form(N);
  const double eps = std::max(1e-8, 10.0 * basis.tol);
  bool sp = true, spo = true, anti = true;
  for (const Mat& x : basis.elements) {
    if (x.rows() != 2 * N) throw DimensionError("classify: element size does not match N");
    const bool in_sp = (x.transpose() * J + J * x).norm() <= eps;
    sp = sp && in_sp;
    spo = spo && in_sp && (x.transpose() * S + S * x).norm() <= eps;
    anti = anti && (x + x.transpose()).norm() <= eps;
  }
  if (basis.dim == 2 * N * N + N && sp) return Classification::FullSymplectic;
  if (basis.dim == N * N && spo) return Classification::OrthoSymplectic;
  if (anti) return Classification::InsideSpecialOrthogonal;
  return Classification::Other;
}

ThresholdReport disorder_threshold(const ModelSpec& spec, double d_log_O) {
  if (!(d_log_O > 0.0)) throw DomainError("d_log_O must be positive");
  if (spec.N > 16) throw DomainError("disorder_threshold: N too large for enumeration");
  ThresholdReport rep;
  rep.d_log_O = d_log_O;
  bool first = true;
  const int N = spec.N;
  for (unsigned long mask = 0; mask < (1ul << N); ++mask) {
    Vec w(N);
    for (int i = 0; i < N; ++i) w(i) = static_cast<double>((mask >> (N - 1 - i)) & 1ul);
    const Vec lam = Eigen::SelfAdjointEigenSolver<Mat>(potential(spec, w), Eigen::EigenvaluesOnly).eigenvalues();
    if (first) {
      rep.lambda_min = lam.minCoeff();
      rep.lambda_max = lam.maxCoeff();
      first = false;
    } else {
      rep.lambda_min = std::min(rep.lambda_min, lam.minCoeff());
      rep.lambda_max = std::max(rep.lambda_max, lam.maxCoeff());
    }
  }
  const double width = rep.lambda_max - rep.lambda_min;
  if (width > 0.0) rep.ell_c = 2.0 * d_log_O / width;
  rep.lo = rep.lambda_max - d_log_O / spec.ell;
  rep.hi = rep.lambda_min + d_log_O / spec.ell;
  rep.empty = rep.lo > rep.hi;
  return rep;
}

CriticalScan critical_energy_scan(const ModelSpec& spec, const std::vector<double>& grid, double tol,
                                  int workers) {
  if (spec.N > 8) throw DomainError("critical_energy_scan: N must be at most 8");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("energy grid must be sorted");
  CriticalScan scan;
  scan.energies = grid;
  scan.dims.resize(grid.size());
  scan.classes.resize(grid.size());
  auto dim_at = [&](double E) { return generate_algebra(vertex_generators(spec, E), tol); };
  parallel_for(static_cast<long>(grid.size()), workers, [&](long k) {
    const LieBasis b = dim_at(grid[k]);
    scan.dims[k] = b.dim;
    scan.classes[k] = b.closed ? b.classification : Classification::Other;
  });
  if (grid.empty()) return scan;
  scan.generic_dim = *std::max_element(scan.dims.begin(), scan.dims.end());

  auto low = [&](double E) { return dim_at(E).dim < scan.generic_dim; };
  auto refine = [&](double full, double lowE) {
    while (std::abs(full - lowE) > 1e-6) {
      const double mid = 0.5 * (full + lowE);
      (low(mid) ? lowE : full) = mid;
    }
    return lowE;
  };
  const std::size_t n = grid.size();
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (std::size_t k = 0; k < n;) {
    if (scan.dims[k] >= scan.generic_dim) {
      ++k;
      continue;
    }
    std::size_t e = k;
    while (e + 1 < n && scan.dims[e + 1] < scan.generic_dim) ++e;
    runs.emplace_back(k, e);
    k = e + 1;
  }
  scan.drops.resize(runs.size());
  parallel_for(static_cast<long>(runs.size()), workers, [&](long r) {
    const auto [a, b] = runs[r];
    CriticalEnergy c;
    std::size_t at = a;
    for (std::size_t k = a; k <= b; ++k)
      if (scan.dims[k] < scan.dims[at]) at = k;
    c.energy = grid[at];
    c.dim = scan.dims[at];
    c.lo = a > 0 ? refine(grid[a - 1], grid[a]) : grid[a];
    c.hi = b + 1 < n ? refine(grid[b + 1], grid[b]) : grid[b];
    scan.drops[r] = c;
  });
  return scan;
}

}  // namespace dirac_loc
