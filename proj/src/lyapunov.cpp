#include "dirac_loc/lyapunov.hpp"

#include <cmath>

#include "dirac_loc/parallel.hpp"
#include "dirac_loc/rng.hpp"

namespace dirac_loc {

CocycleAccumulator::CocycleAccumulator(const Mat& initial_frame, int period)
    : frame(initial_frame), log_stretch(Vec::Zero(initial_frame.cols())), reorth_period(std::max(1, period)) {}

void CocycleAccumulator::push(const Mat& T) {
  frame = T * frame;
  ++steps;
  if (++pending_ >= reorth_period || frame.cwiseAbs().maxCoeff() > 1e100) flush();
}

void CocycleAccumulator::flush() {
  if (pending_ == 0) return;
  pending_ = 0;
  const Eigen::Index k = frame.cols();
  Eigen::HouseholderQR<Mat> qr(frame);
  Mat Q = qr.householderQ() * Mat::Identity(frame.rows(), k);
  const Mat& R = qr.matrixQR();
  for (Eigen::Index p = 0; p < k; ++p) {
    const double r = R(p, p);
    if (r < 0.0) Q.col(p) = -Q.col(p);
    log_stretch(p) += std::log(std::abs(r));
  }
  frame = std::move(Q);
}

LyapunovEstimate lyapunov_spectrum(const ModelSpec& spec, double E, long steps, std::uint64_t seed,
                                   int reorth_period, int batches) {
  if (steps < 1) throw DomainError("steps must be positive");
  validate(spec);
  const DisorderWord word = sample_word(spec, seed, 0, steps - 1);
  CellCache cache(spec, E);
  LyapunovEstimate est = lyapunov_from_cells([&](long n) -> const Mat& { return cache.cell(word, n); },
                                             Mat::Identity(2 * spec.N, 2 * spec.N), spec.ell, steps,
                                             reorth_period, batches);
  est.energy = E;
  return est;
}

double symmetry_residual(const LyapunovEstimate& est) {
  const Eigen::Index n = est.gamma.size();
  double r = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) r = std::max(r, std::abs(est.gamma(i) + est.gamma(n - 1 - i)));
  return r;
}

double degeneracy_residual(const LyapunovEstimate& est) {
  double r = 0.0;
  for (Eigen::Index p = 0; p + 1 < est.gamma.size(); p += 2)
    r = std::max(r, std::abs(est.gamma(p) - est.gamma(p + 1)));
  return r;
}

double directional_sum_check(const ModelSpec& spec, double E, const Mat& x, long steps, std::uint64_t seed) {
  if (x.rows() != 2 * spec.N || x.cols() != spec.N) throw DimensionError("frame must be 2N x N");
  Eigen::JacobiSVD<Mat> svd(x);
  const Vec& s = svd.singularValues();
  if (s(s.size() - 1) <= 1e-12 * s(0)) throw DomainError("directional_sum_check: rank-deficient frame");
  const DisorderWord word = sample_word(spec, seed, 0, steps - 1);
  CellCache cache(spec, E);
  // Normalize the frame first so the initial volume does not enter the rate.
  Eigen::HouseholderQR<Mat> qr(x);
  Mat Q = qr.householderQ() * Mat::Identity(x.rows(), x.cols());
  CocycleAccumulator acc(Q);
  for (long n = 0; n < steps; ++n) acc.push(cache.cell(word, n));
  acc.flush();
  return acc.log_stretch.sum() / (spec.ell * static_cast<double>(steps));
}

LagrangianFrame lagrangian_frame(int N, Flavor flavor) {
  LagrangianFrame F;
  F.flavor = flavor;
  const bool split = flavor != Flavor::Fplus && flavor != Flavor::Fminus && flavor != Flavor::Custom;
  if (split && N % 2 != 0) throw DomainError("split Lagrangian flavors need even N");
  const int d = N / 2;
  switch (flavor) {
    case Flavor::Fplus:
      F.basis = Mat::Identity(2 * N, N);
      break;
    case Flavor::Fminus:
      F.basis = Mat::Zero(2 * N, N);
      F.basis.bottomRows(N) = Mat::Identity(N, N);
      break;
    case Flavor::Custom:
      throw DomainError("custom frames are built directly");
    default: {
      const int offset = (flavor == Flavor::FplusPlus || flavor == Flavor::FplusMinus) ? 0 : N;
      const double sign = (flavor == Flavor::FplusPlus || flavor == Flavor::FminusPlus) ? 1.0 : -1.0;
      F.basis = Mat::Zero(2 * N, d);
      for (int i = 0; i < d; ++i) {
        F.basis(offset + 2 * i, i) = std::sqrt(0.5);
        F.basis(offset + 2 * i + 1, i) = sign * std::sqrt(0.5);
      }
    }
  }
  return F;
}

Vec projected_singular_values(const Mat& T, const LagrangianFrame& F) {
  return Eigen::JacobiSVD<Mat>(T * F.basis).singularValues();
}

Proportion wilson(long hits, long samples) {
  Proportion out;
  out.hits = hits;
  out.samples = samples;
  if (samples <= 0) return out;
  const double z = 1.959963984540054;
  const double n = static_cast<double>(samples);
  const double p = static_cast<double>(hits) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  out.p_hat = p;
  out.ci_lo = hits == 0 ? 0.0 : std::max(0.0, center - half);
  out.ci_hi = hits == samples ? 1.0 : std::min(1.0, center + half);
  return out;
}

namespace {

// log s_p of the product of cells 0..n-1; symplectic pairing for the lower half.
double log_singular_value(const ModelSpec& spec, const DisorderWord& word, CellCache& cache, long n, int p,
                          const std::optional<LagrangianFrame>& F) {
  const int dim = 2 * spec.N;
  Mat T = Mat::Identity(dim, dim);
  double scale = 0.0;
  for (long m = 0; m < n; ++m) {
    T = cache.cell(word, m) * T;
    const double mx = T.cwiseAbs().maxCoeff();
    if (mx > 1e50) {
      T /= mx;
      scale += std::log(mx);
    }
  }
  if (F) {
    const Vec s = projected_singular_values(T, *F);
    if (p < 1 || p > s.size()) throw DomainError("p exceeds the frame dimension");
    return scale + std::log(s(p - 1));
  }
  const Vec s = Eigen::JacobiSVD<Mat>(T).singularValues();
  if (p < 1 || p > dim) throw DomainError("p must be in 1..2N");
  if (p > spec.N) return -(scale + std::log(s(dim - p)));
  return scale + std::log(s(p - 1));
}

}  // namespace

Proportion ldp_probability(const ModelSpec& spec, double E, int p, double eps, long n_cells, long samples,
                           std::uint64_t seed, double gamma_ref, const std::optional<LagrangianFrame>& F,
                           int workers) {
  validate(spec);
  if (n_cells < 1 || samples < 1) throw DomainError("n_cells and samples must be positive");
  std::vector<char> hit(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](long k) {
    const DisorderWord word = sample_word(spec, derive_seed(seed, static_cast<std::uint64_t>(k)), 0, n_cells - 1);
    CellCache cache(spec, E);
    const double rate = log_singular_value(spec, word, cache, n_cells, p, F) / (spec.ell * n_cells);
    hit[static_cast<std::size_t>(k)] = std::abs(rate - gamma_ref) >= eps;
  });
  long hits = 0;
  for (char h : hit) hits += h;
  return wilson(hits, samples);
}

HolderFit holder_fit(const std::vector<double>& E, const std::vector<double>& S) {
  HolderFit fit;
  std::vector<double> lx, ly;
  double max_diff = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i)
    for (std::size_t j = i + 1; j < E.size(); ++j) {
      const double dE = std::abs(E[i] - E[j]), dS = std::abs(S[i] - S[j]);
      max_diff = std::max(max_diff, dS);
      if (dE > 0.0 && dS > 0.0) {
        lx.push_back(std::log(dE));
        ly.push_back(std::log(dS));
      }
    }
  fit.pairs = static_cast<int>(lx.size());
  if (lx.size() < 2) {
    fit.C = max_diff;
    return fit;
  }
  const Eigen::Map<const Vec> x(lx.data(), static_cast<Eigen::Index>(lx.size()));
  const Eigen::Map<const Vec> y(ly.data(), static_cast<Eigen::Index>(ly.size()));
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double syy = (y.array() - my).square().sum();
  fit.alpha = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.r2 = (sxx > 0.0 && syy > 0.0) ? sxy * sxy / (sxx * syy) : 0.0;
  fit.C = (y.array() - fit.alpha * x.array()).exp().maxCoeff();
  return fit;
}

EnergyScan energy_scan(const ModelSpec& spec, const std::vector<double>& grid, long steps, std::uint64_t seed,
                       int workers) {
  validate(spec);
  if (steps < 1) throw DomainError("steps must be positive");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("energy grid must be sorted");
  const DisorderWord word = sample_word(spec, seed, 0, steps - 1);
  EnergyScan scan;
  scan.rows.resize(grid.size());
  parallel_for(static_cast<long>(grid.size()), workers, [&](long g) {
    CellCache cache(spec, grid[g]);
    LyapunovEstimate est = lyapunov_from_cells([&](long n) -> const Mat& { return cache.cell(word, n); },
                                               Mat::Identity(2 * spec.N, 2 * spec.N), spec.ell, steps);
    est.energy = grid[g];
    scan.rows[g] = std::move(est);
  });
  std::vector<double> sums;
  for (const auto& row : scan.rows) {
    sums.push_back(row.gamma.head(spec.N).sum());
    int vanishing = 0;
    for (Eigen::Index p = 0; p < row.gamma.size(); ++p)
      if (std::abs(row.gamma(p)) <= std::max(3.0 * row.std_error(p), 1e-10)) ++vanishing;
    if (vanishing > 0) scan.flags.push_back({row.energy, vanishing});
  }
  scan.fit = holder_fit(grid, sums);
  return scan;
}

ProbeResult contractivity_probe(const ModelSpec& spec, double E, int p, long steps, std::uint64_t seed) {
  if (p < 1 || p > spec.N) throw DomainError("probe index must be in 1..N");
  const LyapunovEstimate est = lyapunov_spectrum(spec, E, steps, seed);
  ProbeResult out;
  out.value = est.gamma(p) - est.gamma(p - 1);
  const Vec diff = (est.batches.row(p) - est.batches.row(p - 1)).transpose();
  const Eigen::Index B = diff.size();
  if (B > 1)
    out.std_error = std::sqrt((diff.array() - diff.mean()).square().sum() / static_cast<double>((B - 1) * B));
  return out;
}

}  // namespace dirac_loc
