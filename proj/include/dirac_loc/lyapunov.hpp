#pragma once

#include <optional>
#include <vector>

#include "dirac_loc/model.hpp"

namespace dirac_loc {

/// QR-factorized running product: orthonormal frame and log-stretch sums.
struct CocycleAccumulator {
  Mat frame;
  Vec log_stretch;
  long steps = 0;
  int reorth_period = 1;

  explicit CocycleAccumulator(const Mat& initial_frame, int period = 1);

  void push(const Mat& T);
  /// Re-orthonormalizes the pending product into the frame.
  void flush();

 private:
  int pending_ = 0;
};

struct LyapunovEstimate {
  Vec gamma;      // non-increasing, per unit length
  Vec std_error;  // batch-means standard errors
  Mat batches;    // per-batch estimates, rows in the order of gamma
  long steps = 0;
  double energy = 0.0;
};

/// Estimator over an arbitrary cell sequence; cell(n) returns the n-th transfer.
template <typename CellFn>
LyapunovEstimate lyapunov_from_cells(CellFn&& cell, const Mat& initial_frame, double ell, long steps,
                                     int reorth_period = 1, int batches = 50) {
  const long B = std::max<long>(1, std::min<long>(batches, steps));
  const Eigen::Index k = initial_frame.cols();
  CocycleAccumulator acc(initial_frame, reorth_period);
  Mat per_batch(k, B);
  Vec before = Vec::Zero(k);
  long n = 0;
  for (long b = 0; b < B; ++b) {
    const long end = (b + 1) * steps / B;
    const long len = end - n;
    for (; n < end; ++n) acc.push(cell(n));
    acc.flush();
    per_batch.col(b) = (acc.log_stretch - before) / (ell * static_cast<double>(len));
    before = acc.log_stretch;
  }
  LyapunovEstimate est;
  est.steps = steps;
  const Vec gamma = acc.log_stretch / (ell * static_cast<double>(steps));
  Vec err = Vec::Zero(k);
  if (B > 1) {
    const Vec mean = per_batch.rowwise().mean();
    for (Eigen::Index p = 0; p < k; ++p)
      err(p) = std::sqrt((per_batch.row(p).transpose().array() - mean(p)).square().sum() /
                         static_cast<double>((B - 1) * B));
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  for (Eigen::Index p = 0; p < k; ++p) order[static_cast<std::size_t>(p)] = p;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return gamma(a) > gamma(b); });
  est.gamma.resize(k);
  est.std_error.resize(k);
  est.batches.resize(k, B);
  for (Eigen::Index p = 0; p < k; ++p) {
    const Eigen::Index src = order[static_cast<std::size_t>(p)];
    est.gamma(p) = gamma(src);
    est.std_error(p) = err(src);
    est.batches.row(p) = per_batch.row(src);
  }
  return est;
}

/// Full 2N-dimensional spectrum on the word sample_word(spec, seed, 0, steps-1).
LyapunovEstimate lyapunov_spectrum(const ModelSpec& spec, double E, long steps, std::uint64_t seed,
                                   int reorth_period = 1, int batches = 50);

/// max_i |gamma_i + gamma_{2N-i+1}|.
double symmetry_residual(const LyapunovEstimate& est);
/// max_p |gamma_{2p-1} - gamma_{2p}|.
double degeneracy_residual(const LyapunovEstimate& est);

/// (1 / (ell steps)) log ||wedge^N Phi x||, via the QR evolution of the N-frame x.
double directional_sum_check(const ModelSpec& spec, double E, const Mat& x, long steps, std::uint64_t seed);

enum class Flavor { Fplus, Fminus, FplusPlus, FplusMinus, FminusPlus, FminusMinus, Custom };

struct LagrangianFrame {
  Mat basis;  // 2N x k, orthonormal columns
  Flavor flavor = Flavor::Custom;
};

/// F+ = {(u, 0)}, F- = {(0, v)}; the four split flavors need N even and have N/2 columns.
LagrangianFrame lagrangian_frame(int N, Flavor flavor);

/// Singular values of T B, descending.
Vec projected_singular_values(const Mat& T, const LagrangianFrame& F);

/// Empirical frequency with its Wilson 95% interval.
struct Proportion {
  double p_hat = 0.0, ci_lo = 0.0, ci_hi = 0.0;
  long hits = 0, samples = 0;
};

Proportion wilson(long hits, long samples);

/// Frequency of |(1/(ell n)) log s_p - gamma_ref| >= eps over `samples` independent n-cell products.
Proportion ldp_probability(const ModelSpec& spec, double E, int p, double eps, long n_cells, long samples,
                           std::uint64_t seed, double gamma_ref,
                           const std::optional<LagrangianFrame>& F = std::nullopt, int workers = 1);

struct HolderFit {
  double alpha = 0.0, C = 0.0, r2 = 0.0;
  int pairs = 0;
};

struct DelocalizationFlag {
  double energy = 0.0;
  int vanishing = 0;
};

struct EnergyScan {
  std::vector<LyapunovEstimate> rows;
  HolderFit fit;
  std::vector<DelocalizationFlag> flags;
};

/// One estimate per grid energy, all on the same disorder word.
EnergyScan energy_scan(const ModelSpec& spec, const std::vector<double>& grid, long steps, std::uint64_t seed,
                       int workers = 1);

/// Log-log fit of |S(E) - S(E')| <= C |E - E'|^alpha over all pairs.
HolderFit holder_fit(const std::vector<double>& E, const std::vector<double>& S);

struct ProbeResult {
  double value = 0.0;
  double std_error = 0.0;
};

/// gamma_{p+1} - gamma_p with its batch-means error; negative means a contracting gap.
ProbeResult contractivity_probe(const ModelSpec& spec, double E, int p, long steps, std::uint64_t seed);

}  // namespace dirac_loc
