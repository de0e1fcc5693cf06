#include "dirac_loc/spectrum.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "dirac_loc/parallel.hpp"
#include "dirac_loc/rng.hpp"

namespace dirac_loc {

namespace {

using cd = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_box(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box) {
  if (spec.kind != Kind::Dirac) throw DomainError("restricted Dirac spectrum requires kind = Dirac");
  if (box.L < 1) throw DomainError("box half-width must be positive");
  if (!word.covers(box.first_cell()) || !word.covers(box.last_cell()))
    throw CoverageError("disorder word does not cover the box");
}

Mat launch_frame(int N) {
  Mat F = Mat::Zero(2 * N, N);
  F.bottomRows(N) = Mat::Identity(N, N);
  return F;
}

// Orthonormalizes F in place with a positive-diagonal R and returns log det R.
double normalize(Mat& F) {
  Eigen::HouseholderQR<Mat> qr(F);
  Mat Q = qr.householderQ() * Mat::Identity(F.rows(), F.cols());
  double logdet = 0.0;
  for (Eigen::Index p = 0; p < F.cols(); ++p) {
    const double r = qr.matrixQR()(p, p);
    if (r < 0.0) Q.col(p) = -Q.col(p);
    logdet += std::log(std::abs(r));
  }
  F = std::move(Q);
  return logdet;
}

cd phase_det(const Mat& F, int N) {
  const CMat Z = F.bottomRows(N).cast<cd>() + cd(0.0, 1.0) * F.topRows(N).cast<cd>();
  return Z.determinant();
}

// Normalized frame at the right boundary and the lifted arg of det(Y + iX) along the sweep.
std::pair<Mat, double> phase_sweep(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E) {
  const int N = spec.N;
  CellCache cache(spec, E);
  Mat F = launch_frame(N);
  cd prev(1.0, 0.0);
  double lifted = 0.0;
  for (long n = box.first_cell(); n <= box.last_cell(); ++n) {
    const auto& [k, M] = cache.substep(word, n);
    for (int s = 0; s < k; ++s) {
      F = M * F;
      const cd d = phase_det(F, N);
      lifted += std::arg(d * std::conj(prev));
      prev = d;
    }
    normalize(F);
    prev = phase_det(F, N);
  }
  return {F, lifted};
}

}  // namespace

DisorderWord box_word(const ModelSpec& spec, std::uint64_t seed, const BoxSpec& box) {
  return sample_word(spec, seed, box.first_cell(), box.last_cell());
}

double boundary_determinant(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E) {
  require_box(spec, word, box);
  CellCache cache(spec, E);
  Mat F = launch_frame(spec.N);
  double logscale = 0.0;
  for (long n = box.first_cell(); n <= box.last_cell(); ++n) {
    F = cache.cell(word, n) * F;
    if (F.cwiseAbs().maxCoeff() > 1e50) logscale += normalize(F);
  }
  return F.topRows(spec.N).determinant() * std::exp(logscale);
}

long counting_function(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E) {
  require_box(spec, word, box);
  const int N = spec.N;
  const auto [F, lifted] = phase_sweep(spec, word, box, E);
  const CMat X = F.topRows(N).cast<cd>(), Y = F.bottomRows(N).cast<cd>();
  const CMat W = (Y + cd(0.0, 1.0) * X) * (Y - cd(0.0, 1.0) * X).inverse();
  const Eigen::VectorXcd lam = Eigen::ComplexEigenSolver<CMat>(W, false).eigenvalues();
  double frac = 0.0;
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    double phi = std::arg(lam(k));
    if (phi < 0.0) phi += kTwoPi;
    frac += phi / kTwoPi;
  }
  return std::llround(2.0 * lifted / kTwoPi - frac);
}

namespace {

int rank_multiplicity(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E) {
  const Mat F = phase_sweep(spec, word, box, E).first;
  const Vec s = Eigen::JacobiSVD<Mat>(F.topRows(spec.N)).singularValues();
  int count = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) < 1e-7) ++count;
  return count;
}

}  // namespace

std::vector<Eigenvalue> restricted_eigenvalues(const ModelSpec& spec, const DisorderWord& word,
                                               const BoxSpec& box, double E_lo, double E_hi) {
  require_box(spec, word, box);
  if (!std::isfinite(E_lo) || !std::isfinite(E_hi) || E_hi < E_lo) throw DomainError("window must be finite");
  std::vector<Eigenvalue> out;
  auto C = [&](double E) { return counting_function(spec, word, box, E); };
  auto split = [&](auto&& self, double a, long ca, double b, long cb) -> void {
    if (cb == ca) return;
    if (b - a <= 1e-10) {
      Eigenvalue ev;
      ev.energy = 0.5 * (a + b);
      ev.multiplicity = static_cast<int>(cb - ca);
      ev.rank_multiplicity = rank_multiplicity(spec, word, box, ev.energy);
      out.push_back(ev);
      return;
    }
    const double m = 0.5 * (a + b);
    const long cm = C(m);
    self(self, a, ca, m, cm);
    self(self, m, cm, b, cb);
  };
  split(split, E_lo, C(E_lo), E_hi, C(E_hi));
  return out;
}

IdsCurve ids_estimate(const ModelSpec& spec, long L, long samples, const std::vector<double>& grid,
                      std::uint64_t seed, int workers) {
  validate(spec);
  if (L < 1 || samples < 1) throw DomainError("L and samples must be positive");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("energy grid must be sorted");
  const BoxSpec box{L, 0};
  const double length = 2.0 * spec.ell * static_cast<double>(L);
  const Eigen::Index G = static_cast<Eigen::Index>(grid.size());
  Mat per(samples, G);
  parallel_for(samples, workers, [&](long k) {
    const DisorderWord word = box_word(spec, derive_seed(seed, static_cast<std::uint64_t>(k)), box);
    const long c0 = counting_function(spec, word, box, 0.0);
    for (Eigen::Index g = 0; g < G; ++g)
      per(k, g) = static_cast<double>(counting_function(spec, word, box, grid[g]) - c0) / length;
  });
  IdsCurve curve;
  curve.energies = grid;
  curve.L = L;
  curve.samples = samples;
  for (Eigen::Index g = 0; g < G; ++g) {
    const double mean = per.col(g).mean();
    double se = 0.0;
    if (samples > 1)
      se = std::sqrt((per.col(g).array() - mean).square().sum() / static_cast<double>((samples - 1) * samples));
    curve.F.push_back(mean);
    curve.std_error.push_back(se);
  }
  return curve;
}

IdsCurve free_ids(int N, const std::vector<double>& grid) {
  IdsCurve curve;
  curve.energies = grid;
  for (double E : grid) {
    curve.F.push_back(N * E / std::numbers::pi);
    curve.std_error.push_back(0.0);
  }
  return curve;
}

Proportion wegner_probability(const ModelSpec& spec, double E, long L, double sigma, double beta, long samples,
                              std::uint64_t seed, int workers) {
  validate(spec);
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0, 1)");
  if (!(sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  const double delta = std::exp(-sigma * std::pow(static_cast<double>(L), beta));
  const BoxSpec box{L, 0};
  std::vector<char> hit(static_cast<std::size_t>(samples));
  parallel_for(samples, workers, [&](long k) {
    const DisorderWord word = box_word(spec, derive_seed(seed, static_cast<std::uint64_t>(k)), box);
    const double lo = E - delta - 1e-12 * std::max(1.0, std::abs(E));
    hit[static_cast<std::size_t>(k)] =
        counting_function(spec, word, box, E + delta) > counting_function(spec, word, box, lo);
  });
  long hits = 0;
  for (char h : hit) hits += h;
  return wilson(hits, samples);
}

namespace {

// Antiderivative of log|u|.
double int_log_abs(double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; }

// Antiderivative of log|t - i| = log(1 + t^2) / 2.
double int_log_modulus(double t) { return 0.5 * t * std::log1p(t * t) - t + std::atan(t); }

// Mean of log|E - t| - log|t - i| over [a, b].
double kernel_average(double E, double a, double b) {
  return (int_log_abs(b - E) - int_log_abs(a - E) - int_log_modulus(b) + int_log_modulus(a)) / (b - a);
}

double kernel(double E, double t) { return std::log(std::abs(E - t)) - 0.5 * std::log1p(t * t); }

}  // namespace

ThoulessResult thouless_residual(const std::vector<std::pair<double, double>>& gamma_curve, const IdsCurve& ids,
                                 const IdsCurve& free, double margin) {
  if (gamma_curve.empty()) throw DomainError("empty gamma curve");
  if (ids.energies.size() < 2 || ids.energies != free.energies)
    throw DomainError("IDS and free IDS must share a grid of at least two points");
  double emin = gamma_curve.front().first, emax = emin;
  for (const auto& [E, s] : gamma_curve) {
    emin = std::min(emin, E);
    emax = std::max(emax, E);
  }
  const double A = ids.energies.front(), B = ids.energies.back();
  if (A > emin - margin + 1e-9 || B < emax + margin - 1e-9)
    throw DomainError("IDS window must extend the evaluation window by the margin on both sides");

  const std::size_t M = ids.energies.size();
  std::vector<double> G(M);
  for (std::size_t m = 0; m < M; ++m) G[m] = ids.F[m] - free.F[m];

  ThoulessResult res;
  double mean_shift = 0.0;
  for (const auto& [E, sum_gamma] : gamma_curve) {
    double I = 0.0;
    for (std::size_t m = 0; m + 1 < M; ++m) {
      const double dG = G[m + 1] - G[m];
      if (dG != 0.0) I += kernel_average(E, ids.energies[m], ids.energies[m + 1]) * dG;
    }
    res.integral.push_back(I);
    mean_shift += I - sum_gamma;
  }
  res.a_fit = mean_shift / static_cast<double>(gamma_curve.size());
  for (std::size_t e = 0; e < gamma_curve.size(); ++e) {
    const double r = gamma_curve[e].second + res.a_fit - res.integral[e];
    res.residuals.push_back(r);
    res.max_residual = std::max(res.max_residual, std::abs(r));
  }

  // Heuristic tail estimate: oscillation of F - F0 across the margins times the kernel at the edges.
  double osc = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    const double t = ids.energies[m];
    if (t <= emin || t >= emax) {
      const double ref = t <= emin ? G.front() : G.back();
      osc = std::max(osc, std::abs(G[m] - ref));
    }
  }
  for (const auto& [E, s] : gamma_curve)
    res.truncation_bound = std::max(res.truncation_bound, 2.0 * osc * (std::abs(kernel(E, A)) + std::abs(kernel(E, B))));
  return res;
}

}  // namespace dirac_loc
