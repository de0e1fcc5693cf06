#include "dirac_loc/green.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <limits>
#include <unordered_map>

#include "dirac_loc/expm.hpp"
#include "dirac_loc/parallel.hpp"
#include "dirac_loc/rng.hpp"

namespace dirac_loc {

std::size_t BoundarySolution::index_of(double x) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  std::size_t lo = 0, hi = positions.size();
  const bool ascending = side == Side::Minus;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double p = positions[mid];
    if (std::abs(p - x) <= tol) return mid;
    if ((p < x) == ascending) lo = mid + 1;
    else hi = mid;
  }
  throw DomainError("position is not stored in the boundary solution");
}

Mat BoundarySolution::value(double x) const {
  const std::size_t k = index_of(x);
  Mat C = Mat::Identity(N, N);
  for (std::size_t i = 1; i <= k; ++i) C = r_steps[i] * C;
  return frames[k] * C;
}

double BoundarySolution::log_scale(double x) const {
  const std::size_t k = index_of(x);
  double s = 0.0;
  for (std::size_t i = 1; i <= k; ++i) s += std::log(std::abs(r_steps[i].diagonal().prod()));
  return s;
}

double KernelValue::log_norm() const {
  const double n = Eigen::JacobiSVD<Mat>(unit).singularValues()(0);
  return log_scale + std::log(n);
}

namespace {

void require_cover(const DisorderWord& word, const BoxSpec& box) {
  if (box.L < 1) throw DomainError("box half-width must be positive");
  if (!word.covers(box.first_cell()) || !word.covers(box.last_cell()))
    throw CoverageError("disorder word does not cover the box");
}

// Splits F = Q R with positive diag(R); F becomes Q.
Mat split_qr(Mat& F) {
  Eigen::HouseholderQR<Mat> qr(F);
  Mat Q = qr.householderQ() * Mat::Identity(F.rows(), F.cols());
  Mat R = qr.matrixQR().topRows(F.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index p = 0; p < F.cols(); ++p)
    if (R(p, p) < 0.0) {
      Q.col(p) = -Q.col(p);
      R.row(p) = -R.row(p);
    }
  F = std::move(Q);
  return R;
}

BoundarySolution sweep(const ModelSpec& spec, const DisorderWord& word, double E, Side side,
                       const std::vector<double>& ascending) {
  const int N = spec.N;
  const double ell = spec.ell;
  BoundarySolution sol;
  sol.side = side;
  sol.energy = E;
  sol.N = N;
  sol.positions = ascending;
  if (side == Side::Plus) std::reverse(sol.positions.begin(), sol.positions.end());
  Mat F = Mat::Zero(2 * N, N);
  F.bottomRows(N) = Mat::Identity(N, N);
  sol.frames.push_back(F);
  sol.r_steps.push_back(Mat::Identity(N, N));
  std::unordered_map<std::uint64_t, Mat> full;
  for (std::size_t k = 1; k < sol.positions.size(); ++k) {
    const double a = sol.positions[k - 1], b = sol.positions[k];
    const long n = static_cast<long>(std::floor(0.5 * (a + b) / ell));
    const double h = b - a;
    Mat T;
    if (std::abs(std::abs(h) - ell) <= 1e-12 * ell && word.code(n) != std::numeric_limits<std::uint64_t>::max()) {
      auto it = full.find(word.code(n));
      if (it == full.end()) it = full.emplace(word.code(n), expm(h * flow_generator(spec, word.cell(n), E))).first;
      T = it->second;
    } else {
      T = expm(h * flow_generator(spec, word.cell(n), E));
    }
    F = T * F;
    sol.r_steps.push_back(split_qr(F));
    sol.frames.push_back(F);
  }
  return sol;
}

struct Factors {
  const BoundarySolution& sol;
  // Q(y) * (R chain from x down to y)^{-1} * Z, with y nearer the launch than x.
  KernelValue apply(std::size_t ix, std::size_t iy, Mat M) const {
    KernelValue out;
    for (std::size_t k = ix; k > iy; --k) {
      M = sol.r_steps[k].triangularView<Eigen::Upper>().solve(M);
      const double s = M.cwiseAbs().maxCoeff();
      if (s > 0.0 && std::isfinite(s)) {
        M /= s;
        out.log_scale += std::log(s);
      }
    }
    out.unit = sol.frames[iy] * M;
    return out;
  }
};

KernelValue kernel_with_rhs(const BoundarySolution& plus, const BoundarySolution& minus, double x, double y,
                            const Mat& rhs) {
  const int N = plus.N;
  const std::size_t px = plus.index_of(x), mx = minus.index_of(x);
  Mat A(2 * N, 2 * N);
  A << plus.frames[px], -minus.frames[mx];
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  const double cond = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= 1e12)) throw SingularConfigurationError("Green kernel: singular boundary configuration", cond);
  const Mat Z = svd.solve(rhs);
  if (x <= y) return Factors{plus}.apply(px, plus.index_of(y), Z.topRows(N));
  return Factors{minus}.apply(mx, minus.index_of(y), Z.bottomRows(N));
}

}  // namespace

std::pair<BoundarySolution, BoundarySolution> boundary_solutions(const ModelSpec& spec, const DisorderWord& word,
                                                                 const BoxSpec& box, double E,
                                                                 const std::vector<double>& extra) {
  require_cover(word, box);
  const double ell = spec.ell;
  const double left = box.left(ell), right = box.right(ell);
  std::vector<double> pos;
  for (long n = box.first_cell(); n <= box.last_cell() + 1; ++n) pos.push_back(ell * static_cast<double>(n));
  for (double x : extra) {
    if (x < left - 1e-12 || x > right + 1e-12) throw CoverageError("requested point outside the box");
    pos.push_back(x);
  }
  std::sort(pos.begin(), pos.end());
  std::vector<double> uniq;
  for (double p : pos)
    if (uniq.empty() || p - uniq.back() > 1e-12 * std::max(1.0, std::abs(p))) uniq.push_back(p);
  return {sweep(spec, word, E, Side::Plus, uniq), sweep(spec, word, E, Side::Minus, uniq)};
}

KernelValue green_kernel(const BoundarySolution& plus, const BoundarySolution& minus, double x, double y) {
  const int N = plus.N;
  Mat J = symplectic_form(N);
  return kernel_with_rhs(plus, minus, x, y, -J);
}

namespace {

KernelValue schrodinger_kernel(const BoundarySolution& plus, const BoundarySolution& minus, double x, double y) {
  const int N = plus.N;
  Mat rhs = Mat::Zero(2 * N, N);
  rhs.bottomRows(N) = -Mat::Identity(N, N);
  KernelValue k = kernel_with_rhs(plus, minus, x, y, rhs);
  k.unit = k.unit.topRows(N).eval();
  return k;
}

KernelValue kernel_for(const ModelSpec& spec, const BoundarySolution& plus, const BoundarySolution& minus, double x,
                       double y) {
  return spec.kind == Kind::Dirac ? green_kernel(plus, minus, x, y) : schrodinger_kernel(plus, minus, x, y);
}

}  // namespace

Mat dirac_green(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E, double x, double y) {
  if (spec.kind != Kind::Dirac) throw DomainError("dirac_green requires kind = Dirac");
  const auto [plus, minus] = boundary_solutions(spec, word, box, E, {x, y});
  return green_kernel(plus, minus, x, y).value();
}

Mat schrodinger_green(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E, double x,
                      double y) {
  if (spec.kind != Kind::Schrodinger) throw DomainError("schrodinger_green requires kind = Schrodinger");
  const auto [plus, minus] = boundary_solutions(spec, word, box, E, {x, y});
  return schrodinger_kernel(plus, minus, x, y).value();
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const double f = pos - static_cast<double>(i);
  return i + 1 < v.size() ? v[i] * (1.0 - f) + v[i + 1] * f : v[i];
}

std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

DecayFit green_decay_fit(const ModelSpec& spec, double E, const std::vector<long>& L_list, long samples,
                         std::uint64_t seed, int workers) {
  validate(spec);
  if (L_list.size() < 3) throw DomainError("green_decay_fit needs at least three box sizes");
  if (samples < 1) throw DomainError("samples must be positive");
  DecayFit fit;
  std::vector<std::vector<double>> valid(L_list.size());
  for (std::size_t li = 0; li < L_list.size(); ++li) {
    const long L = L_list[li];
    if (L < 3) throw DomainError("box half-width must be at least 3");
    const BoxSpec box{L, 0};
    const double x = 0.0, y = spec.ell * static_cast<double>(L - 2);
    std::vector<double> vals(static_cast<std::size_t>(samples));
    const std::uint64_t lseed = derive_seed(seed, static_cast<std::uint64_t>(L));
    parallel_for(samples, workers, [&](long k) {
      const DisorderWord word = box_word(spec, derive_seed(lseed, static_cast<std::uint64_t>(k)), box);
      const auto [plus, minus] = boundary_solutions(spec, word, box, E, {x, y});
      try {
        vals[static_cast<std::size_t>(k)] = kernel_for(spec, plus, minus, x, y).log_norm();
      } catch (const SingularConfigurationError&) {
        vals[static_cast<std::size_t>(k)] = std::numeric_limits<double>::quiet_NaN();
      }
    });
    DecayPoint pt;
    pt.L = L;
    pt.samples = samples;
    for (double v : vals)
      if (std::isnan(v)) ++pt.singular;
      else valid[li].push_back(v);
    if (pt.singular > samples / 5 || valid[li].empty())
      throw DataQualityError("green_decay_fit: more than 20% singular configurations");
    pt.median = quantile(valid[li], 0.5);
    pt.q25 = quantile(valid[li], 0.25);
    pt.q75 = quantile(valid[li], 0.75);
    fit.points.push_back(pt);
  }
  std::vector<double> Ls, meds;
  for (const auto& p : fit.points) {
    Ls.push_back(static_cast<double>(p.L));
    meds.push_back(p.median);
  }
  std::tie(fit.slope, fit.intercept) = least_squares(Ls, meds);

  const int reps = 200;
  std::vector<double> slopes;
  for (int b = 0; b < reps; ++b) {
    std::vector<double> m;
    for (std::size_t li = 0; li < valid.size(); ++li) {
      const auto& v = valid[li];
      std::vector<double> draw(v.size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const double u = uniform01(seed ^ 0xB0075742Aull, static_cast<std::uint64_t>(b) * 1000003u + li, i);
        draw[i] = v[static_cast<std::size_t>(u * static_cast<double>(v.size()))];
      }
      m.push_back(quantile(std::move(draw), 0.5));
    }
    slopes.push_back(least_squares(Ls, m).first);
  }
  fit.ci = 0.5 * (quantile(slopes, 0.975) - quantile(slopes, 0.025));
  return fit;
}

Proportion regularity_probability(const ModelSpec& spec, double E, double m, long L, long samples,
                                  std::uint64_t seed, int workers, double collar_outer, double collar_inner) {
  validate(spec);
  if (!(m >= 0.0)) throw DomainError("m must be nonnegative");
  if (L < 4 || !(collar_outer > collar_inner) || collar_outer >= static_cast<double>(L))
    throw DomainError("invalid box or collar");
  const double ell = spec.ell;
  const BoxSpec box{L, 0};
  std::vector<double> xs, ys, extra;
  for (int i = 0; i < 16; ++i) xs.push_back(ell * static_cast<double>(L) * (-1.0 / 3.0 + (2.0 / 3.0) * i / 15.0));
  for (int j = 0; j < 4; ++j) {
    const double d = ell * (static_cast<double>(L) - collar_outer + (collar_outer - collar_inner) * j / 3.0);
    ys.push_back(d);
    ys.push_back(-d);
  }
  extra = xs;
  extra.insert(extra.end(), ys.begin(), ys.end());
  std::vector<char> regular(static_cast<std::size_t>(samples));
  const double threshold = -m * static_cast<double>(L) - std::log(static_cast<double>(L));
  parallel_for(samples, workers, [&](long k) {
    const DisorderWord word = box_word(spec, derive_seed(seed, static_cast<std::uint64_t>(k)), box);
    const auto [plus, minus] = boundary_solutions(spec, word, box, E, extra);
    double worst = -std::numeric_limits<double>::infinity();
    try {
      for (double x : xs)
        for (double y : ys) worst = std::max(worst, kernel_for(spec, plus, minus, x, y).log_norm());
    } catch (const SingularConfigurationError&) {
      worst = std::numeric_limits<double>::infinity();
    }
    regular[static_cast<std::size_t>(k)] = worst <= threshold;
  });
  long hits = 0;
  for (char r : regular) hits += r;
  return wilson(hits, samples);
}

}  // namespace dirac_loc
