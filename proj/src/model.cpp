#include "dirac_loc/model.hpp"

#include <cmath>
#include <limits>

#include "dirac_loc/expm.hpp"
#include "dirac_loc/rng.hpp"

namespace dirac_loc {

namespace {

constexpr std::uint64_t kNoCode = std::numeric_limits<std::uint64_t>::max();

// Radix of each channel, or empty when the pattern space does not fit in a code.
std::vector<std::uint64_t> radices(const ModelSpec& spec) {
  std::vector<std::uint64_t> r;
  double total = 1.0;
  for (const Law& law : spec.disorder) {
    r.push_back(law.values.size());
    total *= static_cast<double>(law.values.size());
  }
  if (total > 0x1.0p62) r.clear();
  return r;
}

std::uint64_t pattern_code(const ModelSpec& spec, const Vec& omega) {
  const auto r = radices(spec);
  if (r.empty()) return kNoCode;
  std::uint64_t code = 0;
  for (int i = spec.N - 1; i >= 0; --i) {
    const auto& vals = spec.disorder[i].values;
    std::size_t k = 0;
    while (k < vals.size() && vals[k] != omega(i)) ++k;
    if (k == vals.size()) return kNoCode;
    code = code * r[i] + k;
  }
  return code;
}

}  // namespace

Law bernoulli(double p) { return Law{{0.0, 1.0}, {1.0 - p, p}}; }

Law point_mass(double value) { return Law{{value}, {1.0}}; }

void validate(const ModelSpec& spec) {
  if (spec.N < 1) throw DomainError("N must be positive");
  if (!(spec.ell > 0.0) || !std::isfinite(spec.ell)) throw DomainError("ell must be positive");
  if (spec.v_per.rows() != spec.N || spec.v_per.cols() != spec.N)
    throw DomainError("v_per must be N x N");
  if ((spec.v_per - spec.v_per.transpose()).norm() > 1e-12 * std::max(1.0, spec.v_per.norm()))
    throw DomainError("v_per must be symmetric");
  if (static_cast<int>(spec.disorder.size()) != spec.N)
    throw DomainError("one disorder law per channel required");
  for (const Law& law : spec.disorder) {
    if (law.values.empty()) throw DomainError("empty disorder support");
    if (law.values.size() != law.probs.size()) throw DomainError("support/probability length mismatch");
    double sum = 0.0;
    for (std::size_t k = 0; k < law.values.size(); ++k) {
      if (!std::isfinite(law.values[k])) throw DomainError("unbounded disorder support");
      if (law.probs[k] < 0.0) throw DomainError("negative probability");
      sum += law.probs[k];
    }
    if (std::abs(sum - 1.0) > 1e-12) throw DomainError("probabilities must sum to 1");
  }
  if (spec.kind == Kind::Dirac && (spec.alpha[2] != 0.0 || spec.beta[2] != 0.0))
    throw DomainError("real mode requires alpha2 = beta2 = 0");
}

std::pair<std::array<double, 4>, std::array<double, 4>> case_coefficients(int case_id) {
  std::array<double, 4> a{}, b{};
  switch (case_id) {
    case 1: a[0] = 1; b[0] = 1; break;
    case 2: a[3] = 1; b[3] = 1; break;
    case 3: a[0] = 1; b[3] = 1; break;
    case 4: a[1] = 1; b[3] = 1; break;
    case 5: a[3] = 1; b[0] = 1; break;
    default: throw DomainError("case id must be in 1..5");
  }
  return {a, b};
}

ModelSpec case_model(int case_id, int N, double ell, double p) {
  ModelSpec spec;
  spec.N = N;
  spec.ell = ell;
  std::tie(spec.alpha, spec.beta) = case_coefficients(case_id);
  spec.v_per = delta_matrix(N);
  spec.disorder.assign(N, bernoulli(p));
  return spec;
}

ModelSpec free_model(int N, double ell) {
  ModelSpec spec;
  spec.N = N;
  spec.ell = ell;
  spec.v_per = Mat::Zero(N, N);
  spec.disorder.assign(N, point_mass(0.0));
  return spec;
}

Mat potential(const ModelSpec& spec, const Vec& omega) {
  if (spec.alpha[2] != 0.0 || spec.beta[2] != 0.0)
    throw DomainError("real mode requires alpha2 = beta2 = 0");
  const int N = spec.N;
  const Mat W = omega.asDiagonal();
  Mat V0 = spec.alpha[0] * spec.v_per + spec.beta[0] * W;
  Mat V1 = spec.alpha[1] * spec.v_per + spec.beta[1] * W;
  Mat V3 = spec.alpha[3] * spec.v_per + spec.beta[3] * W;
  Mat V(2 * N, 2 * N);
  V << V0 + V3, V1, V1, V0 - V3;
  return V;
}

Mat generator(const ModelSpec& spec, const Vec& omega, double E) {
  const Mat V = potential(spec, omega);
  return symplectic_form(spec.N) * (V - E * Mat::Identity(V.rows(), V.cols()));
}

Mat schrodinger_generator(const ModelSpec& spec, const Vec& omega, double E) {
  const int N = spec.N;
  Mat X = Mat::Zero(2 * N, 2 * N);
  X.topRightCorner(N, N) = Mat::Identity(N, N);
  X.bottomLeftCorner(N, N) = spec.v_per + Mat(omega.asDiagonal()) - E * Mat::Identity(N, N);
  return X;
}

Mat flow_generator(const ModelSpec& spec, const Vec& omega, double E) {
  return spec.kind == Kind::Dirac ? generator(spec, omega, E) : schrodinger_generator(spec, omega, E);
}

namespace {

TransferMatrix tagged(Mat T, double E, double x, double y) {
  TransferMatrix out;
  out.tag = group_tag(T, 1e-8 * std::max(1.0, T.norm()));
  out.entries = std::move(T);
  out.energy = E;
  out.x = x;
  out.y = y;
  return out;
}

}  // namespace

TransferMatrix cell_transfer(const ModelSpec& spec, const Vec& omega, double E) {
  return tagged(expm(spec.ell * flow_generator(spec, omega, E)), E, 0.0, spec.ell);
}

TransferMatrix schrodinger_cell_transfer(const ModelSpec& spec, const Vec& omega, double E) {
  return tagged(expm(spec.ell * schrodinger_generator(spec, omega, E)), E, 0.0, spec.ell);
}

DisorderWord sample_word(const ModelSpec& spec, std::uint64_t seed, long n_min, long n_max) {
  if (n_max < n_min) throw DomainError("sample_word: n_min > n_max");
  for (const Law& law : spec.disorder)
    if (law.values.empty()) throw DomainError("sample_word: empty support");
  DisorderWord w;
  w.n_min = n_min;
  w.n_max = n_max;
  w.seed = seed;
  w.omega.resize(spec.N, n_max - n_min + 1);
  w.codes.resize(static_cast<std::size_t>(n_max - n_min + 1));
  const auto r = radices(spec);
  for (long n = n_min; n <= n_max; ++n) {
    std::uint64_t code = 0;
    for (int i = spec.N - 1; i >= 0; --i) {
      const Law& law = spec.disorder[i];
      const double u = uniform01(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i));
      std::size_t k = 0;
      double acc = law.probs[0];
      while (u >= acc && k + 1 < law.values.size()) acc += law.probs[++k];
      w.omega(i, n - n_min) = law.values[k];
      if (!r.empty()) code = code * r[i] + k;
    }
    w.codes[static_cast<std::size_t>(n - n_min)] = r.empty() ? kNoCode : code;
  }
  return w;
}

DisorderWord constant_word(const ModelSpec& spec, const Vec& omega, long n_min, long n_max) {
  DisorderWord w;
  w.n_min = n_min;
  w.n_max = n_max;
  w.omega = omega.replicate(1, n_max - n_min + 1);
  w.codes.assign(static_cast<std::size_t>(n_max - n_min + 1), pattern_code(spec, omega));
  return w;
}

TransferMatrix transfer_interval(const ModelSpec& spec, const DisorderWord& word, double E, double x,
                                 double y) {
  const double ell = spec.ell;
  const double lo = std::min(x, y), hi = std::max(x, y);
  const int dim = 2 * spec.N;
  Mat T = Mat::Identity(dim, dim);
  if (lo == hi) return tagged(T, E, x, y);
  const long n_first = static_cast<long>(std::floor(lo / ell));
  const long n_last = static_cast<long>(std::ceil(hi / ell)) - 1;
  CellCache cache(spec, E);
  const double sign = (y >= x) ? 1.0 : -1.0;
  auto piece = [&](long n) -> Mat {
    const double a = std::max(lo, ell * n), b = std::min(hi, ell * (n + 1));
    if (b <= a) return Mat::Identity(dim, dim);
    if (!word.covers(n)) throw CoverageError("transfer_interval: word does not cover the interval");
    if (a == ell * n && b == ell * (n + 1)) {
      const Mat& C = cache.cell(word, n);
      return sign > 0 ? C : Mat(expm(-ell * flow_generator(spec, word.cell(n), E)));
    }
    return expm(sign * (b - a) * flow_generator(spec, word.cell(n), E));
  };
  if (sign > 0)
    for (long n = n_first; n <= n_last; ++n) T = piece(n) * T;
  else
    for (long n = n_last; n >= n_first; --n) T = piece(n) * T;
  return tagged(T, E, x, y);
}

ModelSpec dual_model(const ModelSpec& spec) {
  ModelSpec d = spec;
  d.alpha = {-spec.alpha[0], -spec.alpha[3], spec.alpha[2], -spec.alpha[1]};
  d.beta = {-spec.beta[0], -spec.beta[3], spec.beta[2], -spec.beta[1]};
  return d;
}

CellCache::CellCache(const ModelSpec& spec, double E) : spec_(spec), E_(E) {}

const Mat& CellCache::cell(const DisorderWord& word, long n) {
  if (!word.covers(n)) throw CoverageError("cell outside the disorder word");
  const std::uint64_t code = word.code(n);
  if (code != kNoCode) {
    auto it = full_.find(code);
    if (it != full_.end()) return it->second;
    return full_.emplace(code, expm(spec_.ell * flow_generator(spec_, word.cell(n), E_))).first->second;
  }
  static thread_local Mat scratch;
  scratch = expm(spec_.ell * flow_generator(spec_, word.cell(n), E_));
  return scratch;
}

const std::pair<int, Mat>& CellCache::substep(const DisorderWord& word, long n) {
  if (!word.covers(n)) throw CoverageError("cell outside the disorder word");
  auto make = [&]() {
    const Mat X = flow_generator(spec_, word.cell(n), E_);
    const double op = Eigen::JacobiSVD<Mat>(X).singularValues()(0);
    const int k = std::max(1, static_cast<int>(std::ceil(2.0 * spec_.N * spec_.ell * op)));
    return std::make_pair(k, Mat(expm((spec_.ell / k) * X)));
  };
  const std::uint64_t code = word.code(n);
  if (code != kNoCode) {
    auto it = sub_.find(code);
    if (it != sub_.end()) return it->second;
    return sub_.emplace(code, make()).first->second;
  }
  static thread_local std::pair<int, Mat> scratch;
  scratch = make();
  return scratch;
}

}  // namespace dirac_loc
