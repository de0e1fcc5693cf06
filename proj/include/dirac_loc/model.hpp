#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "dirac_loc/matgroup.hpp"

namespace dirac_loc {

enum class Kind { Dirac, Schrodinger };

/// Finite-support law: values with probabilities summing to one.
struct Law {
  std::vector<double> values;
  std::vector<double> probs;
};

Law bernoulli(double p = 0.5);
Law point_mass(double value);

struct ModelSpec {
  int N = 1;
  double ell = 0.1;
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};
  Mat v_per;                  // N x N symmetric
  std::vector<Law> disorder;  // one law per channel
  Kind kind = Kind::Dirac;
};

/// Throws DomainError on violated invariants.
void validate(const ModelSpec& spec);

std::pair<std::array<double, 4>, std::array<double, 4>> case_coefficients(int case_id);

/// Case model with v_per = Delta and Bernoulli(p) disorder on every channel.
ModelSpec case_model(int case_id, int N, double ell, double p = 0.5);

/// V = 0 on every cell.
ModelSpec free_model(int N, double ell);

Mat potential(const ModelSpec& spec, const Vec& omega);

/// X = J (V - E).
Mat generator(const ModelSpec& spec, const Vec& omega, double E);

/// [[0, I], [W - E, 0]] with W = v_per + diag(omega).
Mat schrodinger_generator(const ModelSpec& spec, const Vec& omega, double E);

/// Generator of the first-order flow for the spec's kind.
Mat flow_generator(const ModelSpec& spec, const Vec& omega, double E);

struct TransferMatrix {
  Mat entries;
  double energy = 0.0;
  double x = 0.0, y = 0.0;
  GroupTag tag = GroupTag::GeneralLinear;
};

TransferMatrix cell_transfer(const ModelSpec& spec, const Vec& omega, double E);
TransferMatrix schrodinger_cell_transfer(const ModelSpec& spec, const Vec& omega, double E);

/// Disorder on cells n_min..n_max, cell n covering [ell n, ell (n+1)].
struct DisorderWord {
  long n_min = 0, n_max = -1;
  std::uint64_t seed = 0;
  Mat omega;                         // N x (n_max - n_min + 1)
  std::vector<std::uint64_t> codes;  // mixed-radix support indices per cell

  long size() const { return n_max - n_min + 1; }
  bool covers(long n) const { return n >= n_min && n <= n_max; }
  Vec cell(long n) const { return omega.col(n - n_min); }
  std::uint64_t code(long n) const { return codes[static_cast<std::size_t>(n - n_min)]; }
};

/// omega_i^(n) drawn by inverse CDF from uniform01(seed, n, i).
DisorderWord sample_word(const ModelSpec& spec, std::uint64_t seed, long n_min, long n_max);

/// Word holding the same omega on every cell.
DisorderWord constant_word(const ModelSpec& spec, const Vec& omega, long n_min, long n_max);

/// T_x^y: propagates solutions from x to y; y < x yields the exact inverse.
TransferMatrix transfer_interval(const ModelSpec& spec, const DisorderWord& word, double E, double x,
                                 double y);

/// (V0, V1, V3) -> (-V0, -V3, -V1); spectra map E -> -E.
ModelSpec dual_model(const ModelSpec& spec);

/// Per-energy cache of exp(h X) keyed by the cell's disorder pattern.
class CellCache {
 public:
  CellCache(const ModelSpec& spec, double E);

  const Mat& cell(const DisorderWord& word, long n);
  /// exp((ell / k) X) with k chosen so the Lagrangian phase moves by < 1 per substep.
  const std::pair<int, Mat>& substep(const DisorderWord& word, long n);

  double energy() const { return E_; }
  const ModelSpec& spec() const { return spec_; }

 private:
  const ModelSpec& spec_;
  double E_;
  std::unordered_map<std::uint64_t, Mat> full_;
  std::unordered_map<std::uint64_t, std::pair<int, Mat>> sub_;
};

}  // namespace dirac_loc
