#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "dirac_loc/spectrum.hpp"

namespace dirac_loc {

enum class Side { Plus, Minus };

/// Phi(x_k) = frames[k] * r_steps[k] * ... * r_steps[1], indexed in propagation order
/// (k = 0 at the launch boundary). The R factors carry the exponential growth.
struct BoundarySolution {
  Side side = Side::Minus;
  double energy = 0.0;
  int N = 1;
  std::vector<double> positions;
  std::vector<Mat> frames;
  std::vector<Mat> r_steps;

  std::size_t index_of(double x) const;
  /// Full value at a stored position; may overflow on long boxes.
  Mat value(double x) const;
  Mat up(double x) const { return value(x).topRows(N); }
  Mat down(double x) const { return value(x).bottomRows(N); }
  /// log |det C| of the accumulated scale at x.
  double log_scale(double x) const;
};

/// Phi+ launched from the right end and Phi- from the left end, both with value (0; I).
/// Stored at cell boundaries and at the requested extra points.
std::pair<BoundarySolution, BoundarySolution> boundary_solutions(const ModelSpec& spec, const DisorderWord& word,
                                                                 const BoxSpec& box, double E,
                                                                 const std::vector<double>& extra = {});

/// Kernel in log-balanced form: value = unit * exp(log_scale).
struct KernelValue {
  Mat unit;
  double log_scale = 0.0;
  Mat value() const { return unit * std::exp(log_scale); }
  double log_norm() const;
};

/// Kernel from precomputed boundary solutions; x and y must be stored positions.
KernelValue green_kernel(const BoundarySolution& plus, const BoundarySolution& minus, double x, double y);

/// Dirac resolvent kernel (2N x 2N) of the box restriction: u(y) = int G(x, y) psi(x) dx
/// solves J u' + (V - E) u = psi with u_up = 0 at both ends.
Mat dirac_green(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E, double x, double y);

/// Schroedinger resolvent kernel (N x N): -u'' + (W - E) u = psi, u = 0 at both ends.
Mat schrodinger_green(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E, double x,
                      double y);

struct DecayPoint {
  long L = 0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  long samples = 0;
  long singular = 0;
};

struct DecayFit {
  double slope = 0.0;
  double ci = 0.0;  // half-width of the 95% bootstrap interval
  double intercept = 0.0;
  std::vector<DecayPoint> points;
};

/// Median over samples of log ||G(E, x = 0, y = ell (L - 2))|| for each L, and the least-squares slope in L.
DecayFit green_decay_fit(const ModelSpec& spec, double E, const std::vector<long>& L_list, long samples,
                         std::uint64_t seed, int workers = 1);

/// Frequency of L * max ||G(x, y)|| <= exp(-m L) over 16 middle-third x-points and
/// 4 y-points in each collar [ell (L - collar_outer), ell (L - collar_inner)].
Proportion regularity_probability(const ModelSpec& spec, double E, double m, long L, long samples,
                                  std::uint64_t seed, int workers = 1, double collar_outer = 3.0,
                                  double collar_inner = 1.0);

}  // namespace dirac_loc
