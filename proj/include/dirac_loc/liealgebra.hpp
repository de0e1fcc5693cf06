#pragma once

#include <limits>
#include <vector>

#include "dirac_loc/model.hpp"

namespace dirac_loc {

/// X_P(E) for every P in {0,1}^N, lexicographic in P (P_1 most significant).
std::vector<Mat> vertex_generators(const ModelSpec& spec, double E);

/// Breadth-first bracket closure of span(generators). A direction is admitted when
/// its residual after projection exceeds tol times the operand scale.
/// max_dim <= 0 selects (2N)^2 + 1.
LieBasis generate_algebra(const std::vector<Mat>& generators, double tol = 1e-9, int max_dim = 0);

Classification classify(const LieBasis& basis, int N);

struct ThresholdReport {
  double lambda_max = 0.0, lambda_min = 0.0;
  double ell_c = std::numeric_limits<double>::infinity();
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool empty = false;
  double d_log_O = 0.5;
};

ThresholdReport disorder_threshold(const ModelSpec& spec, double d_log_O = 0.5);

struct CriticalEnergy {
  double energy = 0.0;     // grid point with a dimension drop
  int dim = 0;
  double lo = 0.0, hi = 0.0;  // bisection-refined bracket of the low-dimension set
};

struct CriticalScan {
  std::vector<double> energies;
  std::vector<int> dims;
  std::vector<Classification> classes;
  int generic_dim = 0;
  std::vector<CriticalEnergy> drops;
};

CriticalScan critical_energy_scan(const ModelSpec& spec, const std::vector<double>& grid, double tol = 1e-9,
                                  int workers = 1);

}  // namespace dirac_loc
