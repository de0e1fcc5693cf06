#pragma once

#include <utility>
#include <vector>

#include "dirac_loc/lyapunov.hpp"

namespace dirac_loc {

/// Box of half-width L cells around `center`: interval [ell (center - L), ell (center + L)],
/// Dirichlet condition on the up component at both ends.
struct BoxSpec {
  long L = 1;
  long center = 0;

  long first_cell() const { return center - L; }
  long last_cell() const { return center + L - 1; }
  double left(double ell) const { return ell * static_cast<double>(center - L); }
  double right(double ell) const { return ell * static_cast<double>(center + L); }
};

/// Word covering exactly the cells of `box`.
DisorderWord box_word(const ModelSpec& spec, std::uint64_t seed, const BoxSpec& box);

/// det of the upper-right N x N block of T_{left}^{right}(E).
double boundary_determinant(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E);

/// Number of restricted eigenvalues <= E up to an E-independent offset. Computed
/// from the lifted Lagrangian phase of the frame launched at the left boundary, so
/// C(b) - C(a) counts eigenvalues in (a, b] with multiplicity.
long counting_function(const ModelSpec& spec, const DisorderWord& word, const BoxSpec& box, double E);

struct Eigenvalue {
  double energy = 0.0;
  int multiplicity = 0;       // jump of the counting function
  int rank_multiplicity = 0;  // corank of the (1,2) block, singular values < 1e-7 relative
};

/// Eigenvalues in (E_lo, E_hi], isolated by bisection on the counting function to 1e-10.
std::vector<Eigenvalue> restricted_eigenvalues(const ModelSpec& spec, const DisorderWord& word,
                                               const BoxSpec& box, double E_lo, double E_hi);

struct IdsCurve {
  std::vector<double> energies;
  std::vector<double> F;
  std::vector<double> std_error;
  long L = 0;
  long samples = 0;
};

/// F(E) = signed count of eigenvalues between 0 and E per unit length, averaged over samples.
IdsCurve ids_estimate(const ModelSpec& spec, long L, long samples, const std::vector<double>& grid,
                      std::uint64_t seed, int workers = 1);

/// F0(E) = N E / pi on the given grid.
IdsCurve free_ids(int N, const std::vector<double>& grid);

/// Frequency of dist(E, restricted spectrum) <= exp(-sigma L^beta).
Proportion wegner_probability(const ModelSpec& spec, double E, long L, double sigma, double beta, long samples,
                              std::uint64_t seed, int workers = 1);

struct ThoulessResult {
  double a_fit = 0.0;
  double max_residual = 0.0;
  double truncation_bound = 0.0;
  std::vector<double> residuals;
  std::vector<double> integral;
};

/// Fits sum_{i<=N} gamma_i(E) = -a + int log|(E - t)/(t - i)| d(F - F0)(t) over the
/// evaluation grid. gamma_curve holds (E, sum of the N positive exponents) at each
/// evaluation energy. The IDS window must extend `margin` beyond the evaluation window.
ThoulessResult thouless_residual(const std::vector<std::pair<double, double>>& gamma_curve, const IdsCurve& ids,
                                 const IdsCurve& free, double margin = 3.0);

}  // namespace dirac_loc
