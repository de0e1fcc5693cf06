#include <doctest.h>

#include <numbers>

#include "dirac_loc/expm.hpp"
#include "dirac_loc/lyapunov.hpp"
#include "dirac_loc/model.hpp"
#include "oracles.hpp"

using namespace dirac_loc;

namespace {

ModelSpec case_without_vper(int c, int N, double ell = 0.1) {
  ModelSpec s = case_model(c, N, ell);
  s.v_per = Mat::Zero(N, N);
  return s;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("case coefficients") {
  using A = std::array<double, 4>;
  CHECK(case_coefficients(1) == std::make_pair(A{1, 0, 0, 0}, A{1, 0, 0, 0}));
  CHECK(case_coefficients(5) == std::make_pair(A{0, 0, 0, 1}, A{1, 0, 0, 0}));
  CHECK(case_coefficients(4) == std::make_pair(A{0, 1, 0, 0}, A{0, 0, 0, 1}));
  CHECK(case_coefficients(2) == std::make_pair(A{0, 0, 0, 1}, A{0, 0, 0, 1}));
  CHECK(case_coefficients(3) == std::make_pair(A{1, 0, 0, 0}, A{0, 0, 0, 1}));
  CHECK_THROWS_AS(case_coefficients(6), DomainError);
}

TEST_CASE("validation") {
  ModelSpec s = case_model(2, 2, 0.1);
  CHECK_NOTHROW(validate(s));
  ModelSpec bad = s;
  bad.v_per(0, 1) = 3.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = s;
  bad.disorder[0].probs = {0.5, 0.6};
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = s;
  bad.alpha[2] = 1.0;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = s;
  bad.ell = -0.1;
  CHECK_THROWS_AS(validate(bad), DomainError);
  bad = s;
  bad.disorder.pop_back();
  CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("potential assembly") {
  CHECK(potential(case_without_vper(1, 2), vec({0, 0})).norm() == 0.0);
  CHECK((potential(case_without_vper(2, 1), vec({1})) - (Mat(2, 2) << 1, 0, 0, -1).finished()).norm() == 0.0);
  const ModelSpec c5 = case_model(5, 2, 0.1);
  const Mat D = delta_matrix(2);
  Mat expect = Mat::Zero(4, 4);
  expect.topLeftCorner(2, 2) = D;
  expect.bottomRightCorner(2, 2) = -D;
  expect.diagonal() += vec({1, 0, 1, 0});
  CHECK((potential(c5, vec({1, 0})) - expect).norm() == 0.0);
  for (int c = 1; c <= 5; ++c) {
    const Mat V = potential(case_model(c, 3, 0.1), vec({1, 0, 1}));
    CHECK((V - V.transpose()).norm() == 0.0);
  }
}

TEST_CASE("generators") {
  const double E = 0.7;
  const Mat X0 = generator(free_model(2, 0.1), vec({0, 0}), E);
  CHECK((X0 + E * symplectic_form(2)).norm() == 0.0);
  for (double e : {-1.0, 0.0, 1.0, 2.5})
    CHECK((generator(case_without_vper(2, 1), vec({1}), e) - (Mat(2, 2) << 0, e + 1, -e + 1, 0).finished()).norm() <
          1e-15);
  const Mat X1 = generator(case_model(1, 3, 0.1), vec({1, 0, 1}), 1.3);
  CHECK((X1 + X1.transpose()).norm() == 0.0);
  const Mat Xs = schrodinger_generator(case_model(2, 2, 0.1), vec({1, 0}), 0.5);
  CHECK((Xs.topLeftCorner(2, 2)).norm() == 0.0);
  CHECK((Xs.topRightCorner(2, 2) - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("cell transfer matrices") {
  SUBCASE("free rotation") {
    const double ell = 0.5, E = std::numbers::pi / 2 / ell;
    const auto T = cell_transfer(free_model(1, ell), vec({0}), E);
    CHECK((T.entries - (Mat(2, 2) << 0, 1, -1, 0).finished()).norm() < 1e-14);
    CHECK(T.tag != GroupTag::GeneralLinear);
  }
  SUBCASE("nilpotent generator") {
    const ModelSpec s = case_without_vper(2, 1, 0.3);
    const auto T = cell_transfer(s, vec({1}), 1.0);
    CHECK((T.entries - (Mat(2, 2) << 1, 0.6, 0, 1).finished()).norm() < 1e-15);
  }
  SUBCASE("case 5 against the Taylor oracle") {
    ModelSpec s = case_model(5, 2, 0.3);
    const auto T = cell_transfer(s, vec({1, 0}), 0.7);
    CHECK(is_spo(T.entries, 1e-12));
    CHECK(T.tag == GroupTag::OrthoSymplectic);
    CHECK((T.entries - oracle::taylor_expm(0.3 * generator(s, vec({1, 0}), 0.7))).norm() < 1e-10);
  }
  SUBCASE("group invariants per case") {
    for (int c = 1; c <= 5; ++c) {
      const ModelSpec s = case_model(c, 3, 0.2);
      const auto T = cell_transfer(s, vec({1, 1, 0}), 0.9);
      CHECK(is_symplectic(T.entries, 1e-10));
      if (c == 1) CHECK(is_orthogonal(T.entries, 1e-10));
      if (c == 5) CHECK(is_spo(T.entries, 1e-10));
    }
  }
}

TEST_CASE("Schroedinger transfer matrices") {
  const double ell = 0.4;
  ModelSpec s = free_model(2, ell);
  s.kind = Kind::Schrodinger;
  SUBCASE("hyperbolic for E < 0") {
    const double E = -2.0, k = std::sqrt(-E);
    const Mat T = schrodinger_cell_transfer(s, vec({0, 0}), E).entries;
    CHECK(T(0, 0) == doctest::Approx(std::cosh(k * ell)).epsilon(1e-13));
    CHECK(T(0, 2) == doctest::Approx(std::sinh(k * ell) / k).epsilon(1e-13));
    CHECK(T(2, 0) == doctest::Approx(k * std::sinh(k * ell)).epsilon(1e-13));
  }
  SUBCASE("oscillatory for E > 0") {
    const double E = 3.0, k = std::sqrt(E);
    const Mat T = schrodinger_cell_transfer(s, vec({0, 0}), E).entries;
    CHECK(T(1, 1) == doctest::Approx(std::cos(k * ell)).epsilon(1e-13));
    CHECK(T(1, 3) == doctest::Approx(std::sin(k * ell) / k).epsilon(1e-13));
  }
  SUBCASE("random W against RK4") {
    std::mt19937_64 rng(17);
    ModelSpec r = case_model(2, 3, ell);
    r.kind = Kind::Schrodinger;
    Mat W = oracle::random_matrix(rng, 3, 3);
    r.v_per = 0.5 * (W + W.transpose());
    const Vec om = vec({1, 0, 1});
    const double E = 0.8;
    const Mat X = schrodinger_generator(r, om, E);
    const Mat ref = oracle::rk4([&](double) { return X; }, Mat::Identity(6, 6), 0.0, ell, 2000);
    CHECK((schrodinger_cell_transfer(r, om, E).entries - ref).norm() < 1e-8);
    CHECK(is_symplectic(schrodinger_cell_transfer(r, om, E).entries, 1e-10));
  }
}

TEST_CASE("transfer over intervals") {
  const ModelSpec s = case_model(2, 2, 0.1);
  const DisorderWord w = sample_word(s, 42, -5, 5);
  const double E = 1.1;
  CHECK((transfer_interval(s, w, E, 0.2, 0.2).entries - Mat::Identity(4, 4)).norm() == 0.0);
  const Mat two = cell_transfer(s, w.cell(1), E).entries * cell_transfer(s, w.cell(0), E).entries;
  CHECK((transfer_interval(s, w, E, 0.0, 0.2).entries - two).norm() < 1e-13);
  // Mid-cell endpoints against RK4 of the piecewise-constant ODE.
  auto X = [&](double x) {
    const long n = static_cast<long>(std::floor(x / s.ell + 1e-12));
    return generator(s, w.cell(n), E);
  };
  const Mat ref = oracle::rk4(X, Mat::Identity(4, 4), 0.05, 0.1, 500);
  const Mat ref2 = oracle::rk4(X, ref, 0.1, 0.15, 500);
  CHECK((transfer_interval(s, w, E, 0.05, 0.15).entries - ref2).norm() < 1e-8);
  const Mat fwd = transfer_interval(s, w, E, -0.33, 0.27).entries;
  const Mat bwd = transfer_interval(s, w, E, 0.27, -0.33).entries;
  CHECK((fwd * bwd - Mat::Identity(4, 4)).norm() < 1e-12);
  CHECK_THROWS_AS(transfer_interval(s, w, E, 0.0, 0.9), CoverageError);
}

TEST_CASE("disorder words") {
  const ModelSpec pm = free_model(3, 0.1);
  CHECK(sample_word(pm, 1, 0, 99).omega.norm() == 0.0);
  const ModelSpec s = case_model(2, 1, 0.1);
  const DisorderWord w = sample_word(s, 2024, 0, 99999);
  const double mean = w.omega.mean();
  CHECK(mean >= 0.494);
  CHECK(mean <= 0.506);
  const DisorderWord w2 = sample_word(s, 2024, 0, 99999);
  CHECK(w.omega == w2.omega);
  CHECK(w.codes == w2.codes);
  // Random access: a sub-range reproduces the same cells.
  const DisorderWord part = sample_word(s, 2024, 500, 600);
  for (long n = 500; n <= 600; ++n) CHECK(part.cell(n) == w.cell(n));
  CHECK(sample_word(s, 2025, 0, 999).omega != w.omega.leftCols(1000));
  // Inverse CDF on a three-point law.
  ModelSpec t = s;
  t.disorder = {Law{{-1.0, 0.0, 2.0}, {0.2, 0.5, 0.3}}};
  const DisorderWord wt = sample_word(t, 9, 0, 99999);
  const double n = 1e5;
  const double f0 = (wt.omega.array() == -1.0).cast<double>().sum() / n;
  const double f2 = (wt.omega.array() == 2.0).cast<double>().sum() / n;
  CHECK(std::abs(f0 - 0.2) < 3 * std::sqrt(0.2 * 0.8 / n) + 1e-3);
  CHECK(std::abs(f2 - 0.3) < 3 * std::sqrt(0.3 * 0.7 / n) + 1e-3);
}

TEST_CASE("duality") {
  ModelSpec c3 = case_model(3, 2, 0.1);
  const ModelSpec d3 = dual_model(c3);
  using A = std::array<double, 4>;
  CHECK(d3.alpha == A{-1, 0, 0, 0});
  CHECK(d3.beta == A{0, -1, 0, 0});
  for (int c = 1; c <= 5; ++c) {
    const ModelSpec s = case_model(c, 2, 0.1);
    const ModelSpec dd = dual_model(dual_model(s));
    CHECK(dd.alpha == s.alpha);
    CHECK(dd.beta == s.beta);
    // T_dual(-E) = P T(E) P.
    const Mat P = duality_p(2);
    const Vec om = vec({1, 0});
    const Mat lhs = cell_transfer(dual_model(s), om, -0.8).entries;
    const Mat rhs = P * cell_transfer(s, om, 0.8).entries * P;
    CHECK((lhs - rhs).norm() < 1e-12);
  }
  const ModelSpec s = case_model(2, 1, 0.1);
  const auto a = lyapunov_spectrum(s, 1.0, 100000, 7);
  const auto b = lyapunov_spectrum(dual_model(s), -1.0, 100000, 7);
  CHECK(std::abs(a.gamma(0) - b.gamma(0)) <= 4 * std::max(a.std_error(0), b.std_error(0)) + 1e-12);
}

TEST_CASE("cell cache") {
  const ModelSpec s = case_model(2, 2, 0.1);
  const DisorderWord w = sample_word(s, 3, 0, 50);
  CellCache cache(s, 0.9);
  for (long n = 0; n <= 50; ++n) {
    CHECK((cache.cell(w, n) - cell_transfer(s, w.cell(n), 0.9).entries).norm() < 1e-15);
    const auto& [k, M] = cache.substep(w, n);
    Mat P = Mat::Identity(4, 4);
    for (int i = 0; i < k; ++i) P = M * P;
    CHECK((P - cache.cell(w, n)).norm() < 1e-12);
  }
  CHECK_THROWS_AS(cache.cell(w, 51), CoverageError);
}
