#include <doctest.h>

#include "dirac_loc/liealgebra.hpp"
#include "oracles.hpp"

using namespace dirac_loc;

namespace {

ModelSpec no_vper(int c, int N) {
  ModelSpec s = case_model(c, N, 0.1);
  s.v_per = Mat::Zero(N, N);
  return s;
}

}  // namespace

TEST_CASE("vertex generators") {
  CHECK(vertex_generators(case_model(2, 1, 0.1), 1.0).size() == 2);
  const ModelSpec s = case_model(2, 2, 0.1);
  const auto g = vertex_generators(s, 1.0);
  REQUIRE(g.size() == 4);
  const double P[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  for (int k = 0; k < 4; ++k) {
    Vec w(2);
    w << P[k][0], P[k][1];
    CHECK((g[static_cast<std::size_t>(k)] - generator(s, w, 1.0)).norm() == 0.0);
  }
  for (const Mat& X : vertex_generators(free_model(3, 0.1), 0.4)) CHECK((X + 0.4 * symplectic_form(3)).norm() == 0.0);
}

TEST_CASE("algebra generation") {
  SUBCASE("single generator") {
    const LieBasis b = generate_algebra({symplectic_form(2)});
    CHECK(b.dim == 1);
    CHECK(b.closed);
  }
  SUBCASE("N = 1, case 2, E = 1, v_per = 0") {
    const auto gens = vertex_generators(no_vper(2, 1), 1.0);
    CHECK((gens[0] - (Mat(2, 2) << 0, 1, -1, 0).finished()).norm() == 0.0);
    CHECK((gens[1] - (Mat(2, 2) << 0, 2, 0, 0).finished()).norm() == 0.0);
    const LieBasis b = generate_algebra(gens);
    CHECK(b.dim == 3);
    CHECK(b.classification == Classification::FullSymplectic);
    CHECK(oracle::brute_force_closure_dim(gens) == 3);
  }
  SUBCASE("case 5, N = 2 is spo") {
    const auto gens = vertex_generators(case_model(5, 2, 0.1), 1.0);
    const LieBasis b = generate_algebra(gens);
    CHECK(b.dim == 4);
    CHECK(b.classification == Classification::OrthoSymplectic);
    CHECK(oracle::brute_force_closure_dim(gens) == 4);
  }
  SUBCASE("case 3, N = 2 is the full symplectic algebra") {
    const auto gens = vertex_generators(case_model(3, 2, 0.1), 1.0);
    const LieBasis b = generate_algebra(gens);
    CHECK(b.dim == 10);
    CHECK(b.classification == Classification::FullSymplectic);
    CHECK(oracle::brute_force_closure_dim(gens) == 10);
  }
  SUBCASE("basis is orthonormal and closed under brackets") {
    const LieBasis b = generate_algebra(vertex_generators(case_model(2, 2, 0.1), 1.0));
    const Eigen::Index n = 16;
    Mat A(n, b.dim);
    for (int k = 0; k < b.dim; ++k) A.col(k) = Eigen::Map<const Vec>(b.elements[k].data(), n);
    CHECK((A.transpose() * A - Mat::Identity(b.dim, b.dim)).norm() < 1e-10);
    for (int i = 0; i < b.dim; ++i)
      for (int j = 0; j < i; ++j) {
        const Mat c = lie_bracket(b.elements[i], b.elements[j]);
        const Vec v = Eigen::Map<const Vec>(c.data(), n);
        CHECK((v - A * (A.transpose() * v)).norm() < 1e-8 * std::max(1.0, v.norm()));
      }
  }
  SUBCASE("dimension cap reports an unclosed basis") {
    const LieBasis b = generate_algebra(vertex_generators(case_model(2, 2, 0.1), 1.0), 1e-9, 5);
    CHECK_FALSE(b.closed);
    CHECK(b.dim == 5);
    CHECK_THROWS_AS(classify(b, 2), DomainError);
  }
  CHECK_THROWS_AS(generate_algebra({}), DomainError);
  CHECK_THROWS_AS(generate_algebra({Mat::Identity(2, 2), Mat::Identity(4, 4)}), DimensionError);
}

TEST_CASE("classification") {
  CHECK(classify(spo_basis(3), 3) == Classification::OrthoSymplectic);
  for (int N : {2, 3}) {
    const LieBasis b = generate_algebra(vertex_generators(case_model(1, N, 0.1), 0.7));
    CHECK(b.classification == Classification::InsideSpecialOrthogonal);
  }
  // For N = 1, so(2) coincides with spo_1, which takes precedence.
  CHECK(generate_algebra(vertex_generators(case_model(1, 1, 0.1), 0.7)).classification ==
        Classification::OrthoSymplectic);
  // Generic case-2 dimensions 2N^2 + N, checked against the brute-force closure.
  for (int N : {1, 2, 3}) {
    const auto gens = vertex_generators(case_model(2, N, 0.1), 1.0);
    const LieBasis b = generate_algebra(gens);
    CHECK(b.dim == 2 * N * N + N);
    CHECK(b.dim == oracle::brute_force_closure_dim(gens));
  }
}

TEST_CASE("disorder threshold") {
  const auto z = disorder_threshold(free_model(2, 0.1), 0.5);
  CHECK(z.lambda_max == 0.0);
  CHECK(z.lambda_min == 0.0);
  CHECK(std::isinf(z.ell_c));
  CHECK(z.lo == doctest::Approx(-5.0));
  CHECK(z.hi == doctest::Approx(5.0));
  CHECK_FALSE(z.empty);
  const auto r = disorder_threshold(no_vper(2, 1), 0.5);
  CHECK(r.lambda_max == doctest::Approx(1.0));
  CHECK(r.lambda_min == doctest::Approx(-1.0));
  CHECK(r.ell_c == doctest::Approx(0.5));
  for (double ell : {0.05, 0.2, 0.45, 0.55, 1.0, 3.0}) {
    ModelSpec s = no_vper(2, 1);
    s.ell = ell;
    CHECK(disorder_threshold(s, 0.5).empty == (ell > r.ell_c));
  }
  CHECK_THROWS_AS(disorder_threshold(free_model(1, 0.1), 0.0), DomainError);
}

TEST_CASE("critical energy scan") {
  std::vector<double> grid;
  for (int k = -20; k <= 20; ++k) grid.push_back(0.1 * k);
  const auto c2 = critical_energy_scan(no_vper(2, 1), grid, 1e-9, 4);
  CHECK(c2.generic_dim == 3);
  REQUIRE(c2.drops.size() == 1);
  CHECK(c2.drops[0].energy == doctest::Approx(0.0));
  CHECK(c2.drops[0].dim < 3);
  CHECK(c2.drops[0].lo <= 1e-6);
  CHECK(c2.drops[0].hi >= -1e-6);
  const auto c5 = critical_energy_scan(case_model(5, 2, 0.1), grid, 1e-9, 4);
  for (const auto& d : c5.drops) CHECK(d.energy == doctest::Approx(0.0));
  const auto c1 = critical_energy_scan(case_model(1, 2, 0.1), grid, 1e-9, 4);
  CHECK(c1.drops.empty());
  // Case 2 at E = 0 has a strictly smaller algebra than at E = 1.
  for (int N : {1, 2}) {
    const int d0 = generate_algebra(vertex_generators(case_model(2, N, 0.1), 0.0)).dim;
    const int d1 = generate_algebra(vertex_generators(case_model(2, N, 0.1), 1.0)).dim;
    CHECK(d0 < d1);
  }
  CHECK_THROWS_AS(critical_energy_scan(case_model(2, 9, 0.1), grid), DomainError);
}
