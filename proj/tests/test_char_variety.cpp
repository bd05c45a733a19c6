#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pvilab/char_variety.hpp"
#include "pvilab/errors.hpp"
#include "pvilab/rh_numeric.hpp"

using namespace pvilab;

TEST_CASE("Cayley-Hamilton identity for the characteristic coefficients") {
  std::srand(41);
  for (int n : {1, 2, 3, 4}) {
    const Eigen::MatrixXcd m = Eigen::MatrixXcd::Random(n, n);
    const auto c = characteristic_coefficients(m);
    REQUIRE(static_cast<int>(c.size()) == n);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 0; k < n; ++k) acc = acc * m;
    Eigen::MatrixXcd pw = Eigen::MatrixXcd::Identity(n, n);
    for (int k = 0; k < n; ++k) {
      acc += c[k] * pw;
      pw = pw * m;
    }
    CHECK(acc.norm() < 1e-12);
  }
  // 2x2 closed form: s^2 - tr s + det
  Eigen::MatrixXcd m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const auto c = characteristic_coefficients(m);
  CHECK(std::abs(c[0] - (-2.0)) < 1e-14);
  CHECK(std::abs(c[1] - (-5.0)) < 1e-14);
}

TEST_CASE("exponent table maps to the characteristic polynomials of the monodromy") {
  std::mt19937_64 rng(42);
  const auto e = testing::random_generic_exponents(rng);
  ExponentTable tab{2, -1, {}};
  for (int i = 0; i < 4; ++i) tab.lambda.push_back({e.lambda_plus(i), e.lambda_minus(i)});
  const AParam target = rh_exponents(tab);
  CHECK(target.constraint_residual() < 1e-12);

  const auto rep = monodromy(to_fuchsian_system(from_surface_point(testing::random_chart_point(rng), e)));
  SurfaceGroupRep sg{0, 4, 2, {}, {}, {}};
  for (int k = 0; k < 4; ++k) sg.gamma.push_back(rep.matrices[rep.order[k]]);
  const AParam got = char_map(sg);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 2; ++j) CHECK(std::abs(got.a[k][j] - target.a[rep.order[k]][j]) < 1e-8);
}

TEST_CASE("exponent tables off the constraint are rejected") {
  ExponentTable tab{2, 0, {{0.1, 0.2}, {0.3, 0.1}, {0.0, 0.0}, {0.0, 0.0}}};
  CHECK_THROWS_AS(rh_exponents(tab), DomainError);
  ExponentTable ragged{2, 0, {{0.1}}};
  CHECK_THROWS_AS(rh_exponents(ragged), DimensionError);
}

TEST_CASE("sampled representations hit the prescribed conjugacy data") {
  std::mt19937_64 rng(43);
  for (int n : {3, 4, 5}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      ExponentTable tab{2, 0, {}};
      std::uniform_real_distribution<double> u(0.05, 0.45);
      cplx total = 0.0;
      for (int i = 0; i < n; ++i) {
        const cplx a = u(rng), b = u(rng);
        tab.lambda.push_back({a, b});
        total += a + b;
      }
      tab.lambda.back()[1] -= total;
      const AParam target = rh_exponents(tab);
      const auto sg = random_rep_with_a(0, n, 2, target, seed);
      CHECK(sg.relation_residual() < 1e-9);
      const AParam got = char_map(sg);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(got.a[i][j] - target.a[i][j]) < 1e-9);
    }
  }
}

TEST_CASE("sampler determinism") {
  ExponentTable tab{2, 0, {{0.1, 0.2}, {0.15, 0.25}, {0.3, -1.0}}};
  const AParam target = rh_exponents(tab);
  const auto a = random_rep_with_a(0, 3, 2, target, 9), b = random_rep_with_a(0, 3, 2, target, 9);
  for (int i = 0; i < 3; ++i) CHECK(a.gamma[i] == b.gamma[i]);
}

TEST_CASE("relation violations are rejected by the character map") {
  SurfaceGroupRep sg{0, 2, 2, {}, {}, {}};
  sg.gamma = {Eigen::MatrixXcd::Identity(2, 2), 2.0 * Eigen::MatrixXcd::Identity(2, 2)};
  CHECK_THROWS_AS(char_map(sg), DomainError);
}
