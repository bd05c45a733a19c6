#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "pvilab/errors.hpp"
#include "pvilab/parabolic_conn.hpp"

using namespace pvilab;

namespace {

double proj_dist(const Vec2<cplx>& a, const Vec2<cplx>& b) {
  return std::abs(a[0] * b[1] - a[1] * b[0]) / (std::hypot(std::abs(a[0]), std::abs(a[1])) * std::hypot(std::abs(b[0]), std::abs(b[1])));
}

}  // namespace

TEST_CASE("exact rational connection satisfies the identities with zero residual") {
  const ExactExponentData e = ExactExponentData::make({Rational(0), Rational(1), Rational(2), Rational(3)},
                                                      {Rational(1, 7), Rational(2, 9), Rational(3, 11), Rational(1, 5)});
  const ExactSurfacePoint s{Rational(1, 3), {Rational(5, 4), Rational(1)}};
  const auto c = from_surface_point(s, e);
  CHECK(determinant_identity_residual(c).is_zero());
  CHECK(residue_condition_residual(c) == 0.0);
  const auto back = p_map(c);
  CHECK(back.q == s.q);
  CHECK(back.iota[0] * s.iota[1] == back.iota[1] * s.iota[0]);
  for (int i = 0; i < 4; ++i) {
    const auto r = residue(c, i);
    CHECK(r.trace() == e.lambda_plus(i) + e.lambda_minus(i));
    CHECK(r.det() == e.lambda_plus(i) * e.lambda_minus(i));
    // the line is the lambda^+ eigenline
    const Vec2<Rational> l = c.lines[i];
    const Rational a = r(0, 0) * l[0] + r(0, 1) * l[1], b = r(1, 0) * l[0] + r(1, 1) * l[1];
    CHECK(a == e.lambda_plus(i) * l[0]);
    CHECK(b == e.lambda_plus(i) * l[1]);
  }
}

TEST_CASE("complex chart points round-trip through p") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 50; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    const auto s = testing::random_chart_point(rng);
    const auto c = from_surface_point(s, e);
    CHECK(residue_condition_residual(c) < 1e-10);
    CHECK(determinant_identity_residual(c).max_abs() < 1e-10);
    const auto b = p_map(c);
    CHECK(std::abs(b.q - s.q) < 1e-12);
    CHECK(proj_dist(b.iota, s.iota) < 1e-12);
  }
}

TEST_CASE("boundary members: phi = 0 over D0 and rank-one phi over the fibre components") {
  std::mt19937_64 rng(5);
  const auto e = testing::random_generic_exponents(rng);
  const SurfacePoint on_d0{cplx(0.7, 0.4), {1.0, 0.0}};
  const auto c0 = from_surface_point(on_d0, e);
  CHECK(std::abs(c0.phi1) < 1e-14);
  CHECK(std::abs(c0.phi2) < 1e-14);
  CHECK_FALSE(c0.phi_invertible());
  CHECK(residue_condition_residual(c0) < 1e-10);
  const auto b0 = p_map(c0);
  CHECK(std::abs(b0.q - on_d0.q) < 1e-12);
  CHECK(proj_dist(b0.iota, on_d0.iota) < 1e-12);

  for (int i = 0; i < 4; ++i) {
    const SurfacePoint on_di{e.t[i], {cplx(0.3, -0.2), 1.0}};
    const auto ci = from_surface_point(on_di, e);
    CHECK_FALSE(ci.phi_invertible());
    CHECK(residue_condition_residual(ci) < 1e-10);
    const auto bi = p_map(ci);
    CHECK(std::abs(bi.q - e.t[i]) < 1e-12);
    CHECK(proj_dist(bi.iota, on_di.iota) < 1e-12);
  }
}

TEST_CASE("special points are redirected to the exceptional family") {
  std::mt19937_64 rng(6);
  const auto e = testing::random_generic_exponents(rng);
  for (int i = 0; i < 4; ++i)
    for (int sign : {1, -1}) {
      const auto b = special_point(e, i, sign);
      bool thrown = false;
      try {
        from_surface_point(b, e);
      } catch (const ExceptionalPointError& err) {
        thrown = true;
        CHECK(err.index == i);
        CHECK(err.sign == sign);
      }
      CHECK(thrown);
    }
}

TEST_CASE("gauge transformations preserve p and the fibre invariant") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  auto rc = [&] { return cplx(nd(rng), nd(rng)); };
  for (int k = 0; k < 10; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    const auto c = from_surface_point(testing::random_chart_point(rng), e);
    Gauge<cplx> g;
    g.c1 = rc();
    g.c2 = rc();
    g.c3 = Poly<cplx>{rc(), rc()};
    g.d1 = rc();
    g.d2 = rc();
    g.d3 = Poly<cplx>{rc(), rc()};
    const auto c2 = apply_gauge(c, g);
    CHECK(residue_condition_residual(c2) < 1e-9);
    const auto p1 = p_map(c), p2 = p_map(c2);
    CHECK(std::abs(p1.q - p2.q) < 1e-10);
    CHECK(proj_dist(p1.iota, p2.iota) < 1e-10);
    const auto n1 = normal_form(c), n2 = normal_form(c2);
    CHECK((n1.omega2 - n2.omega2).max_abs() < 1e-9);
    CHECK((n1.omega4 - n2.omega4).max_abs() < 1e-9);
  }
}

TEST_CASE("two members over a special point collide under p but not under the fibre invariant") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 8; ++k) {
    const auto e = testing::random_generic_exponents(rng);
    const int i = k % 4;
    const int sign = k < 4 ? 1 : -1;
    const Vec2<cplx> pa{1.0, cplx(nd(rng), nd(rng))}, pb{1.0, cplx(nd(rng), nd(rng))};
    const auto ca = exceptional_fiber_member(e, i, sign, pa), cb = exceptional_fiber_member(e, i, sign, pb);
    for (const auto* c : {&ca, &cb}) {
      CHECK(residue_condition_residual(*c) < 1e-9);
      CHECK(determinant_identity_residual(*c).max_abs() < 1e-9);
    }
    const auto b = special_point(e, i, sign);
    const auto qa = p_map(ca), qb = p_map(cb);
    CHECK(std::abs(qa.q - b.q) < 1e-12);
    CHECK(std::abs(qb.q - b.q) < 1e-12);
    CHECK(proj_dist(qa.iota, b.iota) < 1e-12);
    CHECK(proj_dist(qb.iota, b.iota) < 1e-12);
    const auto fa = fiber_invariant(ca, i), fb = fiber_invariant(cb, i);
    CHECK(proj_dist(fa, fb) > 1e-6);
    // the invariant is the parameter up to a factor fixed by the normalization
    const cplx ra = (fa[1] / fa[0]) / (pa[1] / pa[0]), rb = (fb[1] / fb[0]) / (pb[1] / pb[0]);
    CHECK(std::abs(ra - rb) < 1e-9 * std::abs(ra));
    // and it survives a gauge transformation
    Gauge<cplx> g;
    g.c1 = cplx(0.7, 0.2);
    g.c2 = cplx(-1.1, 0.4);
    g.c3 = Poly<cplx>{cplx(0.3, -0.2), cplx(0.5, 0.1)};
    g.d1 = cplx(1.3, -0.5);
    g.d2 = cplx(0.2, 0.9);
    const auto fg = fiber_invariant(apply_gauge(ca, g), i);
    CHECK(proj_dist(fg, fa) < 1e-9);
  }
}

TEST_CASE("coincident exponents: the C2 component") {
  const auto e = ExponentData::make({0.0, 1.0, 2.0, 3.0}, {0.0, 0.17, 0.21, 0.33});
  CHECK(e.coincident(0));
  const auto c = exceptional_fiber_member(e, 0, 1, Vec2<cplx>{1.0, cplx(0.4, 0.1)}, FiberComponent::C2);
  CHECK(residue_condition_residual(c) < 1e-9);
  CHECK(std::abs(p_map(c).q - e.t[0]) < 1e-12);
}

TEST_CASE("dimension formula") {
  CHECK(moduli_dimension(2, 4, 0) == 2);
  CHECK(moduli_dimension(2, 5, 0) == 4);
  for (long long n = 3; n < 10; ++n) CHECK(moduli_dimension(2, n, 0) == 2 * n - 6);
}

TEST_CASE("special exponents") {
  auto gen = ExponentData::make({0.0, 1.0, 2.0, 3.0}, {0.11, 0.12, 0.13, 0.15});
  CHECK(is_special(gen) == SpecialKind::generic);
  auto res = ExponentData::make({0.0, 1.0, 2.0, 3.0}, {0.5, 0.12, 0.13, 0.15});
  CHECK(is_special(res) == SpecialKind::resonant);
  auto red = ExponentData::make({0.0, 1.0, 2.0, 3.0}, {0.2, 0.3, 0.4, 0.1});
  CHECK(is_special(red) == SpecialKind::reducible);
  CHECK_THROWS_AS(ExponentData::make({0.0, 1.0, 1.0, 3.0}, {0.1, 0.1, 0.1, 0.1}), DomainError);
}

TEST_CASE("weights") {
  const Weight w = Weight::standard();
  CHECK(w.alpha_prime[0] == Rational(1, 100));
  CHECK(w.lemma_hypothesis());
  std::array<Rational, 8> bad = w.alpha_prime;
  std::swap(bad[0], bad[1]);
  CHECK_THROWS_AS(Weight::make(bad), DomainError);
}
