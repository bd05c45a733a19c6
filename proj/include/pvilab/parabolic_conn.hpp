#pragma once

#include <array>
#include <optional>
#include <string>

#include "pvilab/mat2.hpp"
#include "pvilab/poly.hpp"
#include "pvilab/types.hpp"

namespace pvilab {

// indices are 0-based throughout: pole i corresponds to t[i]
template <class S>
struct BasicExponentData {
  std::array<S, 4> t{};
  std::array<S, 4> lambda{};

  static BasicExponentData make(const std::array<S, 4>& t, const std::array<S, 4>& lambda);

  S lambda_plus(int i) const { return lambda.at(i); }
  S lambda_minus(int i) const { return i == 3 ? S(1) - lambda[3] : -lambda.at(i); }
  S lambda_signed(int i, int sign) const { return sign > 0 ? lambda_plus(i) : lambda_minus(i); }
  bool coincident(int i, double tol = 1e-12) const;
  // prod_j (z - t_j)
  Poly<S> pi() const;
  // prod_{j != i} (t_i - t_j)
  S pi_prime(int i) const;
  S delta4(int i) const { return i == 3 ? S(1) : S(0); }
};

using ExponentData = BasicExponentData<cplx>;
using ExactExponentData = BasicExponentData<Rational>;

struct Weight {
  std::array<Rational, 8> alpha_prime{};
  int beta1 = 1;
  int beta2 = 1;
  Integer gamma = 1000;

  static Weight make(const std::array<Rational, 8>& alpha_prime, int beta1 = 1, int beta2 = 1,
                     Integer gamma = 1000);
  // alpha' = (1/100, ..., 8/100)
  static Weight standard();
  std::array<Rational, 8> alpha() const;
  bool lemma_hypothesis() const;
};

// phi = [[phi1, phi3(z)], [0, phi2]] on O + O(-1); the second frame vector is (z - t4).
// omega_k are numerators over prod_j (z - t_j) dz.
template <class S>
struct BasicPhiConnection {
  BasicExponentData<S> exponents;
  S phi1{1};
  S phi2{1};
  Poly<S> phi3;
  Poly<S> omega1, omega2, omega3, omega4;
  std::array<Vec2<S>, 4> lines{};

  PolyMat2<S> phi_matrix() const;
  // full connection numerator N: nabla f = Phi df + N f dz / prod(z - t_j)
  PolyMat2<S> numerator() const;
  bool phi_invertible(double tol = 1e-12) const;
};

using PhiConnection = BasicPhiConnection<cplx>;
using ExactPhiConnection = BasicPhiConnection<Rational>;

// (q, [w1 : w2]) with [w1 : w2] = [-h1 : h2]; h1 is the numerator value of the fiber element in the frame dz/prod(z - t_j)
template <class S>
struct BasicSurfacePoint {
  S q{};
  Vec2<S> iota{S(0), S(1)};
};

using SurfacePoint = BasicSurfacePoint<cplx>;
using ExactSurfacePoint = BasicSurfacePoint<Rational>;

// triangular automorphisms S1 of E1 and S2 of E2
template <class S>
struct Gauge {
  S c1{1}, c2{1};
  Poly<S> c3;
  S d1{1}, d2{1};
  Poly<S> d3;
};

template <class S>
Mat2<S> residue(const BasicPhiConnection<S>& conn, int i);

// w1 phi2 - w3 phi3 + w4 phi1
template <class S>
Poly<S> determinant_identity_residual(const BasicPhiConnection<S>& conn);

// max over i of |(res_i - lambda_i phi(t_i)) l_i|, relative to the residue scale
template <class S>
double residue_condition_residual(const BasicPhiConnection<S>& conn);

template <class S>
BasicPhiConnection<S> from_surface_point(const BasicSurfacePoint<S>& s, const BasicExponentData<S>& exp,
                                         double tol = 1e-12);

template <class S>
BasicSurfacePoint<S> p_map(const BasicPhiConnection<S>& conn, double tol = 1e-12);

enum class FiberComponent { C1, C2 };

// member of the fibre of p over the special point with index i and sign +1/-1, parameter [phi1 : res_i omega2];
// when lambda_i^+ = lambda_i^- the component selects C1 (same parameter) or C2 (param is the line l_i)
template <class S>
BasicPhiConnection<S> exceptional_fiber_member(const BasicExponentData<S>& exp, int i, int sign,
                                               const Vec2<S>& param,
                                               FiberComponent component = FiberComponent::C1,
                                               double tol = 1e-12);

template <class S>
BasicPhiConnection<S> apply_gauge(const BasicPhiConnection<S>& conn, const Gauge<S>& g);

// gauge to phi2 = 1, phi3 = 0, omega3 normalised, omega4 constant; requires phi2 != 0 and omega3 != 0
template <class S>
BasicPhiConnection<S> normal_form(const BasicPhiConnection<S>& conn, double tol = 1e-12);

// [phi1 : res_{t_i} omega2] in normal form
template <class S>
Vec2<S> fiber_invariant(const BasicPhiConnection<S>& conn, int i, double tol = 1e-12);

// special point b_i^sign as a surface point
template <class S>
BasicSurfacePoint<S> special_point(const BasicExponentData<S>& exp, int i, int sign);

PhiConnection to_complex(const ExactPhiConnection& c);
ExponentData to_complex(const ExactExponentData& e);

long long moduli_dimension(long long r, long long n, long long g);

enum class SpecialKind { generic, resonant, reducible };
std::string to_string(SpecialKind k);
SpecialKind is_special(const ExponentData& exp, double tol = 1e-12);
SpecialKind is_special(const ExactExponentData& exp);

}  // namespace pvilab
