#include "pvilab/parabolic_conn.hpp"

#include <cmath>
#include <sstream>

#include "pvilab/errors.hpp"

namespace pvilab {

namespace {

template <class S>
bool near_zero(const S& v, double tol) {
  return scalar_traits<S>::is_zero(v, tol);
}

template <class S>
double mag(const S& v) {
  return scalar_traits<S>::magnitude(v);
}

void check_index(int i) {
  if (i < 0 || i > 3) throw IndexError("pole index " + std::to_string(i) + " out of range 0..3");
}

template <class S>
Vec2<S> normalize_projective(const Vec2<S>& v, double tol) {
  if (!near_zero(v[1], tol)) return {v[0] / v[1], S(1)};
  if (!near_zero(v[0], tol)) return {S(1), S(0)};
  throw DomainError("projective pair [0:0]");
}

}  // namespace

// ---- ExponentData ----

template <class S>
BasicExponentData<S> BasicExponentData<S>::make(const std::array<S, 4>& t, const std::array<S, 4>& lambda) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (near_zero(S(t[i] - t[j]), 1e-14)) throw DomainError("singular points must be pairwise distinct");
  return BasicExponentData{t, lambda};
}

template <class S>
bool BasicExponentData<S>::coincident(int i, double tol) const {
  check_index(i);
  return near_zero(S(lambda_plus(i) - lambda_minus(i)), tol);
}

template <class S>
Poly<S> BasicExponentData<S>::pi() const {
  return product_of_roots<S>({t[0], t[1], t[2], t[3]});
}

template <class S>
S BasicExponentData<S>::pi_prime(int i) const {
  check_index(i);
  S p(1);
  for (int j = 0; j < 4; ++j)
    if (j != i) p *= t[i] - t[j];
  return p;
}

// ---- Weight ----

Weight Weight::make(const std::array<Rational, 8>& ap, int b1, int b2, Integer gamma) {
  for (int k = 0; k < 8; ++k) {
    if (ap[k] < 0 || ap[k] >= 1) throw DomainError("alpha' entries must lie in [0,1)");
    if (k > 0 && !(ap[k - 1] < ap[k])) throw DomainError("alpha' must be strictly increasing");
  }
  if (b1 <= 0 || b2 <= 0) throw DomainError("beta entries must be positive");
  if (gamma <= 0) throw DomainError("gamma must be positive");
  return Weight{ap, b1, b2, gamma};
}

Weight Weight::standard() {
  std::array<Rational, 8> ap;
  for (int k = 0; k < 8; ++k) ap[k] = Rational(k + 1, 100);
  return make(ap);
}

std::array<Rational, 8> Weight::alpha() const {
  std::array<Rational, 8> a;
  Rational f(beta1, beta1 + beta2);
  for (int k = 0; k < 8; ++k) a[k] = alpha_prime[k] * f;
  return a;
}

bool Weight::lemma_hypothesis() const {
  for (int i = 0; i < 4; ++i) {
    Rational own = alpha_prime[2 * i + 1] - alpha_prime[2 * i];
    Rational others = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) others += alpha_prime[2 * j + 1] - alpha_prime[2 * j];
    if (!(own < others)) return false;
  }
  return true;
}

// ---- PhiConnection ----

template <class S>
PolyMat2<S> BasicPhiConnection<S>::phi_matrix() const {
  PolyMat2<S> m;
  m(0, 0) = Poly<S>::constant(phi1);
  m(0, 1) = phi3;
  m(1, 0) = Poly<S>{};
  m(1, 1) = Poly<S>::constant(phi2);
  return m;
}

template <class S>
PolyMat2<S> BasicPhiConnection<S>::numerator() const {
  const Poly<S> pi = exponents.pi();
  S rem;
  const Poly<S> pi_over_t4 = pi.divide_linear(exponents.t[3], &rem);
  PolyMat2<S> n;
  n(0, 0) = omega1;
  n(0, 1) = omega2 + phi3.derivative() * pi;
  n(1, 0) = omega3;
  n(1, 1) = omega4 + pi_over_t4 * phi2;
  return n;
}

template <class S>
bool BasicPhiConnection<S>::phi_invertible(double tol) const {
  return !near_zero(S(phi1 * phi2), tol);
}

template <class S>
Mat2<S> residue(const BasicPhiConnection<S>& conn, int i) {
  check_index(i);
  const S ti = conn.exponents.t[i];
  Mat2<S> n = evaluate(conn.numerator(), ti);
  const S d = conn.exponents.pi_prime(i);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) n(a, b) /= d;
  return n;
}

template <class S>
Poly<S> determinant_identity_residual(const BasicPhiConnection<S>& c) {
  return c.omega1 * c.phi2 - c.omega3 * c.phi3 + c.omega4 * c.phi1;
}

template <class S>
double residue_condition_residual(const BasicPhiConnection<S>& conn) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    Mat2<S> r = residue(conn, i);
    Mat2<S> ph = evaluate(conn.phi_matrix(), conn.exponents.t[i]);
    const S lam = conn.exponents.lambda[i];
    const auto& l = conn.lines[i];
    double scale = 1.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) scale = std::max(scale, mag(r(a, b)) + mag(S(lam * ph(a, b))));
    double lnorm = std::max(mag(l[0]), mag(l[1]));
    if (lnorm == 0.0) return std::numeric_limits<double>::infinity();
    for (int a = 0; a < 2; ++a) {
      S v = (r(a, 0) - lam * ph(a, 0)) * l[0] + (r(a, 1) - lam * ph(a, 1)) * l[1];
      worst = std::max(worst, mag(v) / (scale * lnorm));
    }
  }
  return worst;
}

namespace {

template <class S>
void assign_lines(BasicPhiConnection<S>& c, double tol) {
  for (int i = 0; i < 4; ++i) {
    Mat2<S> r = residue(c, i);
    Mat2<S> ph = evaluate(c.phi_matrix(), c.exponents.t[i]);
    const S lam = c.exponents.lambda[i];
    Mat2<S> m;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a, b) = r(a, b) - lam * ph(a, b);
    double scale = 1.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) scale = std::max(scale, mag(r(a, b)));
    if (!near_zero(m.det(), tol * scale * scale))
      throw DegenerateResidueError("residue minus lambda*phi is invertible at pole " + std::to_string(i), i);
    c.lines[i] = kernel_vector(m, tol * scale);
  }
}

// phi = 0 member over a point of the negative section
template <class S>
BasicPhiConnection<S> section_member(const S& q, const BasicExponentData<S>& exp, double tol) {
  std::array<int, 4> order{};
  int k = 0;
  for (int j = 0; j < 4 && k < 2; ++j)
    if (!near_zero(S(q - exp.t[j]), tol)) order[k++] = j;
  int m = 2;
  for (int j = 0; j < 4; ++j)
    if (j != order[0] && j != order[1]) order[m++] = j;
  const S ta = exp.t[order[0]], tb = exp.t[order[1]], tc = exp.t[order[2]], td = exp.t[order[3]];
  BasicPhiConnection<S> c;
  c.exponents = exp;
  c.phi1 = S(0);
  c.phi2 = S(0);
  c.phi3 = Poly<S>{};
  c.omega1 = Poly<S>::linear_root(tc) * S(td - q);
  c.omega2 = product_of_roots<S>({ta, tb, tc});
  c.omega3 = Poly<S>::linear_root(q);
  c.omega4 = product_of_roots<S>({ta, tb});
  assign_lines(c, tol);
  return c;
}

// phi = diag(0, 1) member over a point of the fibre component D_i away from the special points
template <class S>
BasicPhiConnection<S> fiber_component_member(int i, const S& h1, const BasicExponentData<S>& exp, double tol) {
  BasicPhiConnection<S> c;
  c.exponents = exp;
  c.phi1 = S(0);
  c.phi2 = S(1);
  c.phi3 = Poly<S>{};
  c.omega1 = Poly<S>{};
  std::vector<S> others;
  for (int j = 0; j < 4; ++j)
    if (j != i) others.push_back(exp.t[j]);
  c.omega2 = product_of_roots<S>(others);
  c.omega3 = Poly<S>::linear_root(exp.t[i]);
  c.omega4 = Poly<S>::constant(h1);
  assign_lines(c, tol);
  return c;
}

}  // namespace

template <class S>
BasicSurfacePoint<S> special_point(const BasicExponentData<S>& exp, int i, int sign) {
  check_index(i);
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  return BasicSurfacePoint<S>{exp.t[i], {exp.lambda_signed(i, sign) * exp.pi_prime(i), S(1)}};
}

template <class S>
BasicPhiConnection<S> from_surface_point(const BasicSurfacePoint<S>& s, const BasicExponentData<S>& exp,
                                         double tol) {
  const Vec2<S> w = normalize_projective(s.iota, tol);
  int on_pole = -1;
  for (int i = 0; i < 4; ++i)
    if (near_zero(S(s.q - exp.t[i]), tol)) on_pole = i;

  if (near_zero(w[1], tol)) return section_member(s.q, exp, tol);

  const S h1 = -w[0];
  if (on_pole >= 0) {
    for (int sign : {1, -1}) {
      auto b = special_point(exp, on_pole, sign);
      if (near_zero(S(b.iota[0] - w[0]), tol * std::max(1.0, mag(w[0]))))
        throw ExceptionalPointError("surface point is the special point b_" + std::to_string(on_pole + 1) +
                                        (sign > 0 ? "+" : "-") + "; use exceptional_fiber_member",
                                    on_pole, sign);
    }
    return fiber_component_member(on_pole, h1, exp, tol);
  }

  BasicPhiConnection<S> c;
  c.exponents = exp;
  c.phi1 = S(1);
  c.phi2 = S(1);
  c.phi3 = Poly<S>{};
  c.omega4 = Poly<S>::constant(h1);
  c.omega1 = Poly<S>::constant(S(-h1));
  c.omega3 = Poly<S>::linear_root(s.q) * (S(1) / S(exp.t[3] - s.q));
  std::vector<S> xs, ys;
  for (int i = 0; i < 4; ++i) {
    const S pp = exp.pi_prime(i);
    const S r4 = h1 / pp;
    const S r3 = c.omega3(exp.t[i]) / pp;
    const S lam = exp.lambda[i];
    const S r2 = -((r4 + lam) * (r4 + exp.delta4(i) - lam)) / r3;
    xs.push_back(exp.t[i]);
    ys.push_back(r2 * pp);
  }
  c.omega2 = lagrange_interpolate(xs, ys);
  assign_lines(c, tol);
  return c;
}

template <class S>
BasicSurfacePoint<S> p_map(const BasicPhiConnection<S>& conn, double tol) {
  const Poly<S>& u = conn.omega3;
  double scale = std::max(1.0, u.max_abs());
  int deg = u.degree(tol * scale);
  if (deg < 0) throw InstabilityError("u vanishes identically: the object is unstable");
  if (deg == 0) throw DomainError("zero of u lies at infinity; the chart at infinity is not modelled");
  const S q = -u.coeff(0) / u.coeff(1);
  const S h1 = conn.omega4(q);
  const S h2 = conn.phi2;
  double hs = std::max({1.0, conn.omega4.max_abs(), mag(h2)});
  if (near_zero(h1, tol * hs) && near_zero(h2, tol * hs))
    throw InstabilityError("iota vanishes: the weight hypothesis is violated");
  BasicSurfacePoint<S> s;
  s.q = q;
  s.iota = normalize_projective(Vec2<S>{S(-h1), h2}, tol * hs);
  return s;
}

template <class S>
BasicPhiConnection<S> exceptional_fiber_member(const BasicExponentData<S>& exp, int i, int sign,
                                               const Vec2<S>& param, FiberComponent component, double tol) {
  check_index(i);
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  if (near_zero(param[0], tol) && near_zero(param[1], tol)) throw DomainError("parameter [0:0] is not a point");
  const bool coinc = exp.coincident(i, tol);
  if (coinc) sign = 1;
  const S kappa = exp.lambda_signed(i, sign) * exp.pi_prime(i);

  BasicPhiConnection<S> c;
  c.exponents = exp;
  S phi1 = param[0], res_i = param[1];
  if (coinc && component == FiberComponent::C2) {
    phi1 = S(1);
    res_i = S(0);
  }
  c.phi1 = phi1;
  c.phi2 = S(1);
  c.phi3 = Poly<S>{};
  c.omega1 = Poly<S>::constant(S(phi1 * kappa));
  c.omega4 = Poly<S>::constant(S(-kappa));
  c.omega3 = Poly<S>::linear_root(exp.t[i]);
  std::vector<S> xs, ys;
  for (int k = 0; k < 4; ++k) {
    const S pp = exp.pi_prime(k);
    S r2;
    if (k == i) {
      r2 = res_i;
    } else {
      const S rho = kappa / pp;
      const S r3 = c.omega3(exp.t[k]) / pp;
      const S lam = exp.lambda[k];
      r2 = phi1 * (rho - lam) * (exp.delta4(k) - rho - lam) / r3;
    }
    xs.push_back(exp.t[k]);
    ys.push_back(r2 * pp);
  }
  c.omega2 = lagrange_interpolate(xs, ys);
  assign_lines(c, tol);
  if (coinc && component == FiberComponent::C2) {
    if (near_zero(param[0], tol) && near_zero(param[1], tol)) throw DomainError("line [0:0]");
    c.lines[i] = param;
  }
  return c;
}

template <class S>
BasicPhiConnection<S> apply_gauge(const BasicPhiConnection<S>& conn, const Gauge<S>& g) {
  if (near_zero(S(g.c1 * g.c2), 0.0) || near_zero(S(g.d1 * g.d2), 0.0)) throw DomainError("gauge must be invertible");
  if (g.c3.degree() > 1 || g.d3.degree() > 1) throw DomainError("off-diagonal gauge entries must have degree <= 1");
  PolyMat2<S> s1inv, s2;
  s1inv(0, 0) = Poly<S>::constant(S(S(1) / g.c1));
  s1inv(0, 1) = g.c3 * (S(-1) / S(g.c1 * g.c2));
  s1inv(1, 0) = Poly<S>{};
  s1inv(1, 1) = Poly<S>::constant(S(S(1) / g.c2));
  s2(0, 0) = Poly<S>::constant(g.d1);
  s2(0, 1) = g.d3;
  s2(1, 0) = Poly<S>{};
  s2(1, 1) = Poly<S>::constant(g.d2);

  const PolyMat2<S> phi = conn.phi_matrix();
  const PolyMat2<S> n = conn.numerator();
  const Poly<S> pi = conn.exponents.pi();
  const PolyMat2<S> phi_new = s2 * phi * s1inv;
  PolyMat2<S> n_new = s2 * n * s1inv;
  PolyMat2<S> extra = s2 * phi * derivative(s1inv);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) n_new(a, b) += extra(a, b) * pi;

  BasicPhiConnection<S> c;
  c.exponents = conn.exponents;
  c.phi1 = phi_new(0, 0).coeff(0);
  c.phi2 = phi_new(1, 1).coeff(0);
  c.phi3 = phi_new(0, 1).trimmed();
  S rem;
  const Poly<S> pi_over_t4 = pi.divide_linear(conn.exponents.t[3], &rem);
  c.omega1 = n_new(0, 0);
  c.omega2 = n_new(0, 1) - c.phi3.derivative() * pi;
  c.omega3 = n_new(1, 0);
  c.omega4 = n_new(1, 1) - pi_over_t4 * c.phi2;
  for (int i = 0; i < 4; ++i) {
    const S ti = conn.exponents.t[i];
    const auto& l = conn.lines[i];
    // S1 applied to the line
    c.lines[i] = {g.c1 * l[0] + g.c3(ti) * l[1], g.c2 * l[1]};
  }
  return c;
}

template <class S>
BasicPhiConnection<S> normal_form(const BasicPhiConnection<S>& conn, double tol) {
  if (near_zero(conn.phi2, tol)) throw DomainError("normal form requires phi2 != 0");
  Gauge<S> g1;
  g1.d2 = S(1) / conn.phi2;
  g1.d3 = conn.phi3 * (S(-1) / conn.phi2);
  BasicPhiConnection<S> c = apply_gauge(conn, g1);
  if (!near_zero(c.phi1, tol)) {
    Gauge<S> g0;
    g0.d1 = S(1) / c.phi1;
    c = apply_gauge(c, g0);
  }

  double scale = std::max(1.0, c.omega3.max_abs());
  int deg = c.omega3.degree(tol * scale);
  if (deg < 0) throw InstabilityError("omega3 vanishes identically");
  S k = c.omega3(c.exponents.t[3]);
  if (near_zero(k, tol * scale)) k = c.omega3.coeff(static_cast<std::size_t>(deg));
  Gauge<S> g2;
  g2.c1 = k;
  g2.d1 = k;
  c = apply_gauge(c, g2);

  auto [quot, remainder] = c.omega4.divmod(c.omega3.trimmed(tol * scale), tol * scale);
  (void)remainder;
  Gauge<S> g3;
  g3.c3 = quot;
  g3.d3 = quot * c.phi1;
  c = apply_gauge(c, g3);
  c.phi3 = Poly<S>{};
  return c;
}

template <class S>
Vec2<S> fiber_invariant(const BasicPhiConnection<S>& conn, int i, double tol) {
  check_index(i);
  BasicPhiConnection<S> c = normal_form(conn, tol);
  const S res2 = c.omega2(c.exponents.t[i]) / c.exponents.pi_prime(i);
  return {c.phi1, res2};
}

PhiConnection to_complex(const ExactPhiConnection& e) {
  PhiConnection c;
  c.exponents = to_complex(e.exponents);
  c.phi1 = to_cplx(e.phi1);
  c.phi2 = to_cplx(e.phi2);
  c.phi3 = to_cplx_poly(e.phi3);
  c.omega1 = to_cplx_poly(e.omega1);
  c.omega2 = to_cplx_poly(e.omega2);
  c.omega3 = to_cplx_poly(e.omega3);
  c.omega4 = to_cplx_poly(e.omega4);
  for (int i = 0; i < 4; ++i) c.lines[i] = {to_cplx(e.lines[i][0]), to_cplx(e.lines[i][1])};
  return c;
}

ExponentData to_complex(const ExactExponentData& e) {
  ExponentData c;
  for (int i = 0; i < 4; ++i) {
    c.t[i] = to_cplx(e.t[i]);
    c.lambda[i] = to_cplx(e.lambda[i]);
  }
  return c;
}

long long moduli_dimension(long long r, long long n, long long g) {
  if (r < 1 || n < 1 || g < 0) throw DomainError("moduli_dimension needs r, n >= 1 and g >= 0");
  return 2 * r * r * (g - 1) + n * r * (r - 1) + 2;
}

std::string to_string(SpecialKind k) {
  switch (k) {
    case SpecialKind::generic: return "generic";
    case SpecialKind::resonant: return "resonant";
    case SpecialKind::reducible: return "reducible";
  }
  return "unknown";
}

namespace {
bool near_integer(const cplx& v, double tol) {
  return std::abs(v.imag()) <= tol && std::abs(v.real() - std::round(v.real())) <= tol;
}
bool is_integer(const Rational& v) { return boost::multiprecision::denominator(v) == 1; }
}  // namespace

SpecialKind is_special(const ExponentData& exp, double tol) {
  for (int i = 0; i < 4; ++i)
    if (near_integer(2.0 * exp.lambda[i], tol)) return SpecialKind::resonant;
  for (int mask = 0; mask < 16; ++mask) {
    cplx s = 0;
    for (int i = 0; i < 4; ++i) s += (mask & (1 << i)) ? -exp.lambda[i] : exp.lambda[i];
    if (near_integer(s, tol)) return SpecialKind::reducible;
  }
  return SpecialKind::generic;
}

SpecialKind is_special(const ExactExponentData& exp) {
  for (int i = 0; i < 4; ++i)
    if (is_integer(Rational(2 * exp.lambda[i]))) return SpecialKind::resonant;
  for (int mask = 0; mask < 16; ++mask) {
    Rational s = 0;
    for (int i = 0; i < 4; ++i) s += (mask & (1 << i)) ? Rational(-exp.lambda[i]) : exp.lambda[i];
    if (is_integer(s)) return SpecialKind::reducible;
  }
  return SpecialKind::generic;
}

#define PVILAB_INSTANTIATE(S)                                                                                  \
  template struct BasicExponentData<S>;                                                                        \
  template struct BasicPhiConnection<S>;                                                                       \
  template Mat2<S> residue(const BasicPhiConnection<S>&, int);                                                 \
  template Poly<S> determinant_identity_residual(const BasicPhiConnection<S>&);                                \
  template double residue_condition_residual(const BasicPhiConnection<S>&);                                    \
  template BasicPhiConnection<S> from_surface_point(const BasicSurfacePoint<S>&, const BasicExponentData<S>&,  \
                                                    double);                                                   \
  template BasicSurfacePoint<S> p_map(const BasicPhiConnection<S>&, double);                                   \
  template BasicPhiConnection<S> exceptional_fiber_member(const BasicExponentData<S>&, int, int, const Vec2<S>&, \
                                                          FiberComponent, double);                             \
  template BasicPhiConnection<S> apply_gauge(const BasicPhiConnection<S>&, const Gauge<S>&);                   \
  template BasicPhiConnection<S> normal_form(const BasicPhiConnection<S>&, double);                            \
  template Vec2<S> fiber_invariant(const BasicPhiConnection<S>&, int, double);                                 \
  template BasicSurfacePoint<S> special_point(const BasicExponentData<S>&, int, int);

PVILAB_INSTANTIATE(cplx)
PVILAB_INSTANTIATE(Rational)

}  // namespace pvilab
