#include "pvilab/stability.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "pvilab/errors.hpp"

namespace pvilab {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::stable: return "stable";
    case Verdict::unstable: return "unstable";
    case Verdict::strictly_semistable: return "strictly-semistable";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "unknown";
}

Rational parabolic_degree(const std::array<int, 4>& inc, const Weight& w, const Integer& deg_f, int rank) {
  if (rank < 1 || rank > 2) throw DomainError("parabolic degree needs rank 1 or 2");
  const auto a = w.alpha();
  Rational p(deg_f);
  for (int i = 0; i < 4; ++i) {
    if (inc[i] < 0 || inc[i] > std::min(rank, 1)) throw DomainError("incidence dimension out of range");
    p += a[2 * i] * (rank - inc[i]) + a[2 * i + 1] * inc[i];
  }
  return p;
}

Rational parabolic_degree_full(const Weight& w, const Integer& deg_e) {
  return parabolic_degree({1, 1, 1, 1}, w, deg_e, 2);
}

namespace {

using PM = PolyMat2<cplx>;
using P = Poly<cplx>;

std::vector<cplx> roots(const P& p, double tol) {
  const int d = p.degree(tol * std::max(1.0, p.max_abs()));
  if (d <= 0) return {};
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  const cplx lead = p.coeff(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) comp(0, k) = -p.coeff(static_cast<std::size_t>(d - 1 - k)) / lead;
  for (int k = 1; k < d; ++k) comp(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + d);
  return r;
}

PolyVec mat_apply(const PM& m, const PolyVec& v) { return {m(0, 0) * v[0] + m(0, 1) * v[1], m(1, 0) * v[0] + m(1, 1) * v[1]}; }
P wedge(const PolyVec& a, const PolyVec& b) { return a[0] * b[1] - a[1] * b[0]; }
double vmax(const PolyVec& v) { return std::max(v[0].max_abs(), v[1].max_abs()); }
bool vzero(const PolyVec& v, double scale, double tol) { return vmax(v) <= tol * std::max(1.0, scale); }

double conn_scale(const PhiConnection& c) {
  double s = 1.0;
  const PM n = c.numerator();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s = std::max(s, n(a, b).max_abs());
  s = std::max({s, std::abs(c.phi1), std::abs(c.phi2), c.phi3.max_abs()});
  return s;
}

// prod(z - t) * nabla v
PolyVec nabla_num(const PhiConnection& c, const PolyVec& v) {
  const P pi = c.exponents.pi();
  PolyVec dv{v[0].derivative(), v[1].derivative()};
  PolyVec a = mat_apply(c.phi_matrix(), dv);
  PolyVec b = mat_apply(c.numerator(), v);
  return {a[0] * pi + b[0], a[1] * pi + b[1]};
}

int deg_or_neg(const P& p, double tol) { return p.degree(tol); }

}  // namespace

LineSubbundle saturate(const PolyVec& v, double tol) {
  const double scale = std::max(vmax(v), 1e-300);
  PolyVec w{v[0].trimmed(tol * scale), v[1].trimmed(tol * scale)};
  if (w[0].is_zero() && w[1].is_zero()) throw DomainError("cannot saturate the zero vector");
  if (w[1].is_zero()) return {{P::constant(1.0), P{}}, 0, {}};
  if (w[0].is_zero()) return {{P{}, P::constant(1.0)}, -1, {}};
  bool changed = true;
  while (changed) {
    changed = false;
    const int d0 = w[0].degree(), d1 = w[1].degree();
    const P& low = d0 <= d1 ? w[0] : w[1];
    const P& other = d0 <= d1 ? w[1] : w[0];
    const double s = std::max(w[0].max_abs(), w[1].max_abs());
    for (const cplx& r : roots(low, tol)) {
      // relative test of a common zero
      double mag_other = 0.0, rpow = 1.0;
      for (std::size_t k = 0; k < other.size(); ++k, rpow *= std::max(1.0, std::abs(r)))
        mag_other += std::abs(other.coeff(k)) * rpow;
      if (std::abs(other(r)) <= std::sqrt(tol) * std::max(mag_other, s * 1e-300)) {
        cplx rem;
        w[0] = w[0].divide_linear(r, &rem);
        w[1] = w[1].divide_linear(r, &rem);
        changed = true;
        break;
      }
    }
  }
  double s = std::max(w[0].max_abs(), w[1].max_abs());
  w[0] = (w[0] * cplx(1.0 / s)).trimmed(tol);
  w[1] = (w[1] * cplx(1.0 / s)).trimmed(tol);
  const int da = deg_or_neg(w[0], 0.0);
  const int db = deg_or_neg(w[1], 0.0);
  int m = std::max(da < 0 ? -1000 : da, db < 0 ? -1000 : db + 1);
  return {w, Integer(-m), {}};
}

std::array<int, 4> incidences(const PhiConnection& conn, const PolyVec& v, double tol) {
  std::array<int, 4> inc{};
  for (int i = 0; i < 4; ++i) {
    const cplx ti = conn.exponents.t[i];
    const cplx a = v[0](ti), b = v[1](ti);
    const auto& l = conn.lines[i];
    const double nv = std::hypot(std::abs(a), std::abs(b));
    const double nl = std::hypot(std::abs(l[0]), std::abs(l[1]));
    if (nv == 0.0) throw DomainError("line generator vanishes at a pole; saturate first");
    inc[i] = std::abs(a * l[1] - b * l[0]) <= tol * nv * nl ? 1 : 0;
  }
  return inc;
}

int destabilizer_degree_bound(const Weight& w) {
  const auto a = w.alpha();
  Rational top = 0;
  for (int i = 0; i < 4; ++i) top += a[2 * i + 1];
  Rational need = parabolic_degree_full(w) / 2 - top;
  // smallest integer d with d >= need
  Integer num = boost::multiprecision::numerator(need), den = boost::multiprecision::denominator(need);
  Integer q = num / den;
  if (q * den < num) q += 1;
  return static_cast<int>(q);
}

namespace {

struct EigenSlopes {
  bool scalar = false;
  std::vector<cplx> slopes;  // v0/v1 of eigenvectors with v1 != 0
};

EigenSlopes pencil_slopes(const PhiConnection& c, int j, double tol) {
  const cplx tj = c.exponents.t[j];
  Mat2<cplx> ph = evaluate(c.phi_matrix(), tj);
  Mat2<cplx> n = evaluate(c.numerator(), tj);
  Mat2<cplx> adj = ph.adjugate();
  const cplx det = ph.det();
  Mat2<cplx> m = adj * n;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) m(a, b) /= det;
  double scale = 1.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) scale = std::max(scale, std::abs(m(a, b)));
  const cplx tr = m.trace();
  const cplx disc = std::sqrt(tr * tr / 4.0 - m.det());
  std::vector<cplx> mus{tr / 2.0 + disc, tr / 2.0 - disc};
  if (std::abs(mus[0] - mus[1]) <= 1e-7 * scale) mus.pop_back();
  EigenSlopes out;
  for (const cplx& mu : mus) {
    Mat2<cplx> s = m;
    s(0, 0) -= mu;
    s(1, 1) -= mu;
    double sn = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) sn = std::max(sn, std::abs(s(a, b)));
    if (sn <= 1e-7 * scale) {
      out.scalar = true;
      return out;
    }
    Vec2<cplx> v = kernel_vector(s, tol * scale);
    if (std::abs(v[1]) > 1e-12 * std::abs(v[0])) out.slopes.push_back(v[0] / v[1]);
  }
  return out;
}

// invariant lines of degree -1 for invertible phi
std::vector<PolyVec> invariant_minus_one_lines(const PhiConnection& c, double tol) {
  const double scale = conn_scale(c);
  std::vector<int> poles;
  std::vector<EigenSlopes> data;
  for (int j = 0; j < 4; ++j) {
    EigenSlopes e = pencil_slopes(c, j, tol);
    if (!e.scalar) {
      poles.push_back(j);
      data.push_back(e);
    }
  }
  if (poles.size() < 2) throw UnsupportedWeightError("invariant-line search needs two non-scalar residues");
  std::vector<PolyVec> out;
  const cplx tj = c.exponents.t[poles[0]], tk = c.exponents.t[poles[1]];
  for (const cplx& sj : data[0].slopes)
    for (const cplx& sk : data[1].slopes) {
      P a = lagrange_interpolate<cplx>({tj, tk}, {sj, sk});
      PolyVec v{a, P::constant(1.0)};
      PolyVec phv = mat_apply(c.phi_matrix(), v);
      PolyVec nv = nabla_num(c, v);
      double s = scale * std::max(1.0, vmax(v));
      if (wedge(phv, nv).max_abs() <= tol * s * s) out.push_back(v);
    }
  return out;
}

}  // namespace

AlphaStabilityResult is_alpha_stable(const PhiConnection& conn, const Weight& w, double tol) {
  if (!conn.phi_invertible(1e-12)) throw PreconditionError("alpha-stability needs invertible phi");
  AlphaStabilityResult res;
  res.pardeg_e = parabolic_degree_full(w);
  res.d_min = destabilizer_degree_bound(w);
  if (res.d_min < -1) throw UnsupportedWeightError("weight allows destabilizers of degree below -1");
  const Rational half = res.pardeg_e / 2;

  std::vector<std::pair<PolyVec, std::string>> cands;
  const double scale = conn_scale(conn);
  if (conn.omega3.max_abs() <= tol * scale) cands.push_back({{P::constant(1.0), P{}}, "O+0"});
  for (const auto& v : invariant_minus_one_lines(conn, tol)) cands.push_back({v, "degree -1 invariant line"});

  bool semistable_eq = false;
  for (const auto& [v, name] : cands) {
    LineSubbundle sub = saturate(v, tol);
    if (sub.degree < res.d_min) continue;
    sub.incidence = incidences(conn, sub.generator, 1e-7);
    Rational pd = parabolic_degree(sub.incidence, w, sub.degree, 1);
    AlphaWitness wit{sub, pd, name};
    res.invariant_subbundles.push_back(wit);
    if (pd > half) {
      if (!res.witness || pd > res.witness->pardeg) res.witness = wit;
    } else if (pd == half) {
      semistable_eq = true;
      if (!res.witness) res.witness = wit;
    }
  }
  if (res.witness && res.witness->pardeg > half)
    res.verdict = Verdict::unstable;
  else if (semistable_eq)
    res.verdict = Verdict::strictly_semistable;
  else
    res.verdict = Verdict::stable;
  return res;
}

// ---- phi-stability ----

SubpairData full_pair() { return SubpairData{2, -1, {1, 1, 1, 1}, 2, -1}; }

Rational mu_phi(const SubpairData& p, const Weight& w) {
  const int den = w.beta1 * p.rank1 + w.beta2 * p.rank2;
  if (den <= 0) throw DomainError("mu undefined for the zero pair");
  Rational f1 = Rational(p.deg1) - 4 * p.rank1;
  for (int i = 0; i < 4; ++i) {
    if (p.incidence[i] < 0 || p.incidence[i] > std::min(p.rank1, 1)) throw DomainError("incidence out of range");
    f1 += w.alpha_prime[2 * i] * (p.rank1 - p.incidence[i]) + w.alpha_prime[2 * i + 1] * p.incidence[i];
  }
  Rational f2 = Rational(p.deg2) - Rational(w.gamma * p.rank2);
  return (w.beta1 * f1 + w.beta2 * f2) / den;
}

namespace {

struct Resolved {
  int rank = 0;
  Integer deg = 0;
  PolyVec gen{};
};

Resolved resolve(const SubObject& o, double tol) {
  if (o.rank == 0) return {0, 0, {}};
  if (o.rank == 2) return {2, -1, {}};
  if (o.rank != 1) throw DomainError("sub-object rank must be 0, 1 or 2");
  LineSubbundle s = saturate(o.generator, tol);
  return {1, s.degree, s.generator};
}

// is the polynomial vector x a section of F (given by rank and generator)?
bool contained(const PolyVec& x, const Resolved& f, double scale, double tol) {
  if (vzero(x, scale, tol)) return true;
  if (f.rank == 2) return true;
  if (f.rank == 0) return false;
  return wedge(x, f.gen).max_abs() <= tol * std::max(1.0, scale) * std::max(1.0, vmax(f.gen));
}

}  // namespace

Rational mu_phi(const PhiConnection& conn, const SubObject& f1, const SubObject& f2, const Weight& w, double tol) {
  const Resolved r1 = resolve(f1, tol), r2 = resolve(f2, tol);
  const double scale = conn_scale(conn);
  std::vector<PolyVec> gens;
  if (r1.rank == 1) gens.push_back(r1.gen);
  if (r1.rank == 2) gens = {{P::constant(1.0), P{}}, {P{}, P::constant(1.0)}};
  for (const auto& g : gens) {
    const double s = scale * std::max(1.0, vmax(g));
    if (!contained(mat_apply(conn.phi_matrix(), g), r2, s, tol))
      throw PreconditionError("inclusion phi(F1) ⊆ F2 fails");
    if (!contained(nabla_num(conn, g), r2, s, tol))
      throw PreconditionError("inclusion nabla(F1) ⊆ F2 ⊗ Ω(D) fails");
  }
  SubpairData p;
  p.rank1 = r1.rank;
  p.deg1 = r1.deg;
  p.rank2 = r2.rank;
  p.deg2 = r2.deg;
  if (r1.rank == 1) p.incidence = incidences(conn, r1.gen, 1e-7);
  if (r1.rank == 2) p.incidence = {1, 1, 1, 1};
  return mu_phi(p, w);
}

PhiStabilityResult is_phi_stable(const PhiConnection& conn, const Weight& w, double tol) {
  PhiStabilityResult res;
  res.mu_e = mu_phi(full_pair(), w);
  const double scale = conn_scale(conn);
  const PM phi = conn.phi_matrix();
  const PM n = conn.numerator();
  Rational max_top = 0;
  for (int i = 0; i < 4; ++i) max_top += w.alpha_prime[2 * i + 1];

  auto exact = [&](SubpairData p, std::string d) {
    res.candidates.push_back({p, mu_phi(p, w), true, std::move(d)});
  };
  auto bound = [&](int r1, Integer d1, int r2, Integer d2, std::string d) {
    // incidence-free pair with the maximal incidence contribution added by hand
    SubpairData p{r1, d1, {0, 0, 0, 0}, r2, d2};
    Rational mu = mu_phi(p, w);
    const int den = w.beta1 * r1 + w.beta2 * r2;
    Rational extra = 0;
    for (int i = 0; i < 4; ++i) extra += w.alpha_prime[2 * i + 1] - w.alpha_prime[2 * i];
    mu += Rational(w.beta1) * extra / den;
    res.candidates.push_back({p, mu, false, std::move(d)});
  };

  // F1 = 0
  exact({0, 0, {}, 1, 0}, "(0, O+0)");
  exact({0, 0, {}, 2, -1}, "(0, E2)");

  // F1 = E1
  std::vector<PolyVec> cols;
  for (int k = 0; k < 2; ++k) {
    cols.push_back({phi(0, k), phi(1, k)});
    cols.push_back({n(0, k), n(1, k)});
  }
  std::vector<PolyVec> nonzero;
  for (const auto& c : cols)
    if (!vzero(c, scale, tol)) nonzero.push_back(c);
  if (nonzero.empty()) throw DomainError("phi and nabla vanish identically");
  bool parallel = true;
  for (std::size_t a = 0; a < nonzero.size(); ++a)
    for (std::size_t b = a + 1; b < nonzero.size(); ++b)
      parallel = parallel && wedge(nonzero[a], nonzero[b]).max_abs() <= tol * scale * scale;
  if (parallel) {
    LineSubbundle f2 = saturate(nonzero.front(), tol);
    exact({2, -1, {1, 1, 1, 1}, 1, f2.degree}, "(E1, image line)");
  }

  // rank-one F1 candidates
  std::vector<std::pair<PolyVec, std::string>> f1s;
  f1s.push_back({{P::constant(1.0), P{}}, "O+0"});
  const bool invertible = conn.phi_invertible(1e-12);
  const bool phi2_zero = std::abs(conn.phi2) <= 1e-12 * scale;
  const bool phi1_zero = std::abs(conn.phi1) <= 1e-12 * scale;
  const bool phi_zero = phi1_zero && phi2_zero && conn.phi3.max_abs() <= 1e-12 * scale;
  if (phi_zero) {
    P d = n.det();
    if (d.max_abs() <= tol * scale * scale) {
      PolyVec k0{n(0, 1), -n(0, 0)}, k1{n(1, 1), -n(1, 0)};
      f1s.push_back({vmax(k0) >= vmax(k1) ? k0 : k1, "ker nabla"});
    }
  } else if (!invertible) {
    if (phi2_zero && !phi1_zero)
      f1s.push_back({{-conn.phi3, P::constant(conn.phi1)}, "ker phi"});
    // otherwise the kernel is O+0, already listed
  }
  if (invertible) {
    for (const auto& v : invariant_minus_one_lines(conn, tol)) f1s.push_back({v, "degree -1 invariant line"});
  } else if (phi2_zero) {
    // degree -1 lines (a, 1) with phi(F1) and nabla(F1) inside O+0
    const double s3 = conn.omega3.max_abs();
    const P n22 = n(1, 1);
    if (s3 > tol * scale) {
      auto [quot, rem] = n22.divmod(conn.omega3.trimmed(tol * scale), tol * scale);
      if (rem.max_abs() <= tol * scale && quot.degree(tol * scale) <= 1)
        f1s.push_back({{-quot, P::constant(1.0)}, "degree -1 line into O+0"});
    } else if (n22.max_abs() <= tol * scale) {
      // every such line works; take the ones through two of the flags
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
          const auto& li = conn.lines[i];
          const auto& lj = conn.lines[j];
          if (std::abs(li[1]) < 1e-12 || std::abs(lj[1]) < 1e-12) continue;
          P a = lagrange_interpolate<cplx>({conn.exponents.t[i], conn.exponents.t[j]}, {li[0] / li[1], lj[0] / lj[1]});
          f1s.push_back({{a, P::constant(1.0)}, "degree -1 line into O+0"});
        }
    }
  }

  for (const auto& [v, name] : f1s) {
    LineSubbundle f1 = saturate(v, tol);
    f1.incidence = incidences(conn, f1.generator, 1e-7);
    const PolyVec phv = mat_apply(phi, f1.generator);
    const PolyVec nv = nabla_num(conn, f1.generator);
    const double s = scale * std::max(1.0, vmax(f1.generator));
    const bool phz = vzero(phv, s, tol), nz = vzero(nv, s, tol);
    exact({1, f1.degree, f1.incidence, 2, -1}, "(" + name + ", E2)");
    if (phz && nz) {
      exact({1, f1.degree, f1.incidence, 0, 0}, "(" + name + ", 0)");
    } else if (wedge(phv, nv).max_abs() <= tol * s * s) {
      LineSubbundle f2 = saturate(phz ? nv : phv, tol);
      exact({1, f1.degree, f1.incidence, 1, f2.degree}, "(" + name + ", line)");
    }
  }

  // classes not enumerated exactly
  if (invertible) {
    bound(1, -2, 1, -2, "(degree <= -2, same degree) bound");
  } else {
    bound(1, -1, 1, -1, "(degree -1, degree <= -1) bound");
    bound(1, -2, 1, 0, "(degree <= -2, degree <= 0) bound");
  }
  bound(1, -1, 2, -1, "(degree <= -1, E2) bound");

  const PhiWitness* worst = nullptr;
  bool eq = false, undecided = false;
  for (const auto& c : res.candidates) {
    if (c.exact) {
      if (c.mu > res.mu_e && (!worst || c.mu > worst->mu)) worst = &c;
      if (c.mu == res.mu_e) eq = true;
    } else if (c.mu >= res.mu_e) {
      undecided = true;
    }
  }
  if (worst) {
    res.verdict = Verdict::unstable;
    res.witness = *worst;
  } else if (eq) {
    res.verdict = Verdict::strictly_semistable;
  } else if (undecided) {
    res.verdict = Verdict::indeterminate;
  } else {
    res.verdict = Verdict::stable;
  }
  return res;
}

}  // namespace pvilab
