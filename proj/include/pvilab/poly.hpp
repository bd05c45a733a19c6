#pragma once

#include <algorithm>
#include <array>
#include <initializer_list>
#include <vector>

#include "pvilab/errors.hpp"
#include "pvilab/types.hpp"

namespace pvilab {

// dense univariate polynomial, coefficients stored low degree first
template <class S>
class Poly {
 public:
  Poly() = default;
  Poly(std::initializer_list<S> c) : c_(c) {}
  explicit Poly(std::vector<S> c) : c_(std::move(c)) {}
  static Poly constant(const S& v) { return Poly(std::vector<S>{v}); }
  // (z - r)
  static Poly linear_root(const S& r) { return Poly(std::vector<S>{-r, S(1)}); }

  const std::vector<S>& coeffs() const { return c_; }
  std::size_t size() const { return c_.size(); }
  S coeff(std::size_t k) const { return k < c_.size() ? c_[k] : S(0); }
  void set_coeff(std::size_t k, const S& v) {
    if (k >= c_.size()) c_.resize(k + 1, S(0));
    c_[k] = v;
  }

  // degree after discarding coefficients that are zero within tol; -1 for the zero polynomial
  int degree(double tol = 0.0) const {
    for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k)
      if (!scalar_traits<S>::is_zero(c_[k], tol)) return k;
    return -1;
  }
  bool is_zero(double tol = 0.0) const { return degree(tol) < 0; }

  Poly trimmed(double tol = 0.0) const {
    Poly p = *this;
    p.c_.resize(static_cast<std::size_t>(degree(tol) + 1));
    return p;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, scalar_traits<S>::magnitude(v));
    return m;
  }

  template <class T>
  T operator()(const T& z) const {
    T acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + T(*it);
    return acc;
  }

  Poly derivative() const {
    if (c_.size() <= 1) return Poly{};
    std::vector<S> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * S(static_cast<int>(k));
    return Poly(std::move(d));
  }

  Poly& operator+=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), S(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] += o.c_[k];
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), S(0));
    for (std::size_t k = 0; k < o.c_.size(); ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Poly& operator*=(const S& s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(Poly a) { return a *= S(-1); }
  friend Poly operator*(Poly a, const S& s) { return a *= s; }
  friend Poly operator*(const S& s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.c_.empty() || b.c_.empty()) return Poly{};
    std::vector<S> r(a.c_.size() + b.c_.size() - 1, S(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Poly(std::move(r));
  }

  // division by (z - r); remainder returned through rem
  Poly divide_linear(const S& r, S* rem = nullptr) const {
    if (c_.empty()) {
      if (rem) *rem = S(0);
      return Poly{};
    }
    std::vector<S> q(c_.size() > 1 ? c_.size() - 1 : 0, S(0));
    S acc(0);
    for (int k = static_cast<int>(c_.size()) - 1; k >= 0; --k) {
      acc = acc * r + c_[k];
      if (k > 0) q[k - 1] = acc;
    }
    if (rem) *rem = acc;
    return Poly(std::move(q));
  }

  // euclidean division by a divisor whose leading coefficient (above tol) is nonzero
  std::pair<Poly, Poly> divmod(const Poly& d, double tol = 0.0) const {
    int dd = d.degree(tol);
    if (dd < 0) throw DomainError("polynomial division by zero");
    Poly r = *this;
    int rd = r.degree(tol);
    Poly q;
    const S lead = d.c_[dd];
    while (rd >= dd) {
      S f = r.c_[rd] / lead;
      q.set_coeff(rd - dd, f);
      for (int k = 0; k <= dd; ++k) r.c_[rd - dd + k] -= f * d.c_[k];
      r.c_[rd] = S(0);
      rd = r.degree(tol);
    }
    return {q, r.trimmed(tol)};
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    std::size_t n = std::max(a.c_.size(), b.c_.size());
    for (std::size_t k = 0; k < n; ++k)
      if (!(a.coeff(k) == b.coeff(k))) return false;
    return true;
  }

 private:
  std::vector<S> c_;
};

template <class S>
Poly<S> product_of_roots(const std::vector<S>& roots) {
  Poly<S> p = Poly<S>::constant(S(1));
  for (const auto& r : roots) p = p * Poly<S>::linear_root(r);
  return p;
}

// the unique polynomial of degree < n through (x_k, y_k)
template <class S>
Poly<S> lagrange_interpolate(const std::vector<S>& xs, const std::vector<S>& ys) {
  if (xs.size() != ys.size()) throw DimensionError("interpolation: size mismatch");
  Poly<S> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Poly<S> basis = Poly<S>::constant(S(1));
    S denom(1);
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      basis = basis * Poly<S>::linear_root(xs[j]);
      denom *= xs[i] - xs[j];
    }
    out += basis * (ys[i] / denom);
  }
  return out;
}

template <class S>
Poly<cplx> to_cplx_poly(const Poly<S>& p) {
  std::vector<cplx> c;
  c.reserve(p.size());
  for (const auto& v : p.coeffs()) c.push_back(to_cplx(v));
  return Poly<cplx>(std::move(c));
}

// relative smallness of a polynomial identity residual
inline bool poly_negligible(const Poly<cplx>& p, double scale, double rel_tol) {
  return p.max_abs() <= rel_tol * std::max(1.0, scale);
}
inline bool poly_negligible(const Poly<Rational>& p, double, double) { return p.is_zero(); }

}  // namespace pvilab
