#pragma once

#include <array>

#include "pvilab/poly.hpp"

namespace pvilab {

template <class T>
struct Mat2 {
  std::array<std::array<T, 2>, 2> a{};

  T& operator()(int i, int j) { return a[i][j]; }
  const T& operator()(int i, int j) const { return a[i][j]; }

  static Mat2 identity() {
    Mat2 m;
    m(0, 0) = T(1); m(0, 1) = T(0); m(1, 0) = T(0); m(1, 1) = T(1);
    return m;
  }
  static Mat2 make(T a00, T a01, T a10, T a11) {
    Mat2 m;
    m(0, 0) = a00; m(0, 1) = a01; m(1, 0) = a10; m(1, 1) = a11;
    return m;
  }
  T det() const { return a[0][0] * a[1][1] - a[0][1] * a[1][0]; }
  T trace() const { return a[0][0] + a[1][1]; }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = x(i, 0) * y(0, j) + x(i, 1) * y(1, j);
    return r;
  }
  friend Mat2 operator+(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = x(i, j) + y(i, j);
    return r;
  }
  friend Mat2 operator-(const Mat2& x, const Mat2& y) {
    Mat2 r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) r(i, j) = x(i, j) - y(i, j);
    return r;
  }
  // adjugate; equals det * inverse
  Mat2 adjugate() const { return make(a[1][1], -a[0][1], -a[1][0], a[0][0]); }
};

template <class S>
using PolyMat2 = Mat2<Poly<S>>;

template <class S>
Mat2<S> evaluate(const PolyMat2<S>& m, const S& z) {
  Mat2<S> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = m(i, j)(z);
  return r;
}

template <class S>
PolyMat2<S> derivative(const PolyMat2<S>& m) {
  PolyMat2<S> r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r(i, j) = m(i, j).derivative();
  return r;
}

template <class S>
using Vec2 = std::array<S, 2>;

// a nonzero kernel vector of a singular 2x2 matrix (the zero matrix gives e1)
template <class S>
Vec2<S> kernel_vector(const Mat2<S>& m, double tol = 0.0) {
  using tr = scalar_traits<S>;
  double r0 = tr::magnitude(m(0, 0)) + tr::magnitude(m(0, 1));
  double r1 = tr::magnitude(m(1, 0)) + tr::magnitude(m(1, 1));
  if (r0 <= tol && r1 <= tol) return {S(1), S(0)};
  if (r0 >= r1) return {m(0, 1), -m(0, 0)};
  return {m(1, 1), -m(1, 0)};
}

}  // namespace pvilab
