#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <complex>
#include <cmath>
#include <string>

namespace pvilab {

using cplx = std::complex<double>;
using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

template <class S>
struct scalar_traits;

template <>
struct scalar_traits<cplx> {
  static constexpr bool exact = false;
  static bool is_zero(const cplx& v, double tol) { return std::abs(v) <= tol; }
  static double magnitude(const cplx& v) { return std::abs(v); }
};

template <>
struct scalar_traits<Rational> {
  static constexpr bool exact = true;
  static bool is_zero(const Rational& v, double) { return v == 0; }
  static double magnitude(const Rational& v) { return std::abs(static_cast<double>(v)); }
};

inline cplx to_cplx(const cplx& v) { return v; }
inline cplx to_cplx(const Rational& v) { return cplx(static_cast<double>(v), 0.0); }

inline std::string to_string(const Rational& r) { return r.str(); }

}  // namespace pvilab
