#pragma once

// Numeric field abstraction. Every algorithm in the library is written once
// against ScalarTraits<T> and instantiated for exact rationals (GMP) and for
// binary64 floating point.

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

namespace gom {

using Rational = mpq_class;

enum class Arithmetic { rational, floating };

std::string to_string(Arithmetic a);
Arithmetic parse_arithmetic(std::string_view s);

template <typename T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr Arithmetic kind = Arithmetic::floating;
  static constexpr bool exact = false;

  static double from_ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
  // Values within tol of zero count as zero; exact fields ignore tol.
  static bool is_zero(double x, double tol) { return std::fabs(x) <= tol; }
  // Shortest decimal string that parses back to the same double.
  static std::string to_string(double x);
  static double parse(std::string_view s);
};

template <>
struct ScalarTraits<Rational> {
  static constexpr Arithmetic kind = Arithmetic::rational;
  static constexpr bool exact = true;

  static Rational from_ratio(long num, long den) {
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  // Exact binary expansion of the double.
  static Rational from_double(double x) { return Rational(x); }
  static double to_double(const Rational& x) { return x.get_d(); }
  static Rational abs(const Rational& x) { return ::abs(x); }
  static bool is_zero(const Rational& x, double /*tol*/) { return sgn(x) == 0; }
  // Always "p/q", including integers ("1/1").
  static std::string to_string(const Rational& x);
  // Accepts "p/q", "p", or a decimal literal such as "0.25" (read exactly).
  static Rational parse(std::string_view s);
};

template <typename T>
inline T abs_value(const T& x) {
  return ScalarTraits<T>::abs(x);
}

template <typename T>
inline double to_double(const T& x) {
  return ScalarTraits<T>::to_double(x);
}

template <typename T>
inline bool is_zero(const T& x, double tol) {
  return ScalarTraits<T>::is_zero(x, tol);
}

template <typename T>
inline std::string scalar_to_string(const T& x) {
  return ScalarTraits<T>::to_string(x);
}

template <typename T>
inline T parse_scalar(std::string_view s) {
  return ScalarTraits<T>::parse(s);
}

}  // namespace gom
