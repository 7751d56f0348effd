#include "gom/scalar.hpp"

#include <charconv>
#include <system_error>

#include "gom/error.hpp"

namespace gom {

std::string to_string(Arithmetic a) {
  return a == Arithmetic::rational ? "rational" : "float";
}

Arithmetic parse_arithmetic(std::string_view s) {
  if (s == "rational" || s == "exact") return Arithmetic::rational;
  if (s == "float" || s == "double") return Arithmetic::floating;
  throw InputError("unknown arithmetic '" + std::string(s) + "' (expected rational|float)");
}

std::string ScalarTraits<double>::to_string(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw Error("cannot format double");
  return std::string(buf, ptr);
}

double ScalarTraits<double>::parse(std::string_view s) {
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    return ScalarTraits<Rational>::parse(s).get_d();
  }
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("not a number: '" + std::string(s) + "'");
  }
  return out;
}

std::string ScalarTraits<Rational>::to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s) {
  if (!is_integer_literal(s)) throw InputError("not an integer: '" + std::string(s) + "'");
  std::string text(s[0] == '+' ? s.substr(1) : s);
  return mpz_class(text, 10);
}

}  // namespace

Rational ScalarTraits<Rational>::parse(std::string_view s) {
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    mpz_class num = parse_integer(s.substr(0, slash));
    mpz_class den = parse_integer(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + std::string(s) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }
  if (is_integer_literal(s)) return Rational(parse_integer(s));

  // Decimal literal, possibly with exponent: read digits exactly.
  std::string_view mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    std::string_view exp_text = s.substr(e + 1);
    if (!is_integer_literal(exp_text)) throw InputError("not a number: '" + std::string(s) + "'");
    exponent = std::stol(std::string(exp_text));
  }
  auto dot = mantissa.find('.');
  std::string digits;
  if (dot == std::string_view::npos) {
    digits = std::string(mantissa);
  } else {
    digits = std::string(mantissa.substr(0, dot)) + std::string(mantissa.substr(dot + 1));
    exponent -= static_cast<long>(mantissa.size() - dot - 1);
  }
  if (digits == "-" || digits == "+" || digits.empty()) digits += "0";
  Rational r(parse_integer(digits));
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    r /= scale;
  } else {
    r *= scale;
  }
  r.canonicalize();
  return r;
}

}  // namespace gom
