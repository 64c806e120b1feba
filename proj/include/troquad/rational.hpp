#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <vector>

namespace troquad {

using Rational = boost::multiprecision::cpp_rational;
using RationalVector = std::vector<Rational>;

/// Exact rational value of a finite double.
inline Rational to_rational(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  // mant * 2^53 is an integer for every finite double.
  const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  Rational r(scaled);
  exp -= 53;
  boost::multiprecision::cpp_int pow2 = 1;
  pow2 <<= std::abs(exp);
  if (exp >= 0) return r * Rational(pow2);
  return r / Rational(pow2);
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// Parses "p", "p/q" or a decimal literal such as "-0.25" exactly.
Rational parse_rational(const std::string& text);

std::string format_rational(const Rational& r);

inline Rational dot(const RationalVector& a, const RationalVector& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace troquad
