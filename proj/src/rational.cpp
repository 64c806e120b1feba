#include "troquad/rational.hpp"

#include <cctype>

#include "troquad/errors.hpp"

namespace troquad {

namespace {

boost::multiprecision::cpp_int parse_integer(const std::string& s) {
  if (s.empty()) throw ParseError("empty number");
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) throw ParseError("malformed number '" + s + "'");
  for (std::size_t k = i; k < s.size(); ++k) {
    if (!std::isdigit(static_cast<unsigned char>(s[k]))) {
      throw ParseError("malformed number '" + s + "'");
    }
  }
  // Strip leading zeros, which the cpp_int constructor reads as octal.
  while (i + 1 < s.size() && s[i] == '0') ++i;
  boost::multiprecision::cpp_int v(s.substr(i));
  return s[0] == '-' ? boost::multiprecision::cpp_int(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const auto num = parse_integer(text.substr(0, slash));
    const auto den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator in '" + text + "'");
    return Rational(num, den);
  }
  const auto dot_pos = text.find('.');
  if (dot_pos == std::string::npos) return Rational(parse_integer(text));
  std::string digits = text.substr(0, dot_pos) + text.substr(dot_pos + 1);
  const std::size_t frac = text.size() - dot_pos - 1;
  if (digits == "-" || digits == "+" || digits.empty()) {
    throw ParseError("malformed number '" + text + "'");
  }
  boost::multiprecision::cpp_int den = 1;
  for (std::size_t k = 0; k < frac; ++k) den *= 10;
  return Rational(parse_integer(digits), den);
}

std::string format_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

}  // namespace troquad
