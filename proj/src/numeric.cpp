#include "matchport/numeric.hpp"

#include <cctype>
#include <cmath>

namespace matchport {

namespace {

Rational parse_decimal(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  std::string digits;
  long exponent = 0;
  bool seen_digit = false;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw ValidationError("not a number: '" + std::string(text) + "'");
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') {
      throw ValidationError("not a number: '" + std::string(text) + "'");
    }
    std::string tail(text.substr(pos + 1));
    if (tail.empty()) throw ValidationError("bad exponent in '" + std::string(text) + "'");
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(tail, &used);
    } catch (const std::exception&) {
      throw ValidationError("bad exponent in '" + std::string(text) + "'");
    }
    if (used != tail.size()) throw ValidationError("bad exponent in '" + std::string(text) + "'");
    exponent += e;
  }
  if (exponent > 4096 || exponent < -4096) {
    throw ValidationError("exponent out of range in '" + std::string(text) + "'");
  }
  // Leading zeros would make the mpz string constructor read the digits as octal.
  auto first = digits.find_first_not_of('0');
  digits = first == std::string::npos ? "0" : digits.substr(first);
  Rational value{boost::multiprecision::mpz_int(digits)};
  boost::multiprecision::mpz_int scale = boost::multiprecision::pow(
      boost::multiprecision::mpz_int(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) {
    value /= Rational(scale);
  } else {
    value *= Rational(scale);
  }
  return negative ? Rational(-value) : value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  Rational num = parse_decimal(trim(text.substr(0, slash)));
  Rational den = parse_decimal(trim(text.substr(slash + 1)));
  if (den == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

std::string format_rational(const Rational& r) {
  auto num = boost::multiprecision::numerator(r);
  auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational rational_from_double(double v) {
  if (!std::isfinite(v)) throw ValidationError("non-finite value cannot be made exact");
  return Rational(v);
}

}  // namespace matchport
