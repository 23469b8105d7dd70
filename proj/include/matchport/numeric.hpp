#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace matchport {

using Rational = boost::multiprecision::mpq_rational;

// Fixed-precision binary floats for large-alpha transport solves. The digit
// counts are decimal; fixed precision keeps them safe across threads.
template <unsigned Digits10>
using BigFloat = boost::multiprecision::number<
    boost::multiprecision::mpfr_float_backend<Digits10>,
    boost::multiprecision::et_off>;

// Input that violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver could not produce a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// exp() would leave the double range; rescale the utility.
class OverflowError : public SolverError {
 public:
  using SolverError::SolverError;
};

inline constexpr double kMassTolerance = 1e-9;
inline constexpr double kSupportTolerance = 1e-12;
inline constexpr double kRootTolerance = 1e-12;
inline constexpr double kExponentGuard = 700.0;

// Accepts "p/q", integers and plain decimals ("0.25", "-1e-3"); all exact.
Rational parse_rational(std::string_view text);
std::string format_rational(const Rational& r);
Rational rational_from_double(double v);

inline double to_double(double v) { return v; }
inline double to_double(long double v) { return static_cast<double>(v); }
inline double to_double(const Rational& r) { return r.convert_to<double>(); }
template <unsigned D>
double to_double(const BigFloat<D>& v) {
  return v.template convert_to<double>();
}

template <class T>
struct ScalarTraits {
  static constexpr bool exact = false;
  static T tolerance() { return T(kRootTolerance); }
  static T from_double(double v) { return T(v); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance() { return Rational(0); }
  static Rational from_double(double v) { return rational_from_double(v); }
};

template <class T>
bool approx_zero(const T& v) {
  if constexpr (ScalarTraits<T>::exact) {
    return v == 0;
  } else {
    using std::abs;
    return abs(v) <= ScalarTraits<T>::tolerance();
  }
}

template <class T>
bool approx_equal(const T& a, const T& b) {
  return approx_zero(T(a - b));
}

}  // namespace matchport
