#pragma once

// Cost arithmetic shared by the two- and k-marginal solvers.

#include "matchport/cost.hpp"

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

namespace matchport::detail {

struct CostShape {
  CostSpec cost;
  double u_lo = 0.0;
  double u_hi = 0.0;
  double span = 0.0;
};

inline CostShape shape_of(std::pair<double, double> range, const CostSpec& c) {
  CostShape s{c, range.first, range.second, 0.0};
  if (!std::isfinite(s.u_lo) || !std::isfinite(s.u_hi)) throw ValidationError("non-finite utility");
  s.span = exponent_span(c, s.u_lo, s.u_hi);
  if (s.span > kExponentGuard) {
    throw OverflowError("|alpha| * (u_max - u_min) = " + std::to_string(s.span) +
                        " exceeds 700; rescale the utility");
  }
  if (c.family() == CostFamily::kGeneralH) validate_general_h(c, s.u_lo, s.u_hi);
  return s;
}

template <class W>
inline W working_value(const CostShape& s, double u_d) {
  using std::exp;
  using std::pow;
  W u(u_d);
  const CostSpec& c = s.cost;
  switch (c.family()) {
    case CostFamily::kNegUtility:
      return W(-u);
    case CostFamily::kAlpha: {
      double a = c.alpha_value();
      if (a == 0.0) return W(-u);
      W shift(a > 0 ? s.u_hi : s.u_lo);
      W aw(a);
      if constexpr (std::is_same_v<W, long double>) {
        return -std::expm1(aw * (u - shift)) / aw;
      } else {
        return W((W(1) - exp(W(aw * (u - shift)))) / aw);
      }
    }
    case CostFamily::kGeneralH: {
      double a = c.h_param();
      W aw(a);
      switch (c.h_form()) {
        case HForm::kExp:
          return W(-exp(W(aw * (u - W(s.u_hi)))));
        case HForm::kNegExp:
          return W(exp(W(aw * (u - W(s.u_lo)))));
        case HForm::kPower:
          return W(-pow(u, aw));
      }
    }
  }
  return W(0);
}

// c(u) in the cost's own units, evaluated in long double.
inline long double original_cost(const CostSpec& c, long double u) {
  switch (c.family()) {
    case CostFamily::kNegUtility:
      return -u;
    case CostFamily::kAlpha: {
      long double a = c.alpha_value();
      return a == 0.0L ? -u : -std::expm1(a * u) / a;
    }
    case CostFamily::kGeneralH: {
      long double p = c.h_param();
      switch (c.h_form()) {
        case HForm::kExp:
          return -std::exp(p * u);
        case HForm::kNegExp:
          return std::exp(p * u);
        case HForm::kPower:
          return -std::pow(u, p);
      }
    }
  }
  return 0.0L;
}

}  // namespace matchport::detail
