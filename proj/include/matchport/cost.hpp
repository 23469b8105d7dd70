#pragma once

#include "matchport/market.hpp"

#include <string>

namespace matchport {

enum class CostFamily { kAlpha, kNegUtility, kGeneralH };

// Named increasing maps h for the cost c = -h(u).
//   kExp:    h(t) = exp(a t), a > 0, h'/h = a
//   kNegExp: h(t) = -exp(a t), a < 0, h'/h = a
//   kPower:  h(t) = t^a on t > 0, a > 0, h'/h = a / t
enum class HForm { kExp, kNegExp, kPower };

class CostSpec {
 public:
  static CostSpec alpha(double a);
  static CostSpec neg_utility();
  static CostSpec general_h(HForm form, double param, double alpha_bound);

  CostFamily family() const { return family_; }
  double alpha_value() const { return alpha_; }
  HForm h_form() const { return form_; }
  double h_param() const { return param_; }
  double alpha_bound() const { return alpha_bound_; }
  // alpha for the alpha family, alpha_bound for general_h, 0 for neg_utility.
  double effective_alpha() const;
  std::string describe() const;

 private:
  CostFamily family_ = CostFamily::kNegUtility;
  double alpha_ = 0.0;
  HForm form_ = HForm::kExp;
  double param_ = 0.0;
  double alpha_bound_ = 0.0;
};

// Cost of a couple with utility u. Throws OverflowError when exp() would
// leave the double range.
double cost_eval(const CostSpec& c, double u);
double cost_eval(const CostSpec& c, const DiscreteMarket& m, std::size_t i, std::size_t j);

double h_eval(HForm form, double param, double t);
double h_log_derivative(HForm form, double param, double t);

// Checks sign, monotonicity and h'/h >= alpha_bound on [u_lo, u_hi], both
// analytically and on a sample grid. Throws ValidationError on failure.
void validate_general_h(const CostSpec& c, double u_lo, double u_hi);

// |exponent| * (u_max - u_min): how many e-folds the cost spans.
double exponent_span(const CostSpec& c, double u_lo, double u_hi);

}  // namespace matchport
