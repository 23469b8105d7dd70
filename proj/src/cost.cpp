#include "matchport/cost.hpp"

#include <cmath>
#include <sstream>

namespace matchport {

CostSpec CostSpec::alpha(double a) {
  if (!std::isfinite(a)) throw ValidationError("alpha must be finite");
  CostSpec c;
  c.family_ = CostFamily::kAlpha;
  c.alpha_ = a;
  return c;
}

CostSpec CostSpec::neg_utility() { return CostSpec{}; }

CostSpec CostSpec::general_h(HForm form, double param, double alpha_bound) {
  if (!std::isfinite(param) || !std::isfinite(alpha_bound)) throw ValidationError("h parameters must be finite");
  switch (form) {
    case HForm::kExp:
      if (!(param > 0)) throw ValidationError("exp form needs a positive rate");
      break;
    case HForm::kNegExp:
      if (!(param < 0)) throw ValidationError("neg_exp form needs a negative rate");
      break;
    case HForm::kPower:
      if (!(param > 0)) throw ValidationError("power form needs a positive exponent");
      break;
  }
  if (alpha_bound == 0) throw ValidationError("alpha_bound must be nonzero");
  CostSpec c;
  c.family_ = CostFamily::kGeneralH;
  c.form_ = form;
  c.param_ = param;
  c.alpha_bound_ = alpha_bound;
  return c;
}

double CostSpec::effective_alpha() const {
  switch (family_) {
    case CostFamily::kAlpha:
      return alpha_;
    case CostFamily::kGeneralH:
      return alpha_bound_;
    case CostFamily::kNegUtility:
      break;
  }
  return 0.0;
}

std::string CostSpec::describe() const {
  std::ostringstream os;
  switch (family_) {
    case CostFamily::kAlpha:
      os << "alpha(" << alpha_ << ")";
      break;
    case CostFamily::kNegUtility:
      os << "neg_utility";
      break;
    case CostFamily::kGeneralH: {
      const char* name = form_ == HForm::kExp ? "exp" : form_ == HForm::kNegExp ? "neg_exp" : "power";
      os << "general_h(" << name << ", " << param_ << ", bound " << alpha_bound_ << ")";
      break;
    }
  }
  return os.str();
}

namespace {

void guard_exponent(double e) {
  if (!(std::abs(e) <= kExponentGuard)) {
    throw OverflowError("cost exponent " + std::to_string(e) + " exceeds the overflow guard; rescale the utility");
  }
}

}  // namespace

double h_eval(HForm form, double param, double t) {
  switch (form) {
    case HForm::kExp:
      guard_exponent(param * t);
      return std::exp(param * t);
    case HForm::kNegExp:
      guard_exponent(param * t);
      return -std::exp(param * t);
    case HForm::kPower:
      if (!(t > 0)) throw ValidationError("power form needs positive utilities");
      return std::pow(t, param);
  }
  return 0.0;
}

double h_log_derivative(HForm form, double param, double t) {
  switch (form) {
    case HForm::kExp:
    case HForm::kNegExp:
      return param;
    case HForm::kPower:
      if (!(t > 0)) throw ValidationError("power form needs positive utilities");
      return param / t;
  }
  return 0.0;
}

double cost_eval(const CostSpec& c, double u) {
  switch (c.family()) {
    case CostFamily::kNegUtility:
      return -u;
    case CostFamily::kAlpha: {
      double a = c.alpha_value();
      if (a == 0.0) return -u;
      guard_exponent(a * u);
      return -std::expm1(a * u) / a;
    }
    case CostFamily::kGeneralH:
      return -h_eval(c.h_form(), c.h_param(), u);
  }
  return 0.0;
}

double cost_eval(const CostSpec& c, const DiscreteMarket& m, std::size_t i, std::size_t j) {
  return cost_eval(c, m.utility(i, j));
}

void validate_general_h(const CostSpec& c, double u_lo, double u_hi) {
  if (c.family() != CostFamily::kGeneralH) return;
  if (u_lo > u_hi) throw ValidationError("utility range reversed");
  HForm form = c.h_form();
  double a = c.h_param();
  double bound = c.alpha_bound();
  if (bound > 0 && form == HForm::kNegExp) throw ValidationError("a positive alpha_bound needs h > 0");
  if (bound < 0 && form != HForm::kNegExp) throw ValidationError("a negative alpha_bound needs h < 0");
  if (form == HForm::kPower && !(u_lo > 0)) throw ValidationError("power form needs utilities > 0");
  // Analytic minimum of h'/h over the range.
  double worst = form == HForm::kPower ? a / u_hi : a;
  if (worst < bound) {
    throw ValidationError("log-derivative " + std::to_string(worst) + " is below alpha_bound " +
                          std::to_string(bound));
  }
  constexpr int kSamples = 257;
  double prev = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    double t = u_lo + (u_hi - u_lo) * s / (kSamples - 1);
    double h = h_eval(form, a, t);
    if ((bound > 0 && !(h > 0)) || (bound < 0 && !(h < 0))) throw ValidationError("h has the wrong sign");
    if (s > 0 && h < prev) throw ValidationError("h is not increasing on the utility range");
    if (h_log_derivative(form, a, t) < bound) throw ValidationError("sampled log-derivative below alpha_bound");
    prev = h;
  }
}

double exponent_span(const CostSpec& c, double u_lo, double u_hi) {
  double range = u_hi - u_lo;
  switch (c.family()) {
    case CostFamily::kAlpha:
      return std::abs(c.alpha_value()) * range;
    case CostFamily::kGeneralH:
      if (c.h_form() == HForm::kPower) return 0.0;
      return std::abs(c.h_param()) * range;
    case CostFamily::kNegUtility:
      break;
  }
  return 0.0;
}

}  // namespace matchport
