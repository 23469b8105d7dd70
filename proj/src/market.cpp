#include "matchport/market.hpp"

#include <algorithm>

namespace matchport {

NashReduction nash_bargaining_reduce(const DenseMatrix<double>& surplus, double beta, double eps) {
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("beta must lie strictly inside (0, 1)");
  if (!(eps >= 0.0)) throw ValidationError("eps must be >= 0");
  return {UtilitySpec::nash_surplus(surplus, beta), eps / std::min(beta, 1.0 - beta)};
}

}  // namespace matchport
