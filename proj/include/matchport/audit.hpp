#pragma once

#include "matchport/line_solver.hpp"
#include "matchport/market.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace matchport {

struct AuditReport {
  double stability_gap = 0.0;
  double welfare = 0.0;
  double u_min_star = 0.0;
  double egalitarian_eps = 0.0;
  bool welfare_bound_ok = true;
  std::optional<double> alpha;
  std::optional<double> theoretical_eps;
};

// ln(k) / alpha for alpha > 0.
double stability_bound(double alpha, std::size_t k = 2);
// max(1, ln|alpha|) / |alpha| for alpha < 0.
double egalitarian_eps_bound(double alpha);
// The bound that applies to alpha's sign; nullopt at alpha = 0.
std::optional<double> theoretical_eps(double alpha, std::size_t k = 2);

// Entries with mass above kSupportTolerance * total_mass.
Coupling support(const Coupling& c);

struct BlockingPair {
  std::size_t first = 0;   // entry (x1, y1)
  std::size_t second = 0;  // entry (x2, y2); (x1, y2) is the blocking couple
  double gap = 0.0;
};

// max over ordered support pairs of u(x1, y2) - max(u(x1, y1), u(x2, y2)), clipped at 0.
double stability_gap(const Coupling& c, const DiscreteMarket& m);
std::optional<BlockingPair> worst_blocking_pair(const Coupling& c, const DiscreteMarket& m);

double welfare(const Coupling& c, const DiscreteMarket& m);

// Largest lambda such that couples with u >= lambda carry a full matching.
double egalitarian_bound(const DiscreteMarket& m);

// Smallest eps >= 0 with mass{u < u_min_star - eps} <= eps * total mass.
double egalitarian_eps(const Coupling& c, const DiscreteMarket& m, double u_min_star);
// Same scan over (utility, mass) pairs.
double egalitarian_eps_scan(std::span<const std::pair<double, double>> utility_mass, double u_min_star);

struct WelfareBoundResult {
  bool welfare_ok = false;
  bool egalitarian_ok = false;
  double welfare = 0.0;       // shifted, unit-mass
  double welfare_star = 0.0;  // shifted, unit-mass
  double welfare_margin = 0.0;
  double egalitarian_eps = 0.0;
  double egalitarian_margin = 0.0;
};

// W >= (W* - eps) / 2 and egalitarian eps <= max(1/2, eps), after shifting u
// to be >= 0 and normalising both sides to unit mass.
WelfareBoundResult welfare_bound_check(const Coupling& c, const DiscreteMarket& m, double eps);

// Values computed once per market and shared by every audit of it.
struct MarketBaseline {
  double u_min_star = 0.0;
  double welfare_star = 0.0;
  double u_lo = 0.0;
};

MarketBaseline market_baseline(const DiscreteMarket& m);
AuditReport audit_coupling(const Coupling& c, const DiscreteMarket& m, const MarketBaseline& base,
                           std::optional<double> alpha = std::nullopt);

// Highest-utility free couple first, ties to the lowest (x, y).
Coupling greedy_matching(const DiscreteMarket& m);

using Permutation = std::vector<std::size_t>;  // x index -> y index

struct BruteForceResult {
  std::vector<Permutation> stable_set;
  Permutation greedy;
  Permutation welfare_opt;
  double welfare_opt_value = 0.0;
  Permutation bottleneck_opt;
  double bottleneck_value = 0.0;
  bool greedy_is_stable = false;
};

inline constexpr std::size_t kBruteForceMaxAtoms = 8;

// Enumerates all n! matchings of an n x n equal-mass market.
BruteForceResult brute_force_oracle(const DiscreteMarket& m);

Coupling permutation_coupling(const DiscreteMarket& m, const Permutation& p);

// Two matched pairs whose spanning intervals strictly interlace.
struct CrossingViolation {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
};

inline constexpr std::size_t kDefaultCrossingSamples = 512;

// Samples each piece at its endpoints plus evenly spaced interior points so
// that every piece pair sees about `samples` combinations.
std::vector<CrossingViolation> no_crossing_check(const LineMatching<double>& lm,
                                                 std::size_t samples = kDefaultCrossingSamples);
// Support pairs of a coupling on a one-dimensional market.
std::vector<CrossingViolation> no_crossing_check(const Coupling& c, const DiscreteMarket& m);

}  // namespace matchport
