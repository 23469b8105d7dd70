#pragma once

#include "matchport/audit.hpp"
#include "matchport/cost.hpp"
#include "matchport/market.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace matchport {

enum class ArithmeticMode { kFloat, kRational };

struct SolveOptions {
  std::int64_t max_iterations = 0;  // 0 picks a size-based cap
  // Decimal digits for the pivoting arithmetic; 0 chooses from the cost's
  // exponent span (long double when small, MPFR otherwise).
  int digits = 0;
};

struct SolveReport {
  Coupling coupling;
  double objective = 0.0;  // sum of mass * c(x, y) in the cost's own units
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
  ArithmeticMode mode = ArithmeticMode::kFloat;
  int working_digits = 0;  // 0 means long double
  double alpha = 0.0;      // effective alpha of the cost used
  // Dual potentials for working_cost(): phi_i + psi_j <= w_ij with equality
  // on the support. The working cost is an increasing affine image of c.
  std::vector<double> phi;
  std::vector<double> psi;
};

struct ExactSolveReport {
  ExactCoupling coupling;
  Rational objective;
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
  std::vector<Rational> phi;
  std::vector<Rational> psi;
};

// Increasing affine image of the cost used for pivoting: for the alpha
// family -expm1(alpha (u - s)) / alpha with s = u_max (alpha > 0) or u_min
// (alpha < 0), so no exponent overflows. Row-major nx * ny.
std::vector<double> working_cost(const DiscreteMarket& m, const CostSpec& c);

// Decimal digits picked for a given exponent span; 0 means long double.
int digits_for_span(double span);

SolveReport solve_transport(const DiscreteMarket& m, const CostSpec& c, const SolveOptions& options = {});

// Exact mode: neg_utility (or alpha = 0) only, since c_alpha is transcendental.
ExactSolveReport solve_transport(const ExactDiscreteMarket& m, const CostSpec& c);

struct SweepRow {
  double alpha = 0.0;
  std::optional<SolveReport> report;
  std::optional<AuditReport> audit;
  std::optional<double> theoretical_eps;
  std::string error;
};

// One solve and audit per alpha; rows come back in input order. Worker count
// is min(threads, MATCHPORT_THREADS, hardware); threads = 0 means no cap.
std::vector<SweepRow> alpha_sweep(const DiscreteMarket& m, std::span<const double> alphas, unsigned threads = 0);

// Exactly stable coupling via alpha = 2 ln 2 / delta, audited post hoc.
SolveReport stable_limit(const DiscreteMarket& m);

struct CycleWitness {
  std::vector<std::size_t> entries;  // indices into coupling.entries
  double excess = 0.0;               // sum c(x_i, y_i) - sum c(x_i, y_{i+1})
};

std::optional<CycleWitness> check_cyclic_monotone(const Coupling& coupling, const DiscreteMarket& m, const CostSpec& c,
                                                  std::size_t n_max = 4, std::size_t samples = 20000,
                                                  std::uint64_t seed = 1);

}  // namespace matchport
