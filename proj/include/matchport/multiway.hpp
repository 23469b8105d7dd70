#pragma once

#include "matchport/audit.hpp"
#include "matchport/cost.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace matchport {

inline constexpr std::size_t kMaxTensorCells = 200000;

// k populations and a utility over k-tuples, stored as a dense tensor with
// the last index varying fastest.
class KMarket {
 public:
  using TupleUtility = std::function<double(std::span<const std::size_t>)>;

  // dummies[s][i] marks padding atoms; empty means none.
  KMarket(std::vector<std::vector<double>> masses, std::vector<double> utility,
          std::vector<std::vector<bool>> dummies = {});
  static KMarket from_function(std::vector<std::vector<double>> masses, const TupleUtility& u,
                               std::vector<std::vector<bool>> dummies = {});

  std::size_t k() const { return masses_.size(); }
  std::size_t size(std::size_t side) const { return masses_.at(side).size(); }
  const std::vector<double>& masses(std::size_t side) const { return masses_.at(side); }
  const std::vector<std::vector<double>>& all_masses() const { return masses_; }
  std::size_t cells() const { return utility_.size(); }
  const std::vector<double>& utility_tensor() const { return utility_; }
  double total_mass() const { return total_; }

  double utility(std::size_t cell) const { return utility_.at(cell); }
  double utility(std::span<const std::size_t> index) const { return utility_.at(cell_of(index)); }
  std::size_t cell_of(std::span<const std::size_t> index) const;
  std::vector<std::size_t> index_of(std::size_t cell) const;
  std::pair<double, double> utility_range() const;

  bool is_dummy(std::size_t side, std::size_t atom) const {
    return !dummies_.empty() && dummies_.at(side).at(atom);
  }

 private:
  std::vector<std::vector<double>> masses_;
  std::vector<double> utility_;
  std::vector<std::size_t> strides_;
  std::vector<std::vector<bool>> dummies_;
  double total_ = 0.0;
};

struct KCoupling {
  struct Entry {
    std::vector<std::size_t> index;
    double mass = 0.0;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  double total_mass = 0.0;
  bool operator==(const KCoupling&) const = default;
};

// Throws ValidationError unless every one-dimensional marginal matches.
void validate_k_coupling(const KCoupling& c, const KMarket& m);

struct KSolveReport {
  KCoupling coupling;
  double objective = 0.0;  // in the cost's own units
  double alpha = 0.0;
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
};

KSolveReport solve_k_transport(const KMarket& m, const CostSpec& c, std::int64_t max_iterations = 0);

struct KStabilityResult {
  double gap = 0.0;
  std::vector<std::size_t> witness;  // entry indices e^1..e^k; empty when gap is 0
  bool exhaustive = true;
  std::uint64_t evaluated = 0;
  double coverage = 1.0;  // evaluated / |support|^k
};

// max over k-tuples of support entries of u(e^1_1, ..., e^k_k) - max_i u(e^i),
// clipped at 0. Exhaustive while |support|^k <= 30^k, sampled beyond.
KStabilityResult k_stability(const KCoupling& c, const KMarket& m, std::uint64_t samples = 1000000,
                             std::uint64_t seed = 1);
double k_stability_gap(const KCoupling& c, const KMarket& m);

double k_welfare(const KCoupling& c, const KMarket& m);

// Largest lambda such that the tuples with u >= lambda carry a full coupling.
double k_egalitarian_bound(const KMarket& m);

double k_egalitarian_eps(const KCoupling& c, const KMarket& m, double u_min_star);

struct KWelfareBoundResult {
  bool welfare_ok = false;
  bool egalitarian_ok = false;
  double welfare = 0.0;       // shifted, unit-mass
  double welfare_star = 0.0;  // shifted, unit-mass
  double welfare_margin = 0.0;
  double egalitarian_eps = 0.0;
  double egalitarian_margin = 0.0;
};

// W >= (W* - eps) / k and egalitarian eps <= max(1/k, eps), after shifting u
// to be >= 0 and normalising every side to unit mass.
KWelfareBoundResult k_welfare_bound_check(const KCoupling& c, const KMarket& m, double eps);

AuditReport k_audits(const KCoupling& c, const KMarket& m, double eps);

// Every assignment of equal-mass atoms: k-1 permutations applied to side 0.
struct KAssignment {
  std::vector<std::vector<std::size_t>> perms;  // perms[s][i]: atom of side s+1 teamed with atom i of side 0
  double welfare = 0.0;
  bool stable = false;
};

struct KBruteForceResult {
  std::vector<KAssignment> assignments;
  std::size_t best = 0;  // welfare-maximising assignment
};

// n atoms per side, equal masses, (n!)^(k-1) <= 10^6.
KBruteForceResult k_brute_force(const KMarket& m);
KCoupling assignment_coupling(const KMarket& m, const KAssignment& a);

using SizePoint = std::array<double, 2>;  // (patient size, donor size)

struct OrganType {
  std::string label;
  std::vector<SizePoint> atoms;
  std::vector<double> masses;
};

struct OrganEdge {
  std::size_t a = 0, b = 0;
  // Quality of teaming an atom of type a with an atom of type b.
  std::function<double(const SizePoint&, const SizePoint&)> quality;
};

enum class DummyPadding {
  kToTotal,  // every side reaches the summed real mass of all types
  kToMax,    // every side reaches the largest real mass of one type
};

struct OrganOptions {
  double penalty = 1000.0;  // M
  DummyPadding padding = DummyPadding::kToTotal;
  // Split dummy mass into atoms of the finest real mass so equal-mass
  // oracles still apply.
  bool split_dummies = true;
};

// Donor/patient mismatch: -(|donor_a - patient_b| + |donor_b - patient_a|) / 2.
double size_mismatch_quality(const SizePoint& a, const SizePoint& b);

KMarket organ_exchange_market(const std::vector<OrganType>& types, const std::vector<OrganEdge>& edges,
                              const OrganOptions& options = {});

}  // namespace matchport
