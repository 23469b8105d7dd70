#include "matchport/multiway.hpp"

#include "cost_shape.hpp"
#include "matchport/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace matchport {

namespace {

double side_total(const std::vector<double>& masses) {
  return std::accumulate(masses.begin(), masses.end(), 0.0);
}

std::vector<std::size_t> strides_for(const std::vector<std::vector<double>>& masses) {
  std::vector<std::size_t> strides(masses.size(), 1);
  for (std::size_t s = masses.size(); s-- > 1;) strides[s - 1] = strides[s] * masses[s].size();
  return strides;
}

std::size_t cell_count(const std::vector<std::vector<double>>& masses) {
  std::size_t n = 1;
  for (const auto& side : masses) {
    if (side.empty()) throw ValidationError("every side needs at least one atom");
    if (n > kMaxTensorCells / side.size()) {
      throw ValidationError("instance too large: more than " + std::to_string(kMaxTensorCells) + " tensor cells");
    }
    n *= side.size();
  }
  return n;
}

// Marginal rows with the last atom of sides 1..k-1 dropped, which removes the
// k - 1 redundant balance equations and leaves a full-rank system.
struct KRows {
  std::vector<std::size_t> offset;  // first row of each side
  std::size_t count = 0;

  explicit KRows(const KMarket& m) : offset(m.k()) {
    for (std::size_t s = 0; s < m.k(); ++s) {
      offset[s] = count;
      count += m.size(s) - (s == 0 ? 0 : 1);
    }
  }

  bool kept(const KMarket& m, std::size_t s, std::size_t a) const { return s == 0 || a + 1 < m.size(s); }

  IncidenceLp build(const KMarket& m) const {
    std::vector<long double> b(count);
    for (std::size_t s = 0; s < m.k(); ++s) {
      for (std::size_t a = 0; a < m.size(s); ++a) {
        if (kept(m, s, a)) b[offset[s] + a] = m.masses(s)[a];
      }
    }
    std::vector<LpColumn> cols(m.cells());
    for (std::size_t cell = 0; cell < m.cells(); ++cell) {
      std::vector<std::size_t> idx = m.index_of(cell);
      for (std::size_t s = 0; s < m.k(); ++s) {
        if (kept(m, s, idx[s])) cols[cell].rows.push_back(offset[s] + idx[s]);
      }
    }
    return IncidenceLp(count, std::move(cols), std::move(b));
  }
};

std::vector<std::size_t> support_entries(const KCoupling& c) {
  std::vector<std::size_t> out;
  double cut = kSupportTolerance * c.total_mass;
  for (std::size_t e = 0; e < c.entries.size(); ++e) {
    if (c.entries[e].mass > cut) out.push_back(e);
  }
  return out;
}

}  // namespace

KMarket::KMarket(std::vector<std::vector<double>> masses, std::vector<double> utility,
                 std::vector<std::vector<bool>> dummies)
    : masses_(std::move(masses)), utility_(std::move(utility)), dummies_(std::move(dummies)) {
  if (masses_.size() < 2) throw ValidationError("a k-market needs k >= 2 sides");
  std::size_t n = cell_count(masses_);
  if (utility_.size() != n) throw ValidationError("utility tensor size does not match the side sizes");
  for (double u : utility_) {
    if (!std::isfinite(u)) throw ValidationError("non-finite tuple utility");
  }
  for (const auto& side : masses_) {
    for (double q : side) {
      if (!(q > 0) || !std::isfinite(q)) throw ValidationError("masses must be positive and finite");
    }
  }
  total_ = side_total(masses_[0]);
  for (std::size_t s = 1; s < masses_.size(); ++s) {
    if (!masses_balanced(total_, side_total(masses_[s]))) {
      throw ValidationError("unbalanced sides: side 0 has mass " + std::to_string(total_) + ", side " +
                            std::to_string(s) + " has " + std::to_string(side_total(masses_[s])));
    }
  }
  if (!dummies_.empty()) {
    if (dummies_.size() != masses_.size()) throw ValidationError("dummy flags need one list per side");
    for (std::size_t s = 0; s < masses_.size(); ++s) {
      if (dummies_[s].size() != masses_[s].size()) throw ValidationError("dummy flags differ in length from atoms");
    }
  }
  strides_ = strides_for(masses_);
}

KMarket KMarket::from_function(std::vector<std::vector<double>> masses, const TupleUtility& u,
                               std::vector<std::vector<bool>> dummies) {
  std::size_t n = cell_count(masses);
  std::vector<std::size_t> strides = strides_for(masses);
  std::vector<double> tensor(n);
  std::vector<std::size_t> idx(masses.size());
  for (std::size_t cell = 0; cell < n; ++cell) {
    std::size_t rest = cell;
    for (std::size_t s = 0; s < masses.size(); ++s) {
      idx[s] = rest / strides[s];
      rest %= strides[s];
    }
    tensor[cell] = u(idx);
  }
  return KMarket(std::move(masses), std::move(tensor), std::move(dummies));
}

std::size_t KMarket::cell_of(std::span<const std::size_t> index) const {
  if (index.size() != k()) throw ValidationError("tuple length differs from k");
  std::size_t cell = 0;
  for (std::size_t s = 0; s < k(); ++s) {
    if (index[s] >= size(s)) throw ValidationError("tuple index out of range");
    cell += index[s] * strides_[s];
  }
  return cell;
}

std::vector<std::size_t> KMarket::index_of(std::size_t cell) const {
  std::vector<std::size_t> idx(k());
  for (std::size_t s = 0; s < k(); ++s) {
    idx[s] = cell / strides_[s];
    cell %= strides_[s];
  }
  return idx;
}

std::pair<double, double> KMarket::utility_range() const {
  auto [lo, hi] = std::minmax_element(utility_.begin(), utility_.end());
  return {*lo, *hi};
}

void validate_k_coupling(const KCoupling& c, const KMarket& m) {
  std::vector<std::vector<double>> sums(m.k());
  for (std::size_t s = 0; s < m.k(); ++s) sums[s].assign(m.size(s), 0.0);
  std::set<std::vector<std::size_t>> keys;
  for (const auto& e : c.entries) {
    if (e.index.size() != m.k()) throw ValidationError("coupling tuple length differs from k");
    if (!(e.mass > 0)) throw ValidationError("coupling masses must be positive");
    if (!keys.insert(e.index).second) throw ValidationError("duplicate coupling entry");
    for (std::size_t s = 0; s < m.k(); ++s) {
      if (e.index[s] >= m.size(s)) throw ValidationError("coupling index out of range");
      sums[s][e.index[s]] += e.mass;
    }
  }
  for (std::size_t s = 0; s < m.k(); ++s) {
    for (std::size_t a = 0; a < m.size(s); ++a) {
      if (!masses_balanced(sums[s][a], m.masses(s)[a])) {
        throw ValidationError("marginal mismatch on side " + std::to_string(s) + " atom " + std::to_string(a));
      }
    }
  }
}

KSolveReport solve_k_transport(const KMarket& m, const CostSpec& c, std::int64_t max_iterations) {
  detail::CostShape shape = detail::shape_of(m.utility_range(), c);
  std::vector<long double> cost(m.cells());
  for (std::size_t cell = 0; cell < m.cells(); ++cell) {
    cost[cell] = detail::working_value<long double>(shape, m.utility(cell));
  }
  KRows rows(m);
  IncidenceLp lp = rows.build(m);
  LpResult res = lp.solve(cost, {}, max_iterations);
  if (res.status == LpStatus::kIterationLimit) throw SolverError("k-marginal simplex hit its iteration cap");
  if (res.status == LpStatus::kInfeasible) throw SolverError("k-marginal program reported infeasible");

  KSolveReport r;
  r.alpha = c.effective_alpha();
  r.iterations = res.iterations;
  r.degenerate_pivots = res.degenerate_pivots;
  r.coupling.total_mass = m.total_mass();
  long double objective = 0.0L;
  for (std::size_t cell = 0; cell < m.cells(); ++cell) {
    double q = static_cast<double>(res.x[cell]);
    if (q <= 0.0) continue;
    r.coupling.entries.push_back({m.index_of(cell), q});
    objective += res.x[cell] * detail::original_cost(c, m.utility(cell));
  }
  r.objective = static_cast<double>(objective);
  return r;
}

KStabilityResult k_stability(const KCoupling& c, const KMarket& m, std::uint64_t samples, std::uint64_t seed) {
  std::vector<std::size_t> sup = support_entries(c);
  if (sup.empty()) throw ValidationError("coupling has empty support");
  const std::size_t k = m.k();
  std::vector<double> own(sup.size());
  for (std::size_t e = 0; e < sup.size(); ++e) own[e] = m.utility(c.entries[sup[e]].index);

  KStabilityResult r;
  std::vector<std::size_t> pick(k, 0), idx(k);
  auto evaluate = [&] {
    double best_own = own[pick[0]];
    for (std::size_t s = 0; s < k; ++s) {
      idx[s] = c.entries[sup[pick[s]]].index[s];
      best_own = std::max(best_own, own[pick[s]]);
    }
    double gap = m.utility(idx) - best_own;
    ++r.evaluated;
    if (gap > r.gap) {
      r.gap = gap;
      r.witness.clear();
      for (std::size_t s = 0; s < k; ++s) r.witness.push_back(sup[pick[s]]);
    }
  };

  double space = std::pow(static_cast<double>(sup.size()), static_cast<double>(k));
  r.exhaustive = sup.size() <= 30;
  if (r.exhaustive) {
    for (;;) {
      evaluate();
      std::size_t s = k;
      while (s > 0) {
        --s;
        if (++pick[s] < sup.size()) break;
        pick[s] = 0;
        if (s == 0) {
          r.coverage = 1.0;
          return r;
        }
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> any(0, sup.size() - 1);
  for (std::uint64_t t = 0; t < samples; ++t) {
    for (std::size_t s = 0; s < k; ++s) pick[s] = any(rng);
    evaluate();
  }
  r.coverage = std::min(1.0, static_cast<double>(r.evaluated) / space);
  return r;
}

double k_stability_gap(const KCoupling& c, const KMarket& m) { return k_stability(c, m).gap; }

double k_welfare(const KCoupling& c, const KMarket& m) {
  long double w = 0.0L;
  for (const auto& e : c.entries) w += static_cast<long double>(e.mass) * m.utility(e.index);
  return static_cast<double>(w);
}

double k_egalitarian_bound(const KMarket& m) {
  std::vector<double> levels = m.utility_tensor();
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  KRows rows(m);
  IncidenceLp lp = rows.build(m);
  auto feasible = [&](double lambda) {
    std::vector<bool> allowed(m.cells());
    for (std::size_t cell = 0; cell < m.cells(); ++cell) allowed[cell] = m.utility(cell) >= lambda;
    return lp.solve({}, allowed).status == LpStatus::kOptimal;
  };
  // levels.front() is always feasible: every cell is allowed.
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo + 1) / 2;
    if (feasible(levels[mid])) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return levels[lo];
}

double k_egalitarian_eps(const KCoupling& c, const KMarket& m, double u_min_star) {
  std::vector<std::pair<double, double>> um;
  for (std::size_t e : support_entries(c)) um.emplace_back(m.utility(c.entries[e].index), c.entries[e].mass);
  return egalitarian_eps_scan(um, u_min_star);
}

KWelfareBoundResult k_welfare_bound_check(const KCoupling& c, const KMarket& m, double eps) {
  if (!(eps >= 0)) throw ValidationError("eps must be >= 0");
  double u_lo = m.utility_range().first;
  double total = m.total_mass();
  double k = static_cast<double>(m.k());
  KSolveReport best = solve_k_transport(m, CostSpec::neg_utility());
  KWelfareBoundResult r;
  r.welfare = k_welfare(c, m) / total - u_lo;
  r.welfare_star = k_welfare(best.coupling, m) / total - u_lo;
  r.welfare_margin = r.welfare - (r.welfare_star - eps) / k;
  double scale = std::max(1.0, std::abs(r.welfare_star));
  r.welfare_ok = r.welfare_margin >= -1e-9 * scale;
  r.egalitarian_eps = k_egalitarian_eps(c, m, k_egalitarian_bound(m));
  r.egalitarian_margin = std::max(1.0 / k, eps) - r.egalitarian_eps;
  r.egalitarian_ok = r.egalitarian_margin >= -1e-9;
  return r;
}

AuditReport k_audits(const KCoupling& c, const KMarket& m, double eps) {
  AuditReport a;
  a.stability_gap = k_stability_gap(c, m);
  a.welfare = k_welfare(c, m);
  a.u_min_star = k_egalitarian_bound(m);
  a.egalitarian_eps = k_egalitarian_eps(c, m, a.u_min_star);
  KWelfareBoundResult w = k_welfare_bound_check(c, m, eps);
  a.welfare_bound_ok = w.welfare_ok && w.egalitarian_ok;
  return a;
}

KCoupling assignment_coupling(const KMarket& m, const KAssignment& a) {
  KCoupling c;
  c.total_mass = m.total_mass();
  std::size_t n = m.size(0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> idx{i};
    for (const auto& p : a.perms) idx.push_back(p[i]);
    c.entries.push_back({std::move(idx), m.masses(0)[i]});
  }
  return c;
}

KBruteForceResult k_brute_force(const KMarket& m) {
  const std::size_t n = m.size(0), k = m.k();
  double q = m.masses(0)[0];
  for (std::size_t s = 0; s < k; ++s) {
    if (m.size(s) != n) throw ValidationError("brute force needs the same atom count on every side");
    for (double v : m.masses(s)) {
      if (!masses_balanced(v, q)) throw ValidationError("brute force needs equal atom masses");
    }
  }
  double per_side = std::tgamma(static_cast<double>(n) + 1.0);
  if (std::pow(per_side, static_cast<double>(k - 1)) > 1e6) throw ValidationError("brute force instance too large");

  std::vector<std::size_t> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  KBruteForceResult r;
  KAssignment cur;
  cur.perms.assign(k - 1, identity);
  double scale = 1.0;
  for (double u : m.utility_tensor()) scale = std::max(scale, std::abs(u));
  for (;;) {
    KCoupling c = assignment_coupling(m, cur);
    cur.welfare = k_welfare(c, m);
    cur.stable = k_stability(c, m).gap <= 1e-12 * scale;
    r.assignments.push_back(cur);
    std::size_t s = k - 1;
    bool advanced = false;
    while (s > 0) {
      --s;
      if (std::next_permutation(cur.perms[s].begin(), cur.perms[s].end())) {
        advanced = true;
        break;
      }
    }
    if (!advanced) break;
  }
  for (std::size_t a = 1; a < r.assignments.size(); ++a) {
    if (r.assignments[a].welfare > r.assignments[r.best].welfare) r.best = a;
  }
  return r;
}

double size_mismatch_quality(const SizePoint& a, const SizePoint& b) {
  return -(std::abs(a[1] - b[0]) + std::abs(b[1] - a[0])) / 2.0;
}

KMarket organ_exchange_market(const std::vector<OrganType>& types, const std::vector<OrganEdge>& edges,
                              const OrganOptions& options) {
  const std::size_t k = types.size();
  if (k < 2) throw ValidationError("organ exchange needs at least two types");
  if (!(options.penalty > 0)) throw ValidationError("penalty M must be positive");
  std::vector<std::vector<const OrganEdge*>> edge_of(k, std::vector<const OrganEdge*>(k, nullptr));
  for (const auto& e : edges) {
    if (e.a >= k || e.b >= k || e.a == e.b) throw ValidationError("compatibility edge names an unknown type");
    if (!e.quality) throw ValidationError("compatibility edge lacks a quality map");
    if (edge_of[e.a][e.b]) throw ValidationError("duplicate compatibility edge");
    edge_of[e.a][e.b] = edge_of[e.b][e.a] = &e;
  }
  double finest = 0.0, total = 0.0, heaviest = 0.0;
  std::vector<double> real(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    if (types[t].atoms.size() != types[t].masses.size()) throw ValidationError("organ atoms and masses differ in length");
    for (double q : types[t].masses) {
      if (!(q > 0)) throw ValidationError("masses must be positive");
      finest = finest == 0.0 ? q : std::min(finest, q);
      real[t] += q;
    }
    total += real[t];
    heaviest = std::max(heaviest, real[t]);
  }
  double target = options.padding == DummyPadding::kToTotal ? total : heaviest;

  std::vector<std::vector<double>> masses(k);
  std::vector<std::vector<bool>> dummies(k);
  for (std::size_t t = 0; t < k; ++t) {
    masses[t] = types[t].masses;
    dummies[t].assign(masses[t].size(), false);
    double need = target - real[t];
    if (need <= kMassTolerance * std::max(1.0, target)) continue;
    if (options.split_dummies && finest > 0) {
      auto copies = static_cast<std::size_t>(std::floor(need / finest + 1e-9));
      for (std::size_t c = 0; c < copies; ++c) masses[t].push_back(finest);
      double rest = need - static_cast<double>(copies) * finest;
      if (rest > kMassTolerance * std::max(1.0, target)) masses[t].push_back(rest);
    } else {
      masses[t].push_back(need);
    }
    dummies[t].resize(masses[t].size(), true);
  }

  auto u = [&](std::span<const std::size_t> idx) {
    std::size_t real_count = 0, first = 0, second = 0;
    for (std::size_t t = 0; t < k; ++t) {
      if (dummies[t][idx[t]]) continue;
      if (real_count == 0) first = t;
      if (real_count == 1) second = t;
      ++real_count;
    }
    if (real_count <= 1) return 0.0;
    if (real_count == 2 && edge_of[first][second]) {
      const OrganEdge& e = *edge_of[first][second];
      const SizePoint& pa = types[e.a].atoms[idx[e.a]];
      const SizePoint& pb = types[e.b].atoms[idx[e.b]];
      return e.quality(pa, pb);
    }
    return -options.penalty;
  };
  std::vector<std::vector<bool>> flags = dummies;  // u reads dummies while the tensor is filled
  return KMarket::from_function(std::move(masses), u, std::move(flags));
}

}  // namespace matchport
