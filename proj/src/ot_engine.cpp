#include "matchport/ot_engine.hpp"

#include "matchport/network_simplex.hpp"
#include "cost_shape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>
#include <thread>

namespace matchport {

namespace {

using detail::CostShape;
using detail::original_cost;
using detail::shape_of;
using detail::working_value;

template <class W>
SolveReport run_simplex(const DiscreteMarket& m, const CostShape& s, const SolveOptions& options, int digits) {
  std::size_t nx = m.nx(), ny = m.ny();
  std::vector<W> supply(nx), demand(ny), cost(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) supply[i] = W(m.x_masses()[i]);
  for (std::size_t j = 0; j < ny; ++j) demand[j] = W(m.y_masses()[j]);
  // Masses must balance exactly in the pivoting arithmetic; put the float
  // residue on the heaviest demand atom.
  W sx(0), sy(0);
  for (const W& v : supply) sx += v;
  for (const W& v : demand) sy += v;
  std::size_t heavy = static_cast<std::size_t>(std::max_element(demand.begin(), demand.end()) - demand.begin());
  demand[heavy] += sx - sy;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) cost[i * ny + j] = working_value<W>(s, m.utility(i, j));
  }
  TransportSimplex<W> simplex(std::move(supply), std::move(demand), std::move(cost));
  TransportSolution<W> sol = simplex.solve(options.max_iterations);

  SolveReport r;
  r.mode = ArithmeticMode::kFloat;
  r.working_digits = digits;
  r.alpha = s.cost.effective_alpha();
  r.iterations = sol.iterations;
  r.degenerate_pivots = sol.degenerate_pivots;
  r.coupling.total_mass = m.total_mass();
  long double objective = 0.0L;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      double q = to_double(sol.flow[i * ny + j]);
      if (q > 0.0) {
        r.coupling.entries.push_back({i, j, q});
      }
    }
  }
  for (const auto& e : r.coupling.entries) {
    objective += static_cast<long double>(e.mass) * original_cost(s.cost, m.utility(e.x, e.y));
  }
  r.objective = static_cast<double>(objective);
  r.phi.resize(nx);
  r.psi.resize(ny);
  for (std::size_t i = 0; i < nx; ++i) r.phi[i] = to_double(sol.phi[i]);
  for (std::size_t j = 0; j < ny; ++j) r.psi[j] = to_double(sol.psi[j]);
  return r;
}

}  // namespace

int digits_for_span(double span) {
  if (span <= 8.0) return 0;
  if (span <= 50.0) return 50;
  if (span <= 170.0) return 100;
  if (span <= 400.0) return 200;
  return 340;
}

std::vector<double> working_cost(const DiscreteMarket& m, const CostSpec& c) {
  CostShape s = shape_of(m.utility_range(), c);
  std::vector<double> out(m.nx() * m.ny());
  for (std::size_t i = 0; i < m.nx(); ++i) {
    for (std::size_t j = 0; j < m.ny(); ++j) {
      out[i * m.ny() + j] = static_cast<double>(working_value<long double>(s, m.utility(i, j)));
    }
  }
  return out;
}

SolveReport solve_transport(const DiscreteMarket& m, const CostSpec& c, const SolveOptions& options) {
  CostShape s = shape_of(m.utility_range(), c);
  int digits = options.digits > 0 ? options.digits : digits_for_span(s.span);
  if (digits == 0) return run_simplex<long double>(m, s, options, 0);
  if (digits <= 50) return run_simplex<BigFloat<50>>(m, s, options, 50);
  if (digits <= 100) return run_simplex<BigFloat<100>>(m, s, options, 100);
  if (digits <= 200) return run_simplex<BigFloat<200>>(m, s, options, 200);
  return run_simplex<BigFloat<340>>(m, s, options, 340);
}

ExactSolveReport solve_transport(const ExactDiscreteMarket& m, const CostSpec& c) {
  bool linear = c.family() == CostFamily::kNegUtility || (c.family() == CostFamily::kAlpha && c.alpha_value() == 0.0);
  if (!linear) throw ValidationError("exact mode supports only the neg_utility cost");
  std::size_t nx = m.nx(), ny = m.ny();
  std::vector<Rational> cost(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) cost[i * ny + j] = -m.utility(i, j);
  }
  TransportSimplex<Rational> simplex(m.x_masses(), m.y_masses(), cost);
  TransportSolution<Rational> sol = simplex.solve();
  ExactSolveReport r;
  r.iterations = sol.iterations;
  r.degenerate_pivots = sol.degenerate_pivots;
  r.coupling.total_mass = m.total_mass();
  r.objective = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const Rational& q = sol.flow[i * ny + j];
      if (q > 0) {
        r.coupling.entries.push_back({i, j, q});
        r.objective += q * cost[i * ny + j];
      }
    }
  }
  r.phi = std::move(sol.phi);
  r.psi = std::move(sol.psi);
  return r;
}

namespace {

unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  unsigned n = hw;
  if (requested > 0) n = std::min(n, requested);
  if (const char* env = std::getenv("MATCHPORT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = std::min<unsigned>(n, static_cast<unsigned>(v));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

}  // namespace

std::vector<SweepRow> alpha_sweep(const DiscreteMarket& m, std::span<const double> alphas, unsigned threads) {
  for (double a : alphas) {
    if (!std::isfinite(a)) throw ValidationError("alphas must be finite");
  }
  std::vector<SweepRow> rows(alphas.size());
  MarketBaseline base = market_baseline(m);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < rows.size(); k = next++) {
      SweepRow& row = rows[k];
      row.alpha = alphas[k];
      row.theoretical_eps = theoretical_eps(row.alpha);
      try {
        row.report = solve_transport(m, CostSpec::alpha(row.alpha));
        row.audit = audit_coupling(row.report->coupling, m, base, row.alpha);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };
  unsigned n = worker_count(threads, rows.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return rows;
}

SolveReport stable_limit(const DiscreteMarket& m) {
  double delta = compute_delta(m);
  auto [u_lo, u_hi] = m.utility_range();
  double range = u_hi - u_lo;
  if (delta > 0) {
    double alpha = 2.0 * std::log(2.0) / delta;
    if (alpha * range > kExponentGuard) {
      throw OverflowError("stable limit needs alpha = " + std::to_string(alpha) +
                          ", beyond the overflow guard for this utility range");
    }
    SolveReport r = solve_transport(m, CostSpec::alpha(alpha));
    if (stability_gap(r.coupling, m) != 0.0) throw SolverError("stable limit solution failed its stability audit");
    return r;
  }
  // All gaps vanish: start from the welfare solve and escalate alpha until
  // the audit passes.
  SolveReport r = solve_transport(m, CostSpec::neg_utility());
  double alpha = range > 0 ? 1.0 / range : 1.0;
  while (stability_gap(r.coupling, m) != 0.0) {
    if (alpha * range > kExponentGuard) throw OverflowError("alpha escalation hit the overflow guard");
    r = solve_transport(m, CostSpec::alpha(alpha));
    alpha *= 2.0;
  }
  return r;
}

std::optional<CycleWitness> check_cyclic_monotone(const Coupling& coupling, const DiscreteMarket& m, const CostSpec& c,
                                                  std::size_t n_max, std::size_t samples, std::uint64_t seed) {
  if (n_max < 2) throw ValidationError("n_max must be >= 2");
  std::vector<std::size_t> idx;
  double cut = kSupportTolerance * coupling.total_mass;
  for (std::size_t k = 0; k < coupling.entries.size(); ++k) {
    if (coupling.entries[k].mass > cut) idx.push_back(k);
  }
  const std::size_t s = idx.size();
  if (s < 2) return std::nullopt;
  std::vector<double> w = working_cost(m, c);
  double scale = 1.0;
  for (double v : w) scale = std::max(scale, std::abs(v));
  const double tol = 1e-9 * scale;
  auto cost_at = [&](std::size_t a, std::size_t b) {
    return w[coupling.entries[idx[a]].x * m.ny() + coupling.entries[idx[b]].y];
  };
  auto excess = [&](const std::vector<std::size_t>& cyc) {
    double diag = 0.0, shifted = 0.0;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      diag += cost_at(cyc[k], cyc[k]);
      shifted += cost_at(cyc[k], cyc[(k + 1) % cyc.size()]);
    }
    return diag - shifted;
  };
  // The search runs on the working cost; the witness reports the excess in
  // the cost's own units.
  auto witness = [&](const std::vector<std::size_t>& cyc, double) {
    CycleWitness out;
    long double diag = 0.0L, shifted = 0.0L;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      const auto& a = coupling.entries[idx[cyc[k]]];
      const auto& b = coupling.entries[idx[cyc[(k + 1) % cyc.size()]]];
      diag += detail::original_cost(c, m.utility(a.x, a.y));
      shifted += detail::original_cost(c, m.utility(a.x, b.y));
    }
    out.excess = static_cast<double>(diag - shifted);
    for (std::size_t k : cyc) out.entries.push_back(idx[k]);
    return out;
  };
  std::vector<std::size_t> cyc;
  std::vector<char> used(s, 0);
  // Exhaustive search over cycles whose first element is their smallest.
  std::optional<CycleWitness> found;
  auto dfs = [&](auto&& self, std::size_t len) -> void {
    if (found) return;
    if (cyc.size() == len) {
      double ex = excess(cyc);
      if (ex > tol) found = witness(cyc, ex);
      return;
    }
    for (std::size_t k = cyc[0] + 1; k < s && !found; ++k) {
      if (used[k]) continue;
      used[k] = 1;
      cyc.push_back(k);
      self(self, len);
      cyc.pop_back();
      used[k] = 0;
    }
  };
  const bool exhaustive = s <= 12;
  for (std::size_t len = 2; len <= n_max && !found; ++len) {
    if (len > s) break;
    if (exhaustive || (len == 2 && s <= 3000)) {
      for (std::size_t first = 0; first < s && !found; ++first) {
        cyc.assign(1, first);
        used[first] = 1;
        dfs(dfs, len);
        used[first] = 0;
      }
      continue;
    }
    std::mt19937_64 rng(seed + len);
    std::vector<std::size_t> pool(s);
    for (std::size_t t = 0; t < samples && !found; ++t) {
      std::iota(pool.begin(), pool.end(), 0);
      cyc.clear();
      for (std::size_t k = 0; k < len; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, s - 1);
        std::swap(pool[k], pool[pick(rng)]);
        cyc.push_back(pool[k]);
      }
      double ex = excess(cyc);
      if (ex > tol) found = witness(cyc, ex);
    }
  }
  return found;
}

}  // namespace matchport
