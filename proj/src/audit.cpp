#include "matchport/audit.hpp"

#include "matchport/maxflow.hpp"
#include "matchport/ot_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

namespace matchport {

double stability_bound(double alpha, std::size_t k) {
  if (!(alpha > 0)) throw ValidationError("stability bound needs alpha > 0");
  return std::log(static_cast<double>(k)) / alpha;
}

double egalitarian_eps_bound(double alpha) {
  if (!(alpha < 0)) throw ValidationError("egalitarian bound needs alpha < 0");
  double a = std::abs(alpha);
  return std::max(1.0, std::log(a)) / a;
}

std::optional<double> theoretical_eps(double alpha, std::size_t k) {
  if (alpha > 0) return stability_bound(alpha, k);
  if (alpha < 0) return egalitarian_eps_bound(alpha);
  return std::nullopt;
}

Coupling support(const Coupling& c) {
  Coupling out;
  out.total_mass = c.total_mass;
  double cut = kSupportTolerance * c.total_mass;
  for (const auto& e : c.entries) {
    if (e.mass > cut) out.entries.push_back(e);
  }
  return out;
}

std::optional<BlockingPair> worst_blocking_pair(const Coupling& c, const DiscreteMarket& m) {
  Coupling s = support(c);
  if (s.entries.empty()) throw ValidationError("coupling has empty support");
  std::vector<double> own(s.entries.size());
  for (std::size_t k = 0; k < s.entries.size(); ++k) own[k] = m.utility(s.entries[k].x, s.entries[k].y);
  std::optional<BlockingPair> best;
  for (std::size_t a = 0; a < s.entries.size(); ++a) {
    for (std::size_t b = 0; b < s.entries.size(); ++b) {
      if (a == b) continue;
      double gap = m.utility(s.entries[a].x, s.entries[b].y) - std::max(own[a], own[b]);
      if (gap > 0 && (!best || gap > best->gap)) best = BlockingPair{a, b, gap};
    }
  }
  // Report indices into the caller's coupling, not the filtered copy.
  if (best) {
    auto locate = [&](std::size_t k) {
      const auto& e = s.entries[k];
      for (std::size_t i = 0; i < c.entries.size(); ++i) {
        if (c.entries[i].x == e.x && c.entries[i].y == e.y) return i;
      }
      return k;
    };
    best->first = locate(best->first);
    best->second = locate(best->second);
  }
  return best;
}

double stability_gap(const Coupling& c, const DiscreteMarket& m) {
  auto w = worst_blocking_pair(c, m);
  return w ? w->gap : 0.0;
}

double welfare(const Coupling& c, const DiscreteMarket& m) {
  double w = 0.0;
  for (const auto& e : c.entries) w += e.mass * m.utility(e.x, e.y);
  return w;
}

namespace {

bool bottleneck_feasible(const DiscreteMarket& m, double lambda, double total) {
  std::size_t nx = m.nx(), ny = m.ny();
  std::size_t s = nx + ny, t = nx + ny + 1;
  MaxFlow flow(nx + ny + 2, 1e-15 * std::max(1.0, total));
  for (std::size_t i = 0; i < nx; ++i) flow.add_edge(s, i, m.x_masses()[i]);
  for (std::size_t j = 0; j < ny; ++j) flow.add_edge(nx + j, t, m.y_masses()[j]);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (m.utility(i, j) >= lambda) flow.add_edge(i, nx + j, total);
    }
  }
  return flow.run(s, t) >= total * (1.0 - 1e-9);
}

}  // namespace

double egalitarian_bound(const DiscreteMarket& m) {
  std::vector<double> values;
  values.reserve(m.nx() * m.ny());
  for (std::size_t i = 0; i < m.nx(); ++i) {
    for (std::size_t j = 0; j < m.ny(); ++j) values.push_back(m.utility(i, j));
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  double total = 0.0;
  for (double v : m.x_masses()) total += v;
  // The smallest value is always feasible (complete bipartite graph).
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo + 1) / 2;
    if (bottleneck_feasible(m, values[mid], total)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return values[lo];
}

double egalitarian_eps_scan(std::span<const std::pair<double, double>> utility_mass, double u_min_star) {
  if (std::isinf(u_min_star) && u_min_star < 0) return 0.0;
  double total = 0.0;
  std::vector<std::pair<double, double>> deficits;  // (deficit, mass), deficit > 0
  for (const auto& [u, q] : utility_mass) {
    total += q;
    double d = u_min_star - u;
    if (d > 0) deficits.emplace_back(d, q);
  }
  if (deficits.empty() || total <= 0) return 0.0;
  std::sort(deficits.begin(), deficits.end());
  // On [prev, d_k) the violating mass F is constant; the smallest feasible
  // eps in that stretch is max(prev, F / total).
  double tail = 0.0;
  for (const auto& d : deficits) tail += d.second;
  double prev = 0.0;
  std::size_t k = 0;
  while (k < deficits.size()) {
    double candidate = std::max(prev, tail / total);
    if (candidate < deficits[k].first) return candidate;
    double level = deficits[k].first;
    while (k < deficits.size() && deficits[k].first == level) {
      tail -= deficits[k].second;
      ++k;
    }
    prev = level;
  }
  return prev;
}

double egalitarian_eps(const Coupling& c, const DiscreteMarket& m, double u_min_star) {
  std::vector<std::pair<double, double>> um;
  for (const auto& e : support(c).entries) um.emplace_back(m.utility(e.x, e.y), e.mass);
  return egalitarian_eps_scan(um, u_min_star);
}

WelfareBoundResult welfare_bound_check(const Coupling& c, const DiscreteMarket& m, double eps) {
  if (!(eps >= 0)) throw ValidationError("eps must be >= 0");
  auto [u_lo, u_hi] = m.utility_range();
  if (!std::isfinite(u_lo) || !std::isfinite(u_hi)) throw ValidationError("utility unbounded below");
  double total = m.total_mass();
  SolveReport best = solve_transport(m, CostSpec::neg_utility());
  WelfareBoundResult r;
  r.welfare = welfare(c, m) / total - u_lo;
  r.welfare_star = welfare(best.coupling, m) / total - u_lo;
  r.welfare_margin = r.welfare - 0.5 * (r.welfare_star - eps);
  r.welfare_ok = r.welfare_margin >= -1e-9 * std::max(1.0, std::abs(r.welfare_star));
  r.egalitarian_eps = egalitarian_eps(c, m, egalitarian_bound(m));
  r.egalitarian_margin = std::max(0.5, eps) - r.egalitarian_eps;
  r.egalitarian_ok = r.egalitarian_margin >= -1e-9;
  return r;
}

MarketBaseline market_baseline(const DiscreteMarket& m) {
  MarketBaseline b;
  b.u_min_star = egalitarian_bound(m);
  b.welfare_star = welfare(solve_transport(m, CostSpec::neg_utility()).coupling, m);
  b.u_lo = m.utility_range().first;
  return b;
}

AuditReport audit_coupling(const Coupling& c, const DiscreteMarket& m, const MarketBaseline& base,
                           std::optional<double> alpha) {
  AuditReport r;
  r.stability_gap = stability_gap(c, m);
  r.welfare = welfare(c, m);
  r.u_min_star = base.u_min_star;
  r.egalitarian_eps = egalitarian_eps(c, m, base.u_min_star);
  double total = m.total_mass();
  double w = r.welfare / total - base.u_lo;
  double w_star = base.welfare_star / total - base.u_lo;
  bool welfare_ok = w - 0.5 * (w_star - r.stability_gap) >= -1e-9 * std::max(1.0, std::abs(w_star));
  bool egal_ok = r.egalitarian_eps <= std::max(0.5, r.stability_gap) + 1e-9;
  r.welfare_bound_ok = welfare_ok && egal_ok;
  r.alpha = alpha;
  if (alpha) r.theoretical_eps = theoretical_eps(*alpha);
  return r;
}

namespace {

std::vector<std::tuple<double, std::size_t, std::size_t>> pairs_by_utility(const DiscreteMarket& m) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> order;
  order.reserve(m.nx() * m.ny());
  for (std::size_t i = 0; i < m.nx(); ++i) {
    for (std::size_t j = 0; j < m.ny(); ++j) order.emplace_back(m.utility(i, j), i, j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  return order;
}

}  // namespace

Coupling greedy_matching(const DiscreteMarket& m) {
  std::vector<double> rx = m.x_masses(), ry = m.y_masses();
  Coupling out;
  out.total_mass = m.total_mass();
  double eps = kSupportTolerance * std::max(1.0, out.total_mass);
  for (const auto& [u, i, j] : pairs_by_utility(m)) {
    double q = std::min(rx[i], ry[j]);
    if (q <= eps) continue;
    out.entries.push_back({i, j, q});
    rx[i] -= q;
    ry[j] -= q;
  }
  return out;
}

Coupling permutation_coupling(const DiscreteMarket& m, const Permutation& p) {
  Coupling c;
  c.total_mass = m.total_mass();
  for (std::size_t i = 0; i < p.size(); ++i) c.entries.push_back({i, p[i], m.x_masses()[i]});
  return c;
}

BruteForceResult brute_force_oracle(const DiscreteMarket& m) {
  std::size_t n = m.nx();
  if (m.ny() != n) throw ValidationError("brute force needs equal atom counts");
  if (n > kBruteForceMaxAtoms) throw ValidationError("brute force is limited to 8 atoms per side");
  double unit = m.x_masses()[0];
  for (double v : m.x_masses()) {
    if (!masses_balanced(v, unit)) throw ValidationError("brute force needs equal masses");
  }
  for (double v : m.y_masses()) {
    if (!masses_balanced(v, unit)) throw ValidationError("brute force needs equal masses");
  }
  std::vector<double> u(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) u[i * n + j] = m.utility(i, j);
  }
  BruteForceResult r;
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  bool first = true;
  do {
    double w = 0.0, lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      w += unit * u[i * n + p[i]];
      lo = std::min(lo, u[i * n + p[i]]);
    }
    bool stable = true;
    for (std::size_t a = 0; a < n && stable; ++a) {
      for (std::size_t b = 0; b < n && stable; ++b) {
        if (a != b && u[a * n + p[b]] > std::max(u[a * n + p[a]], u[b * n + p[b]])) stable = false;
      }
    }
    if (stable) r.stable_set.push_back(p);
    if (first || w > r.welfare_opt_value) {
      r.welfare_opt_value = w;
      r.welfare_opt = p;
    }
    if (first || lo > r.bottleneck_value) {
      r.bottleneck_value = lo;
      r.bottleneck_opt = p;
    }
    first = false;
  } while (std::next_permutation(p.begin(), p.end()));

  r.greedy.assign(n, 0);
  std::vector<char> used_x(n, 0), used_y(n, 0);
  for (const auto& [val, i, j] : pairs_by_utility(m)) {
    if (used_x[i] || used_y[j]) continue;
    used_x[i] = used_y[j] = 1;
    r.greedy[i] = j;
  }
  r.greedy_is_stable = std::find(r.stable_set.begin(), r.stable_set.end(), r.greedy) != r.stable_set.end();
  return r;
}

}  // namespace matchport

namespace matchport {

namespace {

bool interlaced(double x1, double y1, double x2, double y2) {
  if (x1 == x2 || y1 == y2) return false;
  double a1 = std::min(x1, y1), b1 = std::max(x1, y1);
  double a2 = std::min(x2, y2), b2 = std::max(x2, y2);
  double tol = 1e-12 * std::max({1.0, std::abs(a1), std::abs(b1), std::abs(a2), std::abs(b2)});
  return (a1 < a2 - tol && a2 < b1 - tol && b1 < b2 - tol) || (a2 < a1 - tol && a1 < b2 - tol && b2 < b1 - tol);
}

}  // namespace

std::vector<CrossingViolation> no_crossing_check(const LineMatching<double>& lm, std::size_t samples) {
  if (samples < 2) throw ValidationError("no_crossing_check needs samples >= 2");
  std::size_t interior = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
  std::vector<std::vector<std::pair<double, double>>> pts;
  for (const auto& p : lm.monge_pieces) {
    std::vector<std::pair<double, double>> v;
    v.emplace_back(p.lo, p.map(p.lo));
    for (std::size_t k = 1; k <= interior; ++k) {
      double x = p.lo + (p.hi - p.lo) * static_cast<double>(k) / static_cast<double>(interior + 1);
      v.emplace_back(x, p.map(x));
    }
    v.emplace_back(p.hi, p.map(p.hi));
    pts.push_back(std::move(v));
  }
  std::vector<CrossingViolation> out;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a; b < pts.size(); ++b) {
      for (std::size_t i = 0; i < pts[a].size(); ++i) {
        for (std::size_t j = (a == b ? i + 1 : 0); j < pts[b].size(); ++j) {
          const auto& [x1, y1] = pts[a][i];
          const auto& [x2, y2] = pts[b][j];
          if (interlaced(x1, y1, x2, y2)) out.push_back({x1, y1, x2, y2});
        }
      }
    }
  }
  return out;
}

std::vector<CrossingViolation> no_crossing_check(const Coupling& c, const DiscreteMarket& m) {
  if (!m.has_points() || m.utility_spec().dim() != 1) throw ValidationError("no_crossing_check needs a 1-D market");
  Coupling s = support(c);
  std::vector<CrossingViolation> out;
  for (std::size_t a = 0; a < s.entries.size(); ++a) {
    double x1 = m.x_atoms()[s.entries[a].x][0], y1 = m.y_atoms()[s.entries[a].y][0];
    for (std::size_t b = a + 1; b < s.entries.size(); ++b) {
      double x2 = m.x_atoms()[s.entries[b].x][0], y2 = m.y_atoms()[s.entries[b].y][0];
      if (interlaced(x1, y1, x2, y2)) out.push_back({x1, y1, x2, y2});
    }
  }
  return out;
}

}  // namespace matchport
