#pragma once

// Random market generators and small reference implementations used as
// oracles. Nothing here calls into the library's solvers or audits.

#include "matchport/market.hpp"
#include "matchport/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace testing_support {

using matchport::Coupling;
using matchport::DenseMatrix;
using matchport::DiscreteMarket;
using matchport::Rational;
using matchport::UtilitySpec;

inline constexpr double kTol = 1e-9;

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
};

inline std::vector<double> unit_masses(Rng& rng, std::size_t n) {
  std::vector<double> m(n);
  for (auto& v : m) v = rng.uniform(0.2, 1.0);
  double s = std::accumulate(m.begin(), m.end(), 0.0);
  for (auto& v : m) v /= s;
  return m;
}

inline std::vector<double> equal_masses(std::size_t n, double total = 1.0) {
  return std::vector<double>(n, total / static_cast<double>(n));
}

// Random points in [0,1]^dim with unit mass per side and -||x - y||_2 utility.
inline DiscreteMarket random_point_market(Rng& rng, std::size_t nx, std::size_t ny, std::size_t dim, bool equal = false) {
  std::vector<std::vector<double>> xs(nx, std::vector<double>(dim)), ys(ny, std::vector<double>(dim));
  for (auto& p : xs) {
    for (auto& v : p) v = rng.uniform();
  }
  for (auto& p : ys) {
    for (auto& v : p) v = rng.uniform();
  }
  auto mx = equal ? equal_masses(nx) : unit_masses(rng, nx);
  auto my = equal ? equal_masses(ny) : unit_masses(rng, ny);
  return DiscreteMarket(xs, mx, ys, my, UtilitySpec::neg_distance(dim));
}

inline DenseMatrix<double> random_table(Rng& rng, std::size_t nx, std::size_t ny, double lo = -1.0, double hi = 1.0) {
  DenseMatrix<double> t(nx, ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) t(i, j) = rng.uniform(lo, hi);
  }
  return t;
}

// Distinct utilities: a shuffle of {0, 1, ..., n*m - 1} / (n*m), so the
// smallest gap is 1 / (n*m) and stable_limit stays within the exponent guard.
inline DenseMatrix<double> random_distinct_table(Rng& rng, std::size_t nx, std::size_t ny) {
  std::vector<double> v(nx * ny);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(k) / static_cast<double>(v.size());
  std::shuffle(v.begin(), v.end(), rng.gen);
  DenseMatrix<double> t(nx, ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) t(i, j) = v[i * ny + j];
  }
  return t;
}

inline DiscreteMarket table_market(const DenseMatrix<double>& t, std::vector<double> mx, std::vector<double> my) {
  return DiscreteMarket(std::move(mx), std::move(my), UtilitySpec::table(t));
}

// Utility lookup that does not go through the market class.
inline DenseMatrix<double> utility_matrix(const DiscreteMarket& m) {
  DenseMatrix<double> u(m.nx(), m.ny());
  for (std::size_t i = 0; i < m.nx(); ++i) {
    for (std::size_t j = 0; j < m.ny(); ++j) {
      if (m.has_points()) {
        double s = 0.0;
        for (std::size_t d = 0; d < m.x_atoms()[i].size(); ++d) {
          double diff = m.x_atoms()[i][d] - m.y_atoms()[j][d];
          s += diff * diff;
        }
        u(i, j) = -std::sqrt(s);
      } else {
        u(i, j) = m.utility_spec().values()(i, j);
      }
    }
  }
  return u;
}

inline std::vector<Coupling::Entry> support_of(const Coupling& c) {
  std::vector<Coupling::Entry> s;
  for (const auto& e : c.entries) {
    if (e.mass > 1e-12 * c.total_mass) s.push_back(e);
  }
  return s;
}

// max over ordered support pairs of u(x1,y2) - max(u(x1,y1), u(x2,y2)), clipped at 0.
inline double gap_oracle(const Coupling& c, const DenseMatrix<double>& u) {
  auto s = support_of(c);
  double g = 0.0;
  for (const auto& a : s) {
    for (const auto& b : s) {
      g = std::max(g, u(a.x, b.y) - std::max(u(a.x, a.y), u(b.x, b.y)));
    }
  }
  return g;
}

inline double welfare_oracle(const Coupling& c, const DenseMatrix<double>& u) {
  double w = 0.0;
  for (const auto& e : c.entries) w += e.mass * u(e.x, e.y);
  return w;
}

// Smallest eps >= 0 with mass{u < u_star - eps} <= eps * total. The feasible
// set is closed on the left, so its minimum is a jump point of the mass
// function or a value that mass function takes.
inline double egal_eps_oracle(const std::vector<std::pair<double, double>>& um, double u_star, double total) {
  auto below = [&](double eps) {
    double s = 0.0;
    for (const auto& [u, m] : um) {
      if (u < u_star - eps) s += m;
    }
    return s / total;
  };
  std::vector<double> cands{0.0};
  for (const auto& [u, m] : um) {
    if (u_star - u > 0) cands.push_back(u_star - u);
  }
  std::size_t jumps = cands.size();
  for (std::size_t i = 0; i < jumps; ++i) cands.push_back(below(cands[i]));
  std::sort(cands.begin(), cands.end());
  for (double e : cands) {
    if (e >= 0 && below(e) <= e + 1e-15) return e;
  }
  return cands.back();
}

inline double egal_eps_oracle(const Coupling& c, const DenseMatrix<double>& u, double u_star) {
  std::vector<std::pair<double, double>> um;
  for (const auto& e : support_of(c)) um.push_back({u(e.x, e.y), e.mass});
  return egal_eps_oracle(um, u_star, c.total_mass);
}

// Edmonds-Karp on doubles; enough for the bottleneck oracle at n <= 12.
inline double max_flow(std::vector<std::vector<double>> cap, std::size_t s, std::size_t t) {
  const std::size_t n = cap.size();
  double flow = 0.0;
  for (;;) {
    std::vector<std::size_t> parent(n, n);
    parent[s] = s;
    std::vector<std::size_t> queue{s};
    for (std::size_t h = 0; h < queue.size() && parent[t] == n; ++h) {
      std::size_t v = queue[h];
      for (std::size_t w = 0; w < n; ++w) {
        if (parent[w] == n && cap[v][w] > 1e-13) {
          parent[w] = v;
          queue.push_back(w);
        }
      }
    }
    if (parent[t] == n) return flow;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = t; v != s; v = parent[v]) push = std::min(push, cap[parent[v]][v]);
    for (std::size_t v = t; v != s; v = parent[v]) {
      cap[parent[v]][v] -= push;
      cap[v][parent[v]] += push;
    }
    flow += push;
  }
}

// Largest utility level lambda such that edges with u >= lambda carry all mass.
inline double bottleneck_oracle(const DenseMatrix<double>& u, const std::vector<double>& mx, const std::vector<double>& my) {
  const std::size_t nx = mx.size(), ny = my.size();
  std::vector<double> levels(u.data());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  double total = std::accumulate(mx.begin(), mx.end(), 0.0);
  auto feasible = [&](double lambda) {
    std::size_t n = nx + ny + 2, s = nx + ny, t = nx + ny + 1;
    std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < nx; ++i) cap[s][i] = mx[i];
    for (std::size_t j = 0; j < ny; ++j) cap[nx + j][t] = my[j];
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        if (u(i, j) >= lambda) cap[i][nx + j] = total;
      }
    }
    return max_flow(cap, s, t) >= total * (1.0 - 1e-9);
  };
  double best = levels.front();
  for (double l : levels) {
    if (feasible(l)) best = l;
  }
  return best;
}

struct PermutationInfo {
  std::vector<std::size_t> perm;
  double welfare = 0.0;
  double min_utility = 0.0;
  bool stable = false;
};

// All n! matchings of an n x n market with equal masses 1/n.
inline std::vector<PermutationInfo> enumerate_permutations(const DenseMatrix<double>& u) {
  const std::size_t n = u.rows();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::vector<PermutationInfo> out;
  do {
    PermutationInfo info{p, 0.0, std::numeric_limits<double>::infinity(), true};
    for (std::size_t i = 0; i < n; ++i) {
      info.welfare += u(i, p[i]) / static_cast<double>(n);
      info.min_utility = std::min(info.min_utility, u(i, p[i]));
    }
    for (std::size_t a = 0; a < n && info.stable; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (u(a, p[b]) > std::max(u(a, p[a]), u(b, p[b]))) {
          info.stable = false;
          break;
        }
      }
    }
    out.push_back(info);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

inline Coupling permutation_to_coupling(const std::vector<std::size_t>& p, double total = 1.0) {
  Coupling c;
  c.total_mass = total;
  for (std::size_t i = 0; i < p.size(); ++i) c.entries.push_back({i, p[i], total / static_cast<double>(p.size())});
  return c;
}

// Repeatedly match the free pair with the highest utility.
inline std::vector<std::size_t> greedy_oracle(const DenseMatrix<double>& u) {
  const std::size_t n = u.rows();
  std::vector<std::size_t> p(n, n);
  std::vector<bool> used(n, false);
  for (std::size_t round = 0; round < n; ++round) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (p[i] != n) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!used[j] && u(i, j) > best) {
          best = u(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    p[bi] = bj;
    used[bj] = true;
  }
  return p;
}

inline std::vector<std::size_t> coupling_to_permutation(const Coupling& c, std::size_t n) {
  std::vector<std::size_t> p(n, n);
  for (const auto& e : support_of(c)) p[e.x] = e.y;
  return p;
}

inline Rational R(const char* s) { return matchport::parse_rational(s); }

}  // namespace testing_support
