#include "matchport/ordinal.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>

namespace matchport {

namespace {

void densify(std::vector<int>& ranks) {
  std::vector<int> levels = ranks;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int& r : ranks) r = static_cast<int>(std::lower_bound(levels.begin(), levels.end(), r) - levels.begin());
}

struct Edge {
  std::size_t to = 0;
  bool strict = false;
};

// Couple graph: z -> z2 whenever z >= z2 through a shared agent.
std::vector<std::vector<Edge>> couple_graph(const PreferenceProfile& p) {
  const std::size_t nx = p.nx(), ny = p.ny();
  std::vector<std::vector<Edge>> g(nx * ny);
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      std::size_t z = x * ny + y;
      for (std::size_t y2 = 0; y2 < ny; ++y2) {
        if (y2 != y && p.x_weakly_prefers(x, y, y2)) g[z].push_back({x * ny + y2, !p.x_weakly_prefers(x, y2, y)});
      }
      for (std::size_t x2 = 0; x2 < nx; ++x2) {
        if (x2 != x && p.y_weakly_prefers(y, x, x2)) g[z].push_back({x2 * ny + y, !p.y_weakly_prefers(y, x2, x)});
      }
    }
  }
  return g;
}

// Tarjan's algorithm, iterative to stay off the call stack for big profiles.
std::vector<std::size_t> scc_labels(const std::vector<std::vector<Edge>>& g) {
  const std::size_t n = g.size();
  constexpr std::size_t kUnset = SIZE_MAX;
  std::vector<std::size_t> index(n, kUnset), low(n, 0), comp(n, kUnset), stack;
  std::vector<bool> on_stack(n, false);
  std::size_t counter = 0, comps = 0;
  struct Frame {
    std::size_t v, next;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < g[f.v].size()) {
        std::size_t w = g[f.v][f.next++].to;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = comps;
        } while (w != v);
        ++comps;
      }
    }
  }
  return comp;
}

}  // namespace

PreferenceProfile::PreferenceProfile(std::vector<std::vector<int>> x_rank, std::vector<std::vector<int>> y_rank)
    : x_rank_(std::move(x_rank)), y_rank_(std::move(y_rank)) {
  if (x_rank_.empty() || y_rank_.empty()) throw ValidationError("profile needs agents on both sides");
  for (auto& r : x_rank_) {
    if (r.size() != y_rank_.size()) throw ValidationError("every x ranking must cover all of Y exactly once");
    densify(r);
  }
  for (auto& r : y_rank_) {
    if (r.size() != x_rank_.size()) throw ValidationError("every y ranking must cover all of X exactly once");
    densify(r);
  }
}

std::optional<ImprovementCycle> check_acyclicity(const PreferenceProfile& p) {
  const std::size_t ny = p.ny();
  auto g = couple_graph(p);
  std::vector<std::size_t> comp = scc_labels(g);
  for (std::size_t a = 0; a < g.size(); ++a) {
    for (const Edge& e : g[a]) {
      if (!e.strict || comp[e.to] != comp[a]) continue;
      // Shortest path back from e.to to a inside the component closes the cycle.
      std::vector<std::size_t> parent(g.size(), SIZE_MAX);
      std::deque<std::size_t> queue{e.to};
      parent[e.to] = e.to;
      while (!queue.empty() && parent[a] == SIZE_MAX) {
        std::size_t v = queue.front();
        queue.pop_front();
        for (const Edge& f : g[v]) {
          if (comp[f.to] != comp[a] || parent[f.to] != SIZE_MAX) continue;
          parent[f.to] = v;
          queue.push_back(f.to);
        }
      }
      std::vector<std::size_t> path;
      for (std::size_t v = a; v != e.to; v = parent[v]) path.push_back(v);
      path.push_back(e.to);
      std::reverse(path.begin(), path.end());  // e.to ... a
      ImprovementCycle c;
      c.couples.push_back({a / ny, a % ny});
      for (std::size_t k = 0; k + 1 < path.size(); ++k) c.couples.push_back({path[k] / ny, path[k] % ny});
      return c;
    }
  }
  return std::nullopt;
}

bool is_valid_cycle(const PreferenceProfile& p, const ImprovementCycle& c) {
  if (c.couples.size() < 2) return false;
  bool strict = false;
  for (std::size_t k = 0; k < c.couples.size(); ++k) {
    const Couple& a = c.couples[k];
    const Couple& b = c.couples[(k + 1) % c.couples.size()];
    if (a.x >= p.nx() || a.y >= p.ny() || b.x >= p.nx() || b.y >= p.ny()) return false;
    if ((a.x == b.x) == (a.y == b.y)) return false;  // exactly one shared agent
    if (a.x == b.x) {
      if (!p.x_weakly_prefers(a.x, a.y, b.y)) return false;
      strict = strict || !p.x_weakly_prefers(a.x, b.y, a.y);
    } else {
      if (!p.y_weakly_prefers(a.y, a.x, b.x)) return false;
      strict = strict || !p.y_weakly_prefers(a.y, b.x, a.x);
    }
  }
  return strict;
}

DenseMatrix<Rational> build_potential(const PreferenceProfile& p) {
  if (check_acyclicity(p)) throw ValidationError("profile has a strict improvement cycle; no potential exists");
  const std::size_t n = p.nx() * p.ny();
  const std::size_t words = (n + 63) / 64;
  using Row = std::vector<std::uint64_t>;
  std::vector<Row> reach(n, Row(words, 0));
  auto set = [&](std::size_t a, std::size_t b) { reach[a][b / 64] |= std::uint64_t{1} << (b % 64); };
  auto test = [&](const std::vector<Row>& r, std::size_t a, std::size_t b) {
    return (r[a][b / 64] >> (b % 64)) & 1U;
  };
  auto g = couple_graph(p);
  for (std::size_t a = 0; a < n; ++a) {
    set(a, a);
    for (const Edge& e : g[a]) set(a, e.to);
  }
  // Repeated squaring: R <- R * R until nothing changes.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<Row> next = reach;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (!test(reach, a, b)) continue;
        for (std::size_t w = 0; w < words; ++w) next[a][w] |= reach[b][w];
      }
      if (next[a] != reach[a]) changed = true;
    }
    reach = std::move(next);
  }
  std::vector<Rational> weight(n);
  Rational w(1);
  for (std::size_t r = 0; r < n; ++r) {
    w /= 2;
    weight[r] = w;
  }
  DenseMatrix<Rational> u(p.nx(), p.ny(), Rational(0));
  for (std::size_t a = 0; a < n; ++a) {
    Rational sum(0);
    for (std::size_t b = 0; b < n; ++b) {
      if (test(reach, a, b)) sum += weight[b];
    }
    u(a / p.ny(), a % p.ny()) = sum;
  }
  return u;
}

}  // namespace matchport
