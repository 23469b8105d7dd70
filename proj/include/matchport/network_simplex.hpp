#pragma once

// Primal network simplex for the balanced transportation problem, on a
// strongly feasible spanning tree rooted at an artificial node. Arc
// selection is block pricing (most negative reduced cost, lowest index on
// ties); the leaving arc follows the strongly feasible rule, which rules out
// cycling on degenerate pivots.

#include "matchport/numeric.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace matchport {

template <class T>
struct TransportSolution {
  std::vector<T> flow;  // row-major nx * ny
  std::vector<T> phi;   // phi_i + psi_j <= c_ij, equality on tree arcs
  std::vector<T> psi;
  std::vector<std::uint8_t> basic;  // transport arcs in the final tree
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
};

template <class T>
class TransportSimplex {
 public:
  TransportSimplex(std::vector<T> supply, std::vector<T> demand, std::vector<T> cost)
      : nx_(supply.size()), ny_(demand.size()), supply_(std::move(supply)), demand_(std::move(demand)) {
    if (cost.size() != nx_ * ny_) throw ValidationError("cost matrix size mismatch");
    if (nx_ == 0 || ny_ == 0) throw ValidationError("empty transport problem");
    T cmin = cost[0], cmax = cost[0];
    for (const T& c : cost) {
      if (c < cmin) cmin = c;
      if (c > cmax) cmax = c;
    }
    cost_shift_ = cmin;
    nodes_ = nx_ + ny_ + 1;
    root_ = nx_ + ny_;
    arcs_ = nx_ * ny_ + nx_ + ny_;
    cost_.resize(arcs_);
    for (std::size_t a = 0; a < nx_ * ny_; ++a) cost_[a] = cost[a] - cmin;
    T n(static_cast<long>(nodes_));
    T art = n * (cmax - cmin + T(1));
    for (std::size_t a = nx_ * ny_; a < arcs_; ++a) cost_[a] = art;
    if constexpr (ScalarTraits<T>::exact) {
      tol_ = T(0);
    } else {
      tol_ = T(8) * std::numeric_limits<T>::epsilon() * n * art;
    }
  }

  TransportSolution<T> solve(std::int64_t max_iterations = 0) {
    init_tree();
    if (max_iterations <= 0) {
      max_iterations = 200 * static_cast<std::int64_t>(nodes_) * static_cast<std::int64_t>(nodes_) + 100000;
    }
    const std::size_t n_transport = nx_ * ny_;
    const std::size_t block = std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(double(n_transport))));
    std::size_t next = 0;
    TransportSolution<T> out;
    for (;;) {
      std::optional<std::size_t> entering;
      T best(0);
      std::size_t scanned = 0;
      std::size_t a = next;
      while (scanned < n_transport) {
        std::size_t stop = std::min(n_transport, scanned + block);
        for (; scanned < stop; ++scanned) {
          if (!in_tree_[a]) {
            T rc = cost_[a] + pi_[src(a)] - pi_[dst(a)];
            if (rc < -tol_ && (!entering || rc < best || (rc == best && a < *entering))) {
              best = rc;
              entering = a;
            }
          }
          if (++a == n_transport) a = 0;
        }
        if (entering) break;
      }
      if (!entering) break;
      next = a;
      if (out.iterations >= max_iterations) throw SolverError("network simplex iteration limit reached");
      ++out.iterations;
      if (pivot(*entering)) ++out.degenerate_pivots;
    }
    T flow_tol(0);
    if constexpr (!ScalarTraits<T>::exact) {
      T total(0);
      for (const T& s : supply_) total += s;
      flow_tol = T(1e-9) * (total > T(1) ? total : T(1));
    }
    for (std::size_t a = n_transport; a < arcs_; ++a) {
      if (flow_[a] > flow_tol) throw SolverError("transport problem infeasible (unbalanced masses?)");
    }
    out.flow.assign(flow_.begin(), flow_.begin() + n_transport);
    out.basic.assign(n_transport, 0);
    for (std::size_t a = 0; a < n_transport; ++a) out.basic[a] = in_tree_[a];
    // phi_i = -pi_i, psi_j = pi_j; shift so phi_0 = 0 and add back the cost shift.
    T base = pi_[0];
    out.phi.resize(nx_);
    out.psi.resize(ny_);
    for (std::size_t i = 0; i < nx_; ++i) out.phi[i] = base - pi_[i] + cost_shift_;
    for (std::size_t j = 0; j < ny_; ++j) out.psi[j] = pi_[nx_ + j] - base;
    return out;
  }

 private:
  std::size_t src(std::size_t a) const {
    if (a < nx_ * ny_) return a / ny_;
    std::size_t v = a - nx_ * ny_;
    return v < nx_ ? v : root_;
  }
  std::size_t dst(std::size_t a) const {
    if (a < nx_ * ny_) return nx_ + a % ny_;
    std::size_t v = a - nx_ * ny_;
    return v < nx_ ? root_ : v;
  }

  void init_tree() {
    flow_.assign(arcs_, T(0));
    in_tree_.assign(arcs_, 0);
    tree_arcs_.clear();
    for (std::size_t v = 0; v < nx_ + ny_; ++v) {
      std::size_t a = nx_ * ny_ + v;
      flow_[a] = v < nx_ ? supply_[v] : demand_[v - nx_];
      in_tree_[a] = 1;
      tree_arcs_.push_back(a);
    }
    rebuild();
  }

  // Recomputes parent, depth and potentials from the tree arc set.
  void rebuild() {
    std::vector<std::size_t>& start = csr_start_;
    std::vector<std::size_t>& adj = csr_adj_;
    start.assign(nodes_ + 1, 0);
    for (std::size_t a : tree_arcs_) {
      ++start[src(a) + 1];
      ++start[dst(a) + 1];
    }
    for (std::size_t v = 0; v < nodes_; ++v) start[v + 1] += start[v];
    adj.assign(2 * tree_arcs_.size(), 0);
    fill_.assign(start.begin(), start.end() - 1);
    for (std::size_t a : tree_arcs_) {
      adj[fill_[src(a)]++] = a;
      adj[fill_[dst(a)]++] = a;
    }
    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    depth_.assign(nodes_, 0);
    pi_.assign(nodes_, T(0));
    order_.clear();
    order_.push_back(root_);
    parent_[root_] = root_;
    for (std::size_t head = 0; head < order_.size(); ++head) {
      std::size_t v = order_[head];
      for (std::size_t k = start[v]; k < start[v + 1]; ++k) {
        std::size_t a = adj[k];
        std::size_t w = src(a) == v ? dst(a) : src(a);
        if (parent_[w] != kNone) continue;
        parent_[w] = v;
        pred_[w] = a;
        depth_[w] = depth_[v] + 1;
        pi_[w] = src(a) == v ? T(cost_[a] + pi_[v]) : T(pi_[v] - cost_[a]);
        order_.push_back(w);
      }
    }
    if (order_.size() != nodes_) throw SolverError("network simplex tree lost connectivity");
  }

  bool up(std::size_t w) const { return src(pred_[w]) == w; }

  // Returns true when the pivot was degenerate.
  bool pivot(std::size_t e) {
    std::size_t u = src(e), v = dst(e);
    std::size_t a = u, b = v;
    while (a != b) {
      if (depth_[a] >= depth_[b]) {
        a = parent_[a];
      } else {
        b = parent_[b];
      }
    }
    const std::size_t join = a;
    std::optional<T> delta;
    std::size_t leave = kNone;
    for (std::size_t w = u; w != join; w = parent_[w]) {
      if (up(w) && (!delta || flow_[pred_[w]] < *delta)) {
        delta = flow_[pred_[w]];
        leave = pred_[w];
      }
    }
    for (std::size_t w = v; w != join; w = parent_[w]) {
      if (!up(w) && (!delta || flow_[pred_[w]] <= *delta)) {
        delta = flow_[pred_[w]];
        leave = pred_[w];
      }
    }
    if (!delta) throw SolverError("unbounded transport cycle");
    const T d = *delta;
    bool degenerate = d == T(0);
    if (!degenerate) {
      for (std::size_t w = u; w != join; w = parent_[w]) {
        if (up(w)) {
          flow_[pred_[w]] -= d;
        } else {
          flow_[pred_[w]] += d;
        }
      }
      for (std::size_t w = v; w != join; w = parent_[w]) {
        if (up(w)) {
          flow_[pred_[w]] += d;
        } else {
          flow_[pred_[w]] -= d;
        }
      }
      flow_[e] += d;
    }
    in_tree_[leave] = 0;
    in_tree_[e] = 1;
    for (auto& t : tree_arcs_) {
      if (t == leave) {
        t = e;
        break;
      }
    }
    rebuild();
    return degenerate;
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::size_t nx_, ny_, nodes_ = 0, root_ = 0, arcs_ = 0;
  std::vector<T> supply_, demand_, cost_, flow_, pi_;
  T cost_shift_ = T(0);
  T tol_ = T(0);
  std::vector<std::uint8_t> in_tree_;
  std::vector<std::size_t> tree_arcs_, parent_, pred_, depth_, order_, csr_start_, csr_adj_, fill_;
};

}  // namespace matchport
