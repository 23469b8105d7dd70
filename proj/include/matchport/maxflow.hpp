#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace matchport {

// Dinic's algorithm on real capacities. Residuals at or below eps count as
// saturated.
class MaxFlow {
 public:
  explicit MaxFlow(std::size_t nodes, double eps = 0.0) : eps_(eps), head_(nodes, kNil), level_(nodes), it_(nodes) {}

  void add_edge(std::size_t from, std::size_t to, double cap) {
    edges_.push_back({to, head_[from], cap});
    head_[from] = edges_.size() - 1;
    edges_.push_back({from, head_[to], 0.0});
    head_[to] = edges_.size() - 1;
  }

  double run(std::size_t s, std::size_t t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::copy(head_.begin(), head_.end(), it_.begin());
      for (;;) {
        double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= eps_) break;
        total += pushed;
      }
    }
    return total;
  }

 private:
  static constexpr std::size_t kNil = static_cast<std::size_t>(-1);
  struct Edge {
    std::size_t to;
    std::size_t next;
    double cap;
  };

  bool bfs(std::size_t s, std::size_t t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::size_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      std::size_t v = q.front();
      q.pop();
      for (std::size_t e = head_[v]; e != kNil; e = edges_[e].next) {
        if (edges_[e].cap > eps_ && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(std::size_t v, std::size_t t, double limit) {
    if (v == t) return limit;
    for (std::size_t& e = it_[v]; e != kNil; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > eps_ && level_[ed.to] == level_[v] + 1) {
        double got = dfs(ed.to, t, std::min(limit, ed.cap));
        if (got > eps_) {
          ed.cap -= got;
          edges_[e ^ 1].cap += got;
          return got;
        }
      }
    }
    return 0.0;
  }

  double eps_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> head_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace matchport
