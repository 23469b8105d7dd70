#pragma once

// Dense revised simplex for  min c.x  s.t.  A x = b, x >= 0,  where every
// column of A is a 0/1 vector (transport-style incidence). The basis inverse
// is kept explicitly and refactored from scratch every few dozen pivots.

#include "matchport/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace matchport {

struct LpColumn {
  std::vector<std::size_t> rows;  // rows holding a 1
};

enum class LpStatus { kOptimal, kInfeasible, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  std::vector<long double> x;  // structural values
  std::vector<long double> y;  // row duals
  long double objective = 0.0L;
  long double infeasibility = 0.0L;  // artificial mass left after phase one
  std::int64_t iterations = 0;
  std::int64_t degenerate_pivots = 0;
};

class IncidenceLp {
 public:
  IncidenceLp(std::size_t rows, std::vector<LpColumn> columns, std::vector<long double> b)
      : m_(rows), cols_(std::move(columns)), b_(std::move(b)) {
    if (b_.size() != m_) throw ValidationError("right-hand side length mismatch");
    for (const auto& c : cols_) {
      for (std::size_t r : c.rows) {
        if (r >= m_) throw ValidationError("column row index out of range");
      }
    }
    for (long double v : b_) {
      if (v < 0) throw ValidationError("right-hand side must be non-negative");
    }
  }

  // Columns with allowed[j] == false never enter. An empty cost vector runs
  // phase one only (a feasibility test).
  LpResult solve(const std::vector<long double>& cost, const std::vector<bool>& allowed = {},
                 std::int64_t max_iterations = 0) {
    const std::size_t n = cols_.size();
    allowed_ = allowed.empty() ? std::vector<bool>(n, true) : allowed;
    if (allowed_.size() != n) throw ValidationError("allowed mask length mismatch");
    if (!cost.empty() && cost.size() != n) throw ValidationError("cost length mismatch");
    if (max_iterations <= 0) max_iterations = 50 * static_cast<std::int64_t>(n + m_) + 1000;

    long double bscale = 1.0L, bsum = 0.0L;
    for (long double v : b_) {
      bscale = std::max(bscale, v);
      bsum += v;
    }
    feas_tol_ = 1e-12L * bscale * static_cast<long double>(m_ + 1);

    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) basis_[r] = n + r;  // artificials
    in_basis_.assign(n + m_, -1);
    for (std::size_t r = 0; r < m_; ++r) in_basis_[n + r] = static_cast<long>(r);
    binv_.assign(m_ * m_, 0.0L);
    for (std::size_t r = 0; r < m_; ++r) binv_[r * m_ + r] = 1.0L;
    xb_ = b_;

    LpResult res;
    std::vector<long double> phase1(n + m_, 0.0L);
    for (std::size_t r = 0; r < m_; ++r) phase1[n + r] = 1.0L;
    if (!iterate(phase1, res, max_iterations)) {
      res.status = LpStatus::kIterationLimit;
      return res;
    }
    long double infeas = 0.0L;
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] >= n) infeas += xb_[r];
    }
    res.infeasibility = infeas;
    if (infeas > 1e-9L * std::max(1.0L, bsum)) {
      res.status = LpStatus::kInfeasible;
      extract(res, phase1);
      return res;
    }
    drive_out_artificials();
    if (cost.empty()) {
      extract(res, std::vector<long double>(n + m_, 0.0L));
      return res;
    }
    std::vector<long double> phase2(n + m_, 0.0L);
    std::copy(cost.begin(), cost.end(), phase2.begin());
    if (!iterate(phase2, res, max_iterations)) {
      res.status = LpStatus::kIterationLimit;
      return res;
    }
    extract(res, phase2);
    return res;
  }

 private:
  static constexpr long double kPivotTol = 1e-10L;
  static constexpr int kRefactorEvery = 64;
  static constexpr int kBlandAfter = 32;  // consecutive degenerate pivots

  // Binv * A_j
  std::vector<long double> ftran(std::size_t j) const {
    std::vector<long double> w(m_, 0.0L);
    if (j >= cols_.size()) {
      std::size_t r = j - cols_.size();
      for (std::size_t i = 0; i < m_; ++i) w[i] = binv_[i * m_ + r];
      return w;
    }
    for (std::size_t r : cols_[j].rows) {
      for (std::size_t i = 0; i < m_; ++i) w[i] += binv_[i * m_ + r];
    }
    return w;
  }

  std::vector<long double> duals(const std::vector<long double>& cost) const {
    std::vector<long double> y(m_, 0.0L);
    for (std::size_t i = 0; i < m_; ++i) {
      long double cb = cost[basis_[i]];
      if (cb == 0.0L) continue;
      for (std::size_t r = 0; r < m_; ++r) y[r] += cb * binv_[i * m_ + r];
    }
    return y;
  }

  long double reduced(std::size_t j, const std::vector<long double>& cost, const std::vector<long double>& y) const {
    long double d = cost[j];
    for (std::size_t r : cols_[j].rows) d -= y[r];
    return d;
  }

  void pivot(std::size_t row, std::size_t entering, const std::vector<long double>& w) {
    long double p = w[row];
    for (std::size_t r = 0; r < m_; ++r) binv_[row * m_ + r] /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row || w[i] == 0.0L) continue;
      long double f = w[i];
      for (std::size_t r = 0; r < m_; ++r) binv_[i * m_ + r] -= f * binv_[row * m_ + r];
    }
    in_basis_[basis_[row]] = -1;
    basis_[row] = entering;
    in_basis_[entering] = static_cast<long>(row);
  }

  // Gauss-Jordan with partial pivoting on the current basis matrix.
  void refactor() {
    std::vector<long double> a(m_ * m_, 0.0L), inv(m_ * m_, 0.0L);
    for (std::size_t k = 0; k < m_; ++k) {
      std::size_t j = basis_[k];
      if (j >= cols_.size()) {
        a[(j - cols_.size()) * m_ + k] = 1.0L;
      } else {
        for (std::size_t r : cols_[j].rows) a[r * m_ + k] = 1.0L;
      }
      inv[k * m_ + k] = 1.0L;
    }
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t best = c;
      for (std::size_t r = c + 1; r < m_; ++r) {
        if (std::fabs(a[r * m_ + c]) > std::fabs(a[best * m_ + c])) best = r;
      }
      if (std::fabs(a[best * m_ + c]) < 1e-14L) throw SolverError("singular basis during refactorisation");
      if (best != c) {
        for (std::size_t k = 0; k < m_; ++k) {
          std::swap(a[best * m_ + k], a[c * m_ + k]);
          std::swap(inv[best * m_ + k], inv[c * m_ + k]);
        }
      }
      long double p = a[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        a[c * m_ + k] /= p;
        inv[c * m_ + k] /= p;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        long double f = a[r * m_ + c];
        if (f == 0.0L) continue;
        for (std::size_t k = 0; k < m_; ++k) {
          a[r * m_ + k] -= f * a[c * m_ + k];
          inv[r * m_ + k] -= f * inv[c * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
    for (std::size_t i = 0; i < m_; ++i) {
      long double v = 0.0L;
      for (std::size_t r = 0; r < m_; ++r) v += binv_[i * m_ + r] * b_[r];
      xb_[i] = std::max(v, 0.0L);
    }
  }

  bool iterate(const std::vector<long double>& cost, LpResult& res, std::int64_t max_iterations) {
    const std::size_t n = cols_.size();
    long double cscale = 1.0L;
    for (std::size_t j = 0; j < n; ++j) cscale = std::max(cscale, std::fabs(cost[j]));
    const long double dtol = 1e-11L * cscale;
    int since_refactor = 0;
    int degenerate_run = 0;
    for (;;) {
      if (res.iterations >= max_iterations) return false;
      std::vector<long double> y = duals(cost);
      bool bland = degenerate_run >= kBlandAfter;
      std::size_t entering = n;
      long double best = -dtol;
      for (std::size_t j = 0; j < n; ++j) {
        if (!allowed_[j] || in_basis_[j] >= 0) continue;
        long double d = reduced(j, cost, y);
        if (d < best) {
          entering = j;
          if (bland) break;
          best = d;
        }
      }
      if (entering == n) return true;

      std::vector<long double> w = ftran(entering);
      std::size_t leave = m_;
      long double ratio = std::numeric_limits<long double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (w[i] <= kPivotTol) continue;
        long double r = xb_[i] / w[i];
        bool take = leave == m_ || r < ratio - feas_tol_;
        if (!take && r <= ratio + feas_tol_) {
          // Ties: artificials leave first, then the lowest variable index.
          bool art_i = basis_[i] >= n, art_l = basis_[leave] >= n;
          take = (art_i && !art_l) || (art_i == art_l && basis_[i] < basis_[leave]);
        }
        if (take) {
          leave = i;
          ratio = r;
        }
      }
      if (leave == m_) throw SolverError("unbounded linear program");
      ratio = std::max(ratio, 0.0L);
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave) continue;
        xb_[i] = std::max(xb_[i] - ratio * w[i], 0.0L);
      }
      xb_[leave] = ratio;
      pivot(leave, entering, w);
      ++res.iterations;
      if (ratio <= feas_tol_) {
        ++res.degenerate_pivots;
        ++degenerate_run;
      } else {
        degenerate_run = 0;
      }
      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  void drive_out_artificials() {
    const std::size_t n = cols_.size();
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_basis_[j] >= 0) continue;
        long double v = 0.0L;
        for (std::size_t r : cols_[j].rows) v += binv_[i * m_ + r];
        if (std::fabs(v) > 1e-9L) {
          pivot(i, j, ftran(j));
          break;
        }
      }
    }
    refactor();
  }

  void extract(LpResult& res, const std::vector<long double>& cost) {
    const std::size_t n = cols_.size();
    res.x.assign(n, 0.0L);
    res.objective = 0.0L;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n) {
        res.x[basis_[i]] = xb_[i];
        res.objective += cost[basis_[i]] * xb_[i];
      }
    }
    res.y = duals(cost);
  }

  std::size_t m_;
  std::vector<LpColumn> cols_;
  std::vector<long double> b_;
  std::vector<bool> allowed_;
  std::vector<std::size_t> basis_;
  std::vector<long> in_basis_;
  std::vector<long double> binv_;
  std::vector<long double> xb_;
  long double feas_tol_ = 0.0L;
};

}  // namespace matchport
