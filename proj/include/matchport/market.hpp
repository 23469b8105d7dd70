#pragma once

#include "matchport/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace matchport {

template <class T>
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix from_rows(const std::vector<std::vector<T>>& rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.front().size();
    DenseMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != c) throw ValidationError("ragged matrix rows");
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  const std::vector<T>& data() const { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

enum class UtilityFamily { kNegDistance, kTable, kNashSurplus };

// u(x, y). Point families evaluate on coordinates; table families on indices.
template <class T>
class BasicUtilitySpec {
 public:
  BasicUtilitySpec() = default;

  // p = infinity selects the max norm.
  static BasicUtilitySpec neg_distance(std::size_t dim, double p = 2.0) {
    if (dim == 0) throw ValidationError("neg_distance needs dimension >= 1");
    if (!(p >= 1.0)) throw ValidationError("norm exponent must be >= 1");
    if constexpr (ScalarTraits<T>::exact) {
      if (dim > 1 && p != 1.0 && !std::isinf(p)) {
        throw ValidationError("exact neg_distance supports p = 1 or p = inf in dimension > 1");
      }
    }
    BasicUtilitySpec s;
    s.family_ = UtilityFamily::kNegDistance;
    s.dim_ = dim;
    s.p_ = p;
    return s;
  }

  static BasicUtilitySpec table(DenseMatrix<T> values) {
    if (values.rows() == 0 || values.cols() == 0) throw ValidationError("empty utility table");
    BasicUtilitySpec s;
    s.family_ = UtilityFamily::kTable;
    s.values_ = std::move(values);
    return s;
  }

  // The aligned representative of a Nash-bargaining market is the surplus.
  static BasicUtilitySpec nash_surplus(DenseMatrix<T> surplus, T beta) {
    if (!(beta > 0 && beta < 1)) throw ValidationError("beta must lie strictly inside (0, 1)");
    BasicUtilitySpec s = table(std::move(surplus));
    s.family_ = UtilityFamily::kNashSurplus;
    s.beta_ = beta;
    return s;
  }

  BasicUtilitySpec with_bounds(T lower, T upper) const {
    if (lower > upper) throw ValidationError("utility bounds reversed");
    BasicUtilitySpec s = *this;
    s.bounds_ = std::make_pair(lower, upper);
    return s;
  }

  UtilityFamily family() const { return family_; }
  bool tabular() const { return family_ != UtilityFamily::kNegDistance; }
  std::size_t dim() const { return dim_; }
  double p() const { return p_; }
  const DenseMatrix<T>& values() const { return values_; }
  const T& beta() const { return beta_; }
  const std::optional<std::pair<T, T>>& bounds() const { return bounds_; }

  T operator()(std::span<const T> x, std::span<const T> y) const {
    if (tabular()) throw ValidationError("table utility is evaluated on indices");
    if (x.size() != dim_ || y.size() != dim_) throw ValidationError("point dimension mismatch");
    using std::abs;
    if (dim_ == 1) return T(-abs(T(x[0] - y[0])));
    if (std::isinf(p_)) {
      T best(0);
      for (std::size_t k = 0; k < dim_; ++k) best = std::max(best, T(abs(T(x[k] - y[k]))));
      return T(-best);
    }
    if (p_ == 1.0) {
      T sum(0);
      for (std::size_t k = 0; k < dim_; ++k) sum += abs(T(x[k] - y[k]));
      return T(-sum);
    }
    if constexpr (ScalarTraits<T>::exact) {
      throw ValidationError("exact neg_distance supports p = 1 or p = inf in dimension > 1");
    } else {
      if (p_ == 2.0) {
        T sum(0);
        for (std::size_t k = 0; k < dim_; ++k) {
          T d = x[k] - y[k];
          sum += d * d;
        }
        using std::sqrt;
        return T(-sqrt(sum));
      }
      T sum(0);
      for (std::size_t k = 0; k < dim_; ++k) {
        using std::pow;
        sum += pow(abs(T(x[k] - y[k])), T(p_));
      }
      using std::pow;
      return T(-pow(sum, T(1.0 / p_)));
    }
  }

  T operator()(std::size_t i, std::size_t j) const {
    if (!tabular()) throw ValidationError("point utility is evaluated on coordinates");
    if (i >= values_.rows() || j >= values_.cols()) throw ValidationError("utility index out of range");
    return values_(i, j);
  }

 private:
  UtilityFamily family_ = UtilityFamily::kTable;
  std::size_t dim_ = 0;
  double p_ = 2.0;
  DenseMatrix<T> values_;
  T beta_ = T(0);
  std::optional<std::pair<T, T>> bounds_;
};

using UtilitySpec = BasicUtilitySpec<double>;

template <class T>
T utility_eval(const BasicUtilitySpec<T>& spec, std::span<const T> x, std::span<const T> y) {
  return spec(x, y);
}

template <class T>
T utility_eval(const BasicUtilitySpec<T>& spec, std::size_t i, std::size_t j) {
  return spec(i, j);
}

struct NashReduction {
  UtilitySpec utility;
  double eps_prime = 0.0;
};

// eps-stability of the aligned market at eps_prime certifies eps-stability of
// the bargaining market.
NashReduction nash_bargaining_reduce(const DenseMatrix<double>& surplus, double beta, double eps);

template <class T>
bool masses_balanced(const T& a, const T& b) {
  if constexpr (ScalarTraits<T>::exact) {
    return a == b;
  } else {
    using std::abs;
    T scale = std::max(T(1), std::max(abs(a), abs(b)));
    return abs(T(a - b)) <= T(kMassTolerance) * scale;
  }
}

struct MarketOptions {
  // Adds one dummy atom to the lighter side; its couples get dummy_utility.
  bool pad_with_dummy = false;
  double dummy_utility = 0.0;
  bool merge_coincident = true;
};

template <class T>
class BasicDiscreteMarket {
 public:
  using Point = std::vector<T>;

  BasicDiscreteMarket(std::vector<Point> x_atoms, std::vector<T> x_masses, std::vector<Point> y_atoms,
                      std::vector<T> y_masses, BasicUtilitySpec<T> utility, MarketOptions options = {})
      : x_atoms_(std::move(x_atoms)),
        y_atoms_(std::move(y_atoms)),
        x_masses_(std::move(x_masses)),
        y_masses_(std::move(y_masses)),
        utility_(std::move(utility)) {
    if (utility_.tabular()) throw ValidationError("point atoms need a neg_distance utility");
    if (x_atoms_.size() != x_masses_.size() || y_atoms_.size() != y_masses_.size()) {
      throw ValidationError("atom and mass lists differ in length");
    }
    for (const auto& p : x_atoms_) {
      if (p.size() != utility_.dim()) throw ValidationError("x atom dimension mismatch");
    }
    for (const auto& p : y_atoms_) {
      if (p.size() != utility_.dim()) throw ValidationError("y atom dimension mismatch");
    }
    check_masses();
    if (options.merge_coincident) {
      merge(x_atoms_, x_masses_);
      merge(y_atoms_, y_masses_);
    }
    finish(options);
  }

  // Table utility: atoms are labels 0..n-1.
  BasicDiscreteMarket(std::vector<T> x_masses, std::vector<T> y_masses, BasicUtilitySpec<T> utility,
                      MarketOptions options = {})
      : x_masses_(std::move(x_masses)), y_masses_(std::move(y_masses)), utility_(std::move(utility)) {
    if (!utility_.tabular()) throw ValidationError("label atoms need a table utility");
    if (utility_.values().rows() != x_masses_.size() || utility_.values().cols() != y_masses_.size()) {
      throw ValidationError("utility table dimensions do not match atom counts");
    }
    check_masses();
    finish(options);
  }

  std::size_t nx() const { return x_masses_.size(); }
  std::size_t ny() const { return y_masses_.size(); }
  const std::vector<T>& x_masses() const { return x_masses_; }
  const std::vector<T>& y_masses() const { return y_masses_; }
  const std::vector<Point>& x_atoms() const { return x_atoms_; }
  const std::vector<Point>& y_atoms() const { return y_atoms_; }
  bool has_points() const { return !x_atoms_.empty(); }
  const BasicUtilitySpec<T>& utility_spec() const { return utility_; }
  const std::optional<std::size_t>& dummy_x() const { return dummy_x_; }
  const std::optional<std::size_t>& dummy_y() const { return dummy_y_; }
  T total_mass() const { return total_; }

  T utility(std::size_t i, std::size_t j) const {
    if (utility_.tabular()) return utility_(i, j);
    return utility_(std::span<const T>(x_atoms_.at(i)), std::span<const T>(y_atoms_.at(j)));
  }

  std::pair<T, T> utility_range() const {
    T lo = utility(0, 0);
    T hi = lo;
    for (std::size_t i = 0; i < nx(); ++i) {
      for (std::size_t j = 0; j < ny(); ++j) {
        T u = utility(i, j);
        if (u < lo) lo = u;
        if (u > hi) hi = u;
      }
    }
    return {lo, hi};
  }

 private:
  void check_masses() const {
    if (x_masses_.empty() || y_masses_.empty()) throw ValidationError("atom lists must be non-empty");
    for (const T& m : x_masses_) {
      if (!(m > 0)) throw ValidationError("masses must be positive");
    }
    for (const T& m : y_masses_) {
      if (!(m > 0)) throw ValidationError("masses must be positive");
    }
  }

  static void merge(std::vector<Point>& atoms, std::vector<T>& masses) {
    std::map<Point, std::size_t> seen;
    std::vector<Point> out_atoms;
    std::vector<T> out_masses;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      auto [it, inserted] = seen.emplace(atoms[i], out_atoms.size());
      if (inserted) {
        out_atoms.push_back(atoms[i]);
        out_masses.push_back(masses[i]);
      } else {
        out_masses[it->second] += masses[i];
      }
    }
    atoms = std::move(out_atoms);
    masses = std::move(out_masses);
  }

  void finish(const MarketOptions& options) {
    T sx(0), sy(0);
    for (const T& m : x_masses_) sx += m;
    for (const T& m : y_masses_) sy += m;
    if (!masses_balanced(sx, sy)) {
      if (!options.pad_with_dummy) {
        throw ValidationError("unbalanced market: total x mass " + std::to_string(to_double(sx)) +
                              " != total y mass " + std::to_string(to_double(sy)));
      }
      pad(sx, sy, ScalarTraits<T>::from_double(options.dummy_utility));
    }
    total_ = std::max(sx, sy);
  }

  // Dummies break coordinates, so the padded market is always tabular.
  void pad(const T& sx, const T& sy, const T& dummy_utility) {
    std::size_t nx0 = nx(), ny0 = ny();
    bool pad_x = sx < sy;
    DenseMatrix<T> table(nx0 + (pad_x ? 1 : 0), ny0 + (pad_x ? 0 : 1), dummy_utility);
    for (std::size_t i = 0; i < nx0; ++i) {
      for (std::size_t j = 0; j < ny0; ++j) table(i, j) = utility(i, j);
    }
    if (pad_x) {
      x_masses_.push_back(T(sy - sx));
      dummy_x_ = nx0;
    } else {
      y_masses_.push_back(T(sx - sy));
      dummy_y_ = ny0;
    }
    utility_ = BasicUtilitySpec<T>::table(std::move(table));
    x_atoms_.clear();
    y_atoms_.clear();
  }

  std::vector<Point> x_atoms_, y_atoms_;
  std::vector<T> x_masses_, y_masses_;
  BasicUtilitySpec<T> utility_;
  std::optional<std::size_t> dummy_x_, dummy_y_;
  T total_ = T(0);
};

using DiscreteMarket = BasicDiscreteMarket<double>;
using ExactDiscreteMarket = BasicDiscreteMarket<Rational>;

template <class T>
struct BasicCoupling {
  struct Entry {
    std::size_t x = 0;
    std::size_t y = 0;
    T mass = T(0);
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> entries;
  T total_mass = T(0);

  bool operator==(const BasicCoupling&) const = default;
};

using Coupling = BasicCoupling<double>;
using ExactCoupling = BasicCoupling<Rational>;

// Checks marginals and key uniqueness; throws ValidationError otherwise.
template <class T>
void validate_coupling(const BasicCoupling<T>& c, const BasicDiscreteMarket<T>& m) {
  std::vector<T> rows(m.nx(), T(0)), cols(m.ny(), T(0));
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  for (const auto& e : c.entries) {
    if (e.x >= m.nx() || e.y >= m.ny()) throw ValidationError("coupling index out of range");
    if (!(e.mass > 0)) throw ValidationError("coupling masses must be positive");
    rows[e.x] += e.mass;
    cols[e.y] += e.mass;
    keys.emplace_back(e.x, e.y);
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw ValidationError("duplicate coupling entry");
  }
  for (std::size_t i = 0; i < m.nx(); ++i) {
    if (!masses_balanced(rows[i], m.x_masses()[i])) throw ValidationError("x marginal mismatch");
  }
  for (std::size_t j = 0; j < m.ny(); ++j) {
    if (!masses_balanced(cols[j], m.y_masses()[j])) throw ValidationError("y marginal mismatch");
  }
}

// Piecewise-constant densities f (for mu) and g (for nu) on [b_i, b_{i+1}).
template <class T>
class BasicPiecewiseMarket {
 public:
  BasicPiecewiseMarket() = default;
  BasicPiecewiseMarket(std::vector<T> breakpoints, std::vector<T> f, std::vector<T> g)
      : b_(std::move(breakpoints)), f_(std::move(f)), g_(std::move(g)) {
    if (b_.size() < 2) throw ValidationError("need at least two breakpoints");
    if (f_.size() + 1 != b_.size() || g_.size() + 1 != b_.size()) {
      throw ValidationError("density count must be breakpoints - 1");
    }
    for (std::size_t i = 0; i + 1 < b_.size(); ++i) {
      if (!(b_[i] < b_[i + 1])) throw ValidationError("breakpoints must be strictly increasing");
    }
    for (std::size_t i = 0; i < f_.size(); ++i) {
      if constexpr (!ScalarTraits<T>::exact) {
        if (!std::isfinite(to_double(f_[i])) || !std::isfinite(to_double(g_[i]))) {
          throw ValidationError("densities must be finite");
        }
      }
      if (f_[i] < 0 || g_[i] < 0) throw ValidationError("densities must be non-negative");
    }
    if (!masses_balanced(mu_mass(), nu_mass())) {
      throw ValidationError("unbalanced line market: mu mass " + std::to_string(to_double(mu_mass())) +
                            " != nu mass " + std::to_string(to_double(nu_mass())));
    }
  }

  std::size_t intervals() const { return f_.size(); }
  const std::vector<T>& breakpoints() const { return b_; }
  const std::vector<T>& f() const { return f_; }
  const std::vector<T>& g() const { return g_; }
  T width(std::size_t i) const { return b_[i + 1] - b_[i]; }

  T mu_mass() const {
    T s(0);
    for (std::size_t i = 0; i < f_.size(); ++i) s += f_[i] * width(i);
    return s;
  }
  T nu_mass() const {
    T s(0);
    for (std::size_t i = 0; i < g_.size(); ++i) s += g_[i] * width(i);
    return s;
  }

  bool operator==(const BasicPiecewiseMarket&) const = default;

 private:
  std::vector<T> b_, f_, g_;
};

using PiecewiseDensityMarket = BasicPiecewiseMarket<double>;
using ExactPiecewiseMarket = BasicPiecewiseMarket<Rational>;

template <class T>
BasicDiscreteMarket<T> discretize_line_market(const BasicPiecewiseMarket<T>& m, std::size_t cells_per_interval) {
  if (cells_per_interval == 0) throw ValidationError("cells_per_interval must be >= 1");
  std::vector<std::vector<T>> xs, ys;
  std::vector<T> xm, ym;
  const T cells(static_cast<long>(cells_per_interval));
  for (std::size_t i = 0; i < m.intervals(); ++i) {
    T w = m.width(i) / cells;
    for (std::size_t c = 0; c < cells_per_interval; ++c) {
      T mid = m.breakpoints()[i] + w * (T(static_cast<long>(c)) + T(1) / T(2));
      if (m.f()[i] > 0) {
        xs.push_back({mid});
        xm.push_back(m.f()[i] * w);
      }
      if (m.g()[i] > 0) {
        ys.push_back({mid});
        ym.push_back(m.g()[i] * w);
      }
    }
  }
  return BasicDiscreteMarket<T>(std::move(xs), std::move(xm), std::move(ys), std::move(ym),
                                BasicUtilitySpec<T>::neg_distance(1, 1.0));
}

// Smallest nonzero utility gap along any row or column; 0 if every gap is 0.
// In floating point, gaps within rounding of the utility scale count as 0.
template <class T>
T compute_delta(const BasicDiscreteMarket<T>& m) {
  if (m.nx() < 2 && m.ny() < 2) throw ValidationError("compute_delta needs two atoms on some side");
  std::optional<T> best;
  T zero(0);
  if constexpr (!ScalarTraits<T>::exact) {
    using std::abs;
    auto [lo, hi] = m.utility_range();
    zero = T(kRootTolerance) * std::max(T(1), std::max(abs(lo), abs(hi)));
  }
  auto consider = [&](std::vector<T>& values) {
    std::sort(values.begin(), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      T gap = values[k + 1] - values[k];
      if (gap > zero && (!best || gap < *best)) best = gap;
    }
  };
  std::vector<T> line;
  for (std::size_t i = 0; i < m.nx(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < m.ny(); ++j) line.push_back(m.utility(i, j));
    consider(line);
  }
  for (std::size_t j = 0; j < m.ny(); ++j) {
    line.clear();
    for (std::size_t i = 0; i < m.nx(); ++i) line.push_back(m.utility(i, j));
    consider(line);
  }
  return best.value_or(T(0));
}

}  // namespace matchport
