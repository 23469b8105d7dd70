#pragma once

#include "matchport/market.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace matchport {

// Weak orders for both sides as ranks: 0 is the most preferred level and
// equal ranks are indifferent. Ranks are normalised to dense levels.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;
  // x_rank[x][y] ranks y in x's order; y_rank[y][x] ranks x in y's order.
  PreferenceProfile(std::vector<std::vector<int>> x_rank, std::vector<std::vector<int>> y_rank);

  // Orders induced by a utility table, higher utility preferred.
  template <class T>
  static PreferenceProfile from_table(const DenseMatrix<T>& u) {
    std::vector<std::vector<int>> xr(u.rows(), std::vector<int>(u.cols())),
        yr(u.cols(), std::vector<int>(u.rows()));
    for (std::size_t x = 0; x < u.rows(); ++x) {
      for (std::size_t y = 0; y < u.cols(); ++y) {
        int better = 0;
        for (std::size_t y2 = 0; y2 < u.cols(); ++y2) better += u(x, y2) > u(x, y) ? 1 : 0;
        xr[x][y] = better;
      }
    }
    for (std::size_t y = 0; y < u.cols(); ++y) {
      for (std::size_t x = 0; x < u.rows(); ++x) {
        int better = 0;
        for (std::size_t x2 = 0; x2 < u.rows(); ++x2) better += u(x2, y) > u(x, y) ? 1 : 0;
        yr[y][x] = better;
      }
    }
    return PreferenceProfile(std::move(xr), std::move(yr));
  }

  std::size_t nx() const { return x_rank_.size(); }
  std::size_t ny() const { return y_rank_.size(); }
  const std::vector<std::vector<int>>& x_rank() const { return x_rank_; }
  const std::vector<std::vector<int>>& y_rank() const { return y_rank_; }

  // y >=_x y2 and x >=_y x2.
  bool x_weakly_prefers(std::size_t x, std::size_t y, std::size_t y2) const { return x_rank_[x][y] <= x_rank_[x][y2]; }
  bool y_weakly_prefers(std::size_t y, std::size_t x, std::size_t x2) const { return y_rank_[y][x] <= y_rank_[y][x2]; }

  bool operator==(const PreferenceProfile&) const = default;

 private:
  std::vector<std::vector<int>> x_rank_, y_rank_;
};

struct Couple {
  std::size_t x = 0, y = 0;
  bool operator==(const Couple&) const = default;
};

// A closed walk z_0 >= z_1 >= ... >= z_0 over couples (the last couple steps
// back to the first), with at least one strict step.
struct ImprovementCycle {
  std::vector<Couple> couples;
};

// nullopt when the profile is acyclic.
std::optional<ImprovementCycle> check_acyclicity(const PreferenceProfile& p);

// Checks the witness conditions: consecutive couples share exactly one agent,
// that agent weakly prefers the earlier couple, and one step is strict.
bool is_valid_cycle(const PreferenceProfile& p, const ImprovementCycle& c);

// u(z) = sum of 2^-r(z') over couples z' below z in the transitive closure,
// with r the row-major position starting at 1. Throws ValidationError on a
// cyclic profile.
DenseMatrix<Rational> build_potential(const PreferenceProfile& p);

// True when u represents every agent's order exactly.
template <class T>
bool is_potential(const PreferenceProfile& p, const DenseMatrix<T>& u) {
  if (u.rows() != p.nx() || u.cols() != p.ny()) return false;
  for (std::size_t x = 0; x < p.nx(); ++x) {
    for (std::size_t y = 0; y < p.ny(); ++y) {
      for (std::size_t y2 = 0; y2 < p.ny(); ++y2) {
        if ((u(x, y) >= u(x, y2)) != p.x_weakly_prefers(x, y, y2)) return false;
      }
      for (std::size_t x2 = 0; x2 < p.nx(); ++x2) {
        if ((u(x, y) >= u(x2, y)) != p.y_weakly_prefers(y, x, x2)) return false;
      }
    }
  }
  return true;
}

}  // namespace matchport
