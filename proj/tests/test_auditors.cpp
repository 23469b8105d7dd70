#include "support.hpp"

#include "matchport/audit.hpp"
#include "matchport/line_solver.hpp"
#include "matchport/ot_engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace matchport;
using namespace testing_support;

namespace {

DiscreteMarket nonuniqueness_market() {
  using P = std::vector<double>;
  return DiscreteMarket({P{1.0 / 3.0}, P{1.0}}, {0.5, 0.5}, {P{0.0}, P{2.0 / 3.0}}, {0.5, 0.5},
                        UtilitySpec::neg_distance(1));
}

PiecewiseDensityMarket uniform_halves() { return PiecewiseDensityMarket({-1, 0, 1}, {1, 0}, {0, 1}); }

}  // namespace

TEST_CASE("bound formulas") {
  CHECK(stability_bound(5.0) == doctest::Approx(std::log(2.0) / 5.0));
  CHECK(stability_bound(5.0, 3) == doctest::Approx(std::log(3.0) / 5.0));
  CHECK(egalitarian_eps_bound(-8.0) == doctest::Approx(std::log(8.0) / 8.0));
  CHECK(egalitarian_eps_bound(-2.0) == doctest::Approx(0.5));
  CHECK_FALSE(theoretical_eps(0.0).has_value());
}

TEST_CASE("stability_gap") {
  auto m = nonuniqueness_market();
  Coupling pi{{{0, 0, 0.5}, {1, 1, 0.5}}, 1.0};
  Coupling product{{{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}}, 1.0};
  CHECK(stability_gap(pi, m) == 0.0);
  CHECK(stability_gap(product, m) == 0.0);

  auto as = sample_line_matching(assortative_matching(uniform_halves()), 100);
  double g = stability_gap(as.coupling, as.market);
  CHECK(g == doctest::Approx(gap_oracle(as.coupling, utility_matrix(as.market))).epsilon(1e-12));
  // Pairs near 0 matched at distance 1 block each other: (x, x+1) and (x', x'+1)
  // with x near 0 and x' near -1 give x -> x'+1 at distance about 0. On the
  // 100-cell grid the best pair is x = -0.005, x' = -0.995, gap 1 - 0.01.
  CHECK(g == doctest::Approx(0.99).epsilon(1e-9));
  CHECK(g > 0.98 - 1e-12);

  Coupling empty;
  CHECK_THROWS_AS(stability_gap(empty, m), ValidationError);
}

TEST_CASE("stability_gap ignores float dust below the support threshold") {
  auto m = nonuniqueness_market();
  Coupling dusty{{{0, 0, 0.5}, {1, 1, 0.5}, {1, 0, 1e-15}}, 1.0};
  CHECK(stability_gap(dusty, m) == 0.0);
  Coupling c = support(dusty);
  CHECK(c.entries.size() == 2);
}

TEST_CASE("worst_blocking_pair") {
  auto t = table_market(DenseMatrix<double>::from_rows({{3, 1}, {2, 0}}), {0.5, 0.5}, {0.5, 0.5});
  Coupling bad{{{0, 1, 0.5}, {1, 0, 0.5}}, 1.0};
  auto w = worst_blocking_pair(bad, t);
  REQUIRE(w.has_value());
  CHECK(w->gap == doctest::Approx(1.0));  // u(x0, y0) = 3 versus max(1, 2)
  Coupling good{{{0, 0, 0.5}, {1, 1, 0.5}}, 1.0};
  CHECK_FALSE(worst_blocking_pair(good, t).has_value());
}

TEST_CASE("no_crossing_check") {
  CHECK(no_crossing_check(to_double_matching(stable_line_matching(
                              ExactPiecewiseMarket({parse_rational("-2"), parse_rational("-1"), parse_rational("0"),
                                                    parse_rational("1"), parse_rational("3")},
                                                   {Rational(1), Rational(0), Rational(2), Rational(0)},
                                                   {Rational(0), Rational(1), Rational(0), Rational(1)}))))
            .empty());
  auto as = no_crossing_check(assortative_matching(uniform_halves()));
  CHECK_FALSE(as.empty());
  // The explicit pairs (-0.75, 0.25) and (-0.25, 0.75) interlace: -0.75 < -0.25 < 0.25 < 0.75.
  double a1 = -0.75, b1 = 0.25, a2 = -0.25, b2 = 0.75;
  CHECK((a1 < a2 && a2 < b1 && b1 < b2));
  CHECK(no_crossing_check(stable_line_matching(uniform_halves())).empty());
  CHECK(no_crossing_check(stable_line_matching(PiecewiseDensityMarket({0, 1}, {1}, {1}))).empty());

  auto disc = discretize_line_market(uniform_halves(), 4);
  Coupling assortative{{{0, 0, 0.25}, {1, 1, 0.25}, {2, 2, 0.25}, {3, 3, 0.25}}, 1.0};
  CHECK_FALSE(no_crossing_check(assortative, disc).empty());
  Coupling anti{{{0, 3, 0.25}, {1, 2, 0.25}, {2, 1, 0.25}, {3, 0, 0.25}}, 1.0};
  CHECK(no_crossing_check(anti, disc).empty());
}

TEST_CASE("welfare") {
  using P = std::vector<double>;
  DiscreteMarket d({P{0}, P{1}}, {1, 1}, {P{0}, P{1}}, {1, 1}, UtilitySpec::neg_distance(1));
  CHECK(welfare(Coupling{{{0, 0, 1}, {1, 1, 1}}, 2}, d) == 0.0);
  auto m = nonuniqueness_market();
  CHECK(welfare(Coupling{{{0, 0, 0.5}, {1, 1, 0.5}}, 1}, m) == doctest::Approx(-1.0 / 3.0));
  CHECK(welfare(Coupling{{{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}}, 1}, m) == doctest::Approx(-0.5));
}

TEST_CASE("egalitarian_bound") {
  auto disc = discretize_line_market(uniform_halves(), 100);
  CHECK(egalitarian_bound(disc) == doctest::Approx(-1.0).epsilon(1e-12));
  using P = std::vector<double>;
  DiscreteMarket d({P{0}, P{1}}, {1, 1}, {P{0}, P{1}}, {1, 1}, UtilitySpec::neg_distance(1));
  CHECK(egalitarian_bound(d) == 0.0);
  CHECK(egalitarian_bound(nonuniqueness_market()) == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("egalitarian_bound matches the bottleneck oracle") {
  Rng rng(51);
  for (int t = 0; t < 60; ++t) {
    auto m = random_point_market(rng, rng.index(1, 9), rng.index(1, 9), rng.index(1, 2));
    CHECK(egalitarian_bound(m) == bottleneck_oracle(utility_matrix(m), m.x_masses(), m.y_masses()));
  }
  for (int t = 0; t < 30; ++t) {
    std::size_t n = rng.index(1, 7);
    auto m = random_point_market(rng, n, n, 2, true);
    auto u = utility_matrix(m);
    double best = -1e300;
    for (const auto& p : enumerate_permutations(u)) best = std::max(best, p.min_utility);
    CHECK(egalitarian_bound(m) == best);
  }
}

TEST_CASE("egalitarian_eps") {
  auto disc = discretize_line_market(uniform_halves(), 100);
  auto one = table_market(DenseMatrix<double>::from_rows({{1}}), {1}, {1});
  CHECK(egalitarian_eps(permutation_coupling(one, {0}), one, 1.0) == 0.0);
  auto st = sample_line_matching(stable_line_matching(uniform_halves()), 100);
  double e = egalitarian_eps(st.coupling, st.market, egalitarian_bound(disc));
  CHECK(std::abs(e - 1.0 / 3.0) <= 0.02);
  CHECK(e == doctest::Approx(egal_eps_oracle(st.coupling, utility_matrix(st.market), -1.0)).epsilon(1e-12));

  auto m = nonuniqueness_market();
  Coupling pi{{{0, 0, 0.5}, {1, 1, 0.5}}, 1.0};
  CHECK(egalitarian_eps(pi, m, -std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(egalitarian_eps(pi, m, egalitarian_bound(m)) == 0.0);
}

TEST_CASE("egalitarian_eps agrees with the oracle and is monotone under upward transfers") {
  Rng rng(52);
  for (int t = 0; t < 200; ++t) {
    std::size_t n = rng.index(1, 12);
    std::vector<std::pair<double, double>> um;
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      um.push_back({std::round(rng.uniform(-2, 1) * 8) / 8, rng.uniform(0.05, 1)});
      total += um.back().second;
    }
    double u_star = std::round(rng.uniform(-1, 1) * 8) / 8;
    double e = egalitarian_eps_scan(um, u_star);
    CHECK(e == doctest::Approx(egal_eps_oracle(um, u_star, total)).epsilon(1e-12));
    // Move some mass from the worst entry below the threshold to the best entry.
    auto lo = std::min_element(um.begin(), um.end());
    auto hi = std::max_element(um.begin(), um.end());
    if (lo != hi && lo->first < u_star && hi->first >= u_star) {
      double q = lo->second * rng.uniform(0, 1);
      lo->second -= q;
      hi->second += q;
      CHECK(egalitarian_eps_scan(um, u_star) <= e + 1e-15);
    }
  }
}

TEST_CASE("welfare_bound_check") {
  auto m = nonuniqueness_market();
  Coupling pi{{{0, 0, 0.5}, {1, 1, 0.5}}, 1.0};
  auto r = welfare_bound_check(pi, m, 0.0);
  CHECK(r.welfare_ok);
  CHECK(r.egalitarian_ok);
  // Shift by +1: u = [[2/3, 2/3], [0, 2/3]], W(pi) = 2/3 = W*.
  CHECK(r.welfare == doctest::Approx(2.0 / 3.0));
  CHECK(r.welfare_star == doctest::Approx(2.0 / 3.0));
  CHECK(r.welfare_margin == doctest::Approx(2.0 / 3.0 - 1.0 / 3.0));

  Rng rng(53);
  for (int t = 0; t < 20; ++t) {
    auto mm = random_point_market(rng, rng.index(2, 7), rng.index(2, 7), 2);
    auto opt = solve_transport(mm, CostSpec::neg_utility()).coupling;
    auto w = welfare_bound_check(opt, mm, 0.0);
    CHECK(w.welfare_ok);
    CHECK(w.welfare == doctest::Approx(w.welfare_star).epsilon(1e-9));
  }
}

TEST_CASE("brute_force_oracle") {
  auto m = nonuniqueness_market();
  auto b = brute_force_oracle(m);
  CHECK(b.greedy == Permutation{0, 1});
  CHECK(std::find(b.stable_set.begin(), b.stable_set.end(), Permutation{0, 1}) != b.stable_set.end());

  auto t = table_market(DenseMatrix<double>::from_rows({{3, 1}, {2, 0}}), {0.5, 0.5}, {0.5, 0.5});
  auto bt = brute_force_oracle(t);
  CHECK(bt.greedy == Permutation{0, 1});
  REQUIRE(bt.stable_set.size() == 1);
  CHECK(bt.stable_set[0] == Permutation{0, 1});

  auto one = table_market(DenseMatrix<double>::from_rows({{4}}), {1}, {1});
  auto b1 = brute_force_oracle(one);
  CHECK(b1.stable_set.size() == 1);
  CHECK(b1.welfare_opt == Permutation{0});
  CHECK(b1.bottleneck_value == 4.0);

  auto big = table_market(DenseMatrix<double>(9, 9), equal_masses(9), equal_masses(9));
  CHECK_THROWS_AS(brute_force_oracle(big), ValidationError);
  auto uneven = table_market(DenseMatrix<double>(2, 2), {0.25, 0.75}, {0.5, 0.5});
  CHECK_THROWS_AS(brute_force_oracle(uneven), ValidationError);
}

TEST_CASE("brute force and greedy agree with the independent enumerator") {
  Rng rng(54);
  for (int t = 0; t < 40; ++t) {
    std::size_t n = rng.index(1, 7);
    auto table = random_table(rng, n, n);
    auto m = table_market(table, equal_masses(n), equal_masses(n));
    auto b = brute_force_oracle(m);
    auto perms = enumerate_permutations(table);
    std::vector<Permutation> stable;
    double best_w = -1e300, best_min = -1e300;
    for (const auto& p : perms) {
      if (p.stable) stable.push_back(p.perm);
      best_w = std::max(best_w, p.welfare);
      best_min = std::max(best_min, p.min_utility);
    }
    auto sorted = b.stable_set;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == stable);
    CHECK(b.greedy == greedy_oracle(table));
    CHECK(b.greedy_is_stable);
    CHECK(b.welfare_opt_value == doctest::Approx(best_w).epsilon(1e-12));
    CHECK(b.bottleneck_value == best_min);
    CHECK(stability_gap(greedy_matching(m), m) == 0.0);
    CHECK(egalitarian_bound(m) == best_min);
    CHECK(-solve_transport(m, CostSpec::neg_utility()).objective == doctest::Approx(best_w).epsilon(1e-9));
  }
}

TEST_CASE("exactly stable matchings satisfy the halved welfare bound") {
  Rng rng(55);
  for (int t = 0; t < 30; ++t) {
    std::size_t n = rng.index(2, 6);
    auto table = random_table(rng, n, n, 0.0, 1.0);
    auto m = table_market(table, equal_masses(n), equal_masses(n));
    double w_star = -1e300;
    for (const auto& p : enumerate_permutations(table)) w_star = std::max(w_star, p.welfare);
    for (const auto& p : enumerate_permutations(table)) {
      if (!p.stable) continue;
      CHECK(p.welfare >= 0.5 * w_star - 1e-12);
      double u_star = bottleneck_oracle(table, equal_masses(n), equal_masses(n));
      CHECK(egal_eps_oracle(permutation_to_coupling(p.perm), table, u_star) <= 0.5 + 1e-12);
      auto r = welfare_bound_check(permutation_to_coupling(p.perm), m, 0.0);
      CHECK(r.welfare_ok);
      CHECK(r.egalitarian_ok);
    }
  }
}

TEST_CASE("audit_coupling") {
  auto m = nonuniqueness_market();
  auto base = market_baseline(m);
  CHECK(base.u_min_star == doctest::Approx(-1.0 / 3.0));
  CHECK(base.welfare_star == doctest::Approx(-1.0 / 3.0));
  auto r = audit_coupling(Coupling{{{0, 0, 0.5}, {1, 1, 0.5}}, 1.0}, m, base, 10.0);
  CHECK(r.stability_gap == 0.0);
  CHECK(r.welfare == doctest::Approx(-1.0 / 3.0));
  CHECK(r.egalitarian_eps == 0.0);
  CHECK(r.welfare_bound_ok);
  CHECK(*r.alpha == 10.0);
  CHECK(*r.theoretical_eps == doctest::Approx(std::log(2.0) / 10.0));
}
