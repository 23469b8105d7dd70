#include "support.hpp"

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

ExactDiscreteMarket exact_nonuniqueness_market() {
  using P = std::vector<Rational>;
  return ExactDiscreteMarket({P{R("1/3")}, P{R("1")}}, {R("1/2"), R("1/2")}, {P{R("0")}, P{R("2/3")}},
                             {R("1/2"), R("1/2")}, BasicUtilitySpec<Rational>::neg_distance(1));
}

DiscreteMarket diagonal_market() {
  using P = std::vector<double>;
  return DiscreteMarket({P{0}, P{1}, P{2}}, {1, 1, 1}, {P{0}, P{1}, P{2}}, {1, 1, 1}, UtilitySpec::neg_distance(1));
}

bool same_support(const Coupling& c, std::vector<std::pair<std::size_t, std::size_t>> want) {
  std::vector<std::pair<std::size_t, std::size_t>> got;
  for (const auto& e : support_of(c)) got.push_back({e.x, e.y});
  std::sort(got.begin(), got.end());
  std::sort(want.begin(), want.end());
  return got == want;
}

}  // namespace

TEST_CASE("cost_eval") {
  for (double a : {-5.0, -0.1, 0.0, 0.3, 7.0}) CHECK(cost_eval(CostSpec::alpha(a), 0.0) == 0.0);
  for (double u = -5.0; u <= 5.0; u += 0.25) {
    // (1 - e^{a u}) / a = -u - a u^2 / 2 - ..., so the gap to -u is a u^2 / 2 up
    // to higher order: below 1e-7 for |u| <= 4 and 1.25e-7 at |u| = 5.
    double err = std::abs(cost_eval(CostSpec::alpha(1e-8), u) - (-u));
    CHECK(err <= 1e-8 * u * u / 2 * (1 + 1e-6) + 1e-15);
    if (std::abs(u) <= 4.0) CHECK(err <= 1e-7);
    CHECK(cost_eval(CostSpec::alpha(0.0), u) == -u);
    CHECK(cost_eval(CostSpec::neg_utility(), u) == -u);
  }
  CHECK(cost_eval(CostSpec::alpha(std::log(2.0)), 1.0) == doctest::Approx(-1.0 / std::log(2.0)).epsilon(1e-15));
  CHECK(cost_eval(CostSpec::alpha(std::log(2.0)), 1.0) == doctest::Approx(-1.442695).epsilon(1e-6));
  CHECK_THROWS_AS(cost_eval(CostSpec::alpha(800.0), 1.0), OverflowError);
}

TEST_CASE("general_h validation") {
  CHECK_NOTHROW(validate_general_h(CostSpec::general_h(HForm::kExp, 2.0, 2.0), -1, 1));
  CHECK_THROWS_AS(validate_general_h(CostSpec::general_h(HForm::kExp, 2.0, 3.0), -1, 1), ValidationError);
  CHECK_NOTHROW(validate_general_h(CostSpec::general_h(HForm::kPower, 2.0, 1.0), 0.5, 2.0));
  CHECK_THROWS_AS(validate_general_h(CostSpec::general_h(HForm::kPower, 2.0, 1.0), -0.5, 2.0), ValidationError);
}

TEST_CASE("diagonal market gives the identity at every alpha") {
  auto m = diagonal_market();
  for (double a : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
    auto r = solve_transport(m, CostSpec::alpha(a));
    CHECK(same_support(r.coupling, {{0, 0}, {1, 1}, {2, 2}}));
    CHECK(r.objective == doctest::Approx(0.0));
  }
}

TEST_CASE("non-uniqueness market") {
  auto m = nonuniqueness_market();
  auto u = utility_matrix(m);
  SUBCASE("alpha = 10 picks the deterministic matching") {
    auto r = solve_transport(m, CostSpec::alpha(10.0));
    CHECK(same_support(r.coupling, {{0, 0}, {1, 1}}));
    for (const auto& e : r.coupling.entries) CHECK(e.mass == doctest::Approx(0.5));
  }
  SUBCASE("alpha = 0 maximises welfare; the swapped matching is worse") {
    auto r = solve_transport(m, CostSpec::alpha(0.0));
    CHECK(welfare_oracle(r.coupling, u) == doctest::Approx(-1.0 / 3.0));
    // pi: 1/3 -> 0, 1 -> 2/3, both at distance 1/3. pi' splits every agent evenly:
    // 1/4 (-1/3 - 1/3 - 1 - 1/3) = -1/2.
    CHECK(welfare_oracle(permutation_to_coupling({0, 1}), u) == doctest::Approx(-1.0 / 3.0));
    Coupling product{{{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}}, 1.0};
    CHECK(welfare_oracle(product, u) == doctest::Approx(-0.5));
    CHECK(gap_oracle(product, u) == 0.0);
  }
  SUBCASE("exact mode") {
    auto r = solve_transport(exact_nonuniqueness_market(), CostSpec::neg_utility());
    CHECK(r.objective == R("1/3"));
    CHECK_THROWS_AS(solve_transport(exact_nonuniqueness_market(), CostSpec::alpha(1.0)), ValidationError);
  }
}

TEST_CASE("solve rejects infinite cost ranges") {
  using P = std::vector<double>;
  DiscreteMarket m({P{0}, P{100}}, {0.5, 0.5}, {P{0}, P{100}}, {0.5, 0.5}, UtilitySpec::neg_distance(1));
  CHECK_THROWS_AS(solve_transport(m, CostSpec::alpha(10.0)), OverflowError);
  CHECK_NOTHROW(solve_transport(m, CostSpec::alpha(6.0)));
}

TEST_CASE("alpha = 0 and neg_utility agree") {
  Rng rng(21);
  for (int t = 0; t < 30; ++t) {
    auto m = random_point_market(rng, rng.index(2, 9), rng.index(2, 9), rng.index(1, 3));
    auto a = solve_transport(m, CostSpec::alpha(0.0));
    auto b = solve_transport(m, CostSpec::neg_utility());
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
  }
}

TEST_CASE("basic solutions, marginals, objective and dual certificate") {
  Rng rng(22);
  for (int t = 0; t < 40; ++t) {
    std::size_t nx = rng.index(1, 10), ny = rng.index(1, 10);
    auto m = random_point_market(rng, nx, ny, rng.index(1, 2));
    double alpha = std::vector<double>{-20, -3, 0, 2, 15}[rng.index(0, 4)];
    auto c = CostSpec::alpha(alpha);
    auto r = solve_transport(m, c);
    CHECK_NOTHROW(validate_coupling(r.coupling, m));
    CHECK(support_of(r.coupling).size() <= nx + ny - 1);

    double obj = 0.0;
    auto u = utility_matrix(m);
    for (const auto& e : r.coupling.entries) {
      obj += e.mass * (alpha == 0 ? -u(e.x, e.y) : (1 - std::exp(alpha * u(e.x, e.y))) / alpha);
    }
    CHECK(r.objective == doctest::Approx(obj).epsilon(1e-9));

    auto w = working_cost(m, c);
    double scale = 1.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) CHECK(r.phi[i] + r.psi[j] <= w[i * ny + j] + 1e-7 * scale);
    }
    for (const auto& e : support_of(r.coupling)) {
      CHECK(std::abs(r.phi[e.x] + r.psi[e.y] - w[e.x * ny + e.y]) <= 1e-7 * scale);
    }
  }
}

TEST_CASE("general_h with exp matches the alpha family") {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    auto m = random_point_market(rng, rng.index(2, 7), rng.index(2, 7), 2);
    double a = rng.uniform(0.5, 6.0);
    auto ra = solve_transport(m, CostSpec::alpha(a));
    auto rh = solve_transport(m, CostSpec::general_h(HForm::kExp, a, a));
    // c_alpha = (1 - e^{a u}) / a. With h = e^{a t} the cost is -e^{a u}, so the
    // objectives satisfy obj_alpha = (total + obj_h) / a; with h = -e^{a t} the
    // cost is e^{a u} and obj_alpha = (total - obj_h) / a.
    CHECK(ra.objective == doctest::Approx((m.total_mass() + rh.objective) / a).epsilon(1e-9));
    auto ra_neg = solve_transport(m, CostSpec::alpha(-a));
    auto rh_neg = solve_transport(m, CostSpec::general_h(HForm::kNegExp, -a, -a));
    CHECK(ra_neg.objective == doctest::Approx((m.total_mass() - rh_neg.objective) / -a).epsilon(1e-9));
  }
}

TEST_CASE("large alpha spans switch to extended precision") {
  Rng rng(24);
  auto m = random_point_market(rng, 6, 6, 1);
  auto r = solve_transport(m, CostSpec::alpha(600.0));
  CHECK(r.working_digits > 0);
  CHECK(digits_for_span(1.0) == 0);
  CHECK(digits_for_span(600.0) > 0);
  CHECK(gap_oracle(r.coupling, utility_matrix(m)) <= std::log(2.0) / 600.0 + 1e-9);
}

TEST_CASE("equal-mass welfare optimum is a permutation optimum") {
  Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    std::size_t n = rng.index(2, 6);
    auto m = random_point_market(rng, n, n, 2, true);
    auto u = utility_matrix(m);
    double best = -1e300;
    for (const auto& p : enumerate_permutations(u)) best = std::max(best, p.welfare);
    CHECK(-solve_transport(m, CostSpec::neg_utility()).objective == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("alpha_sweep") {
  Rng rng(26);
  auto m = random_point_market(rng, 8, 8, 2);
  std::vector<double> alphas{-5, 0, 5};
  auto rows = alpha_sweep(m, alphas);
  REQUIRE(rows.size() == 3);
  CHECK(*rows[0].theoretical_eps == doctest::Approx(std::max(1.0, std::log(5.0)) / 5.0));
  CHECK(*rows[0].theoretical_eps == doctest::Approx(0.3219).epsilon(1e-4));
  CHECK_FALSE(rows[1].theoretical_eps.has_value());
  CHECK(*rows[2].theoretical_eps == doctest::Approx(0.1386).epsilon(1e-3));
  auto u = utility_matrix(m);
  CHECK(gap_oracle(rows[2].report->coupling, u) <= std::log(2.0) / 5.0 + 1e-9);

  std::vector<double> reversed{5, 0, -5};
  auto back = alpha_sweep(m, reversed, 1);
  CHECK(back[0].report->coupling == rows[2].report->coupling);
  CHECK(back[2].report->coupling == rows[0].report->coupling);

  auto neg = alpha_sweep(m, std::vector<double>{-8.0});
  double u_star = bottleneck_oracle(u, m.x_masses(), m.y_masses());
  CHECK(egal_eps_oracle(neg[0].report->coupling, u, u_star) <= std::max(1.0, std::log(8.0)) / 8.0 + 1e-9);
  CHECK(*neg[0].theoretical_eps == doctest::Approx(0.2599).epsilon(1e-4));

  // A failing alpha is reported in its row; the others still run.
  using P = std::vector<double>;
  DiscreteMarket wide({P{0}, P{100}}, {0.5, 0.5}, {P{0}, P{100}}, {0.5, 0.5}, UtilitySpec::neg_distance(1));
  auto mixed = alpha_sweep(wide, std::vector<double>{1.0, 50.0});
  CHECK(mixed[0].error.empty());
  CHECK_FALSE(mixed[1].error.empty());
}

TEST_CASE("stable_limit") {
  SUBCASE("non-uniqueness market") {
    auto m = nonuniqueness_market();
    auto r = stable_limit(m);
    // delta = 2/3 for this market, so alpha = 2 ln 2 / delta = 3 ln 2.
    CHECK(r.alpha == doctest::Approx(3.0 * std::log(2.0)));
    CHECK(same_support(r.coupling, {{0, 0}, {1, 1}}));
    auto u = utility_matrix(m);
    CHECK(gap_oracle(r.coupling, u) == 0.0);
    bool found = false;
    for (const auto& p : enumerate_permutations(u)) found = found || (p.perm == std::vector<std::size_t>{0, 1} && p.stable);
    CHECK(found);
  }
  SUBCASE("diagonal market") {
    auto r = stable_limit(diagonal_market());
    CHECK(same_support(r.coupling, {{0, 0}, {1, 1}, {2, 2}}));
  }
  SUBCASE("distinct utilities give the greedy matching") {
    Rng rng(27);
    for (int t = 0; t < 20; ++t) {
      auto table = random_distinct_table(rng, 3, 3);
      auto m = table_market(table, equal_masses(3), equal_masses(3));
      auto r = stable_limit(m);
      CHECK(coupling_to_permutation(r.coupling, 3) == greedy_oracle(table));
      CHECK(gap_oracle(r.coupling, table) == 0.0);
    }
  }
  SUBCASE("a gap too small for the exponent guard is reported") {
    auto m = table_market(DenseMatrix<double>::from_rows({{0, 1e-3}, {1, 2}}), {0.5, 0.5}, {0.5, 0.5});
    CHECK_THROWS_AS(stable_limit(m), OverflowError);
  }
  SUBCASE("all-equal utilities fall back to escalation") {
    auto m = table_market(DenseMatrix<double>::from_rows({{1, 1}, {1, 1}}), {0.5, 0.5}, {0.5, 0.5});
    auto r = stable_limit(m);
    CHECK(gap_oracle(r.coupling, utility_matrix(m)) == 0.0);
  }
}

TEST_CASE("check_cyclic_monotone") {
  auto m = nonuniqueness_market();
  auto c = CostSpec::alpha(10.0);
  CHECK_FALSE(check_cyclic_monotone(solve_transport(m, c).coupling, m, c, 2).has_value());
  Coupling swapped{{{0, 1, 0.5}, {1, 0, 0.5}}, 1.0};
  auto w = check_cyclic_monotone(swapped, m, c, 2);
  REQUIRE(w.has_value());
  CHECK(w->entries.size() == 2);
  // 2c(1/3) versus c(1/3) + c(1) with c(d) = (1 - e^{-10 d}) / 10.
  double cc = [](double d) { return (1 - std::exp(-10 * d)) / 10; }(1.0);
  double c3 = (1 - std::exp(-10.0 / 3.0)) / 10;
  CHECK(w->excess == doctest::Approx(cc - c3).epsilon(1e-9));
  Coupling single{{{0, 0, 1.0}}, 1.0};
  auto one = table_market(DenseMatrix<double>::from_rows({{1}}), {1.0}, {1.0});
  CHECK_FALSE(check_cyclic_monotone(single, one, c, 4).has_value());

  Rng rng(28);
  for (int t = 0; t < 20; ++t) {
    auto mm = random_point_market(rng, 5, 5, 2);
    auto cs = CostSpec::alpha(rng.uniform(-10, 10));
    CHECK_FALSE(check_cyclic_monotone(solve_transport(mm, cs).coupling, mm, cs, 4).has_value());
  }
}
