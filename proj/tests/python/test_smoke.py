import math
from fractions import Fraction

import pytest

import matchport as mp


def two_stable_market():
    return mp.DiscreteMarket.from_points([[1 / 3], [1.0]], [0.5, 0.5], [[0.0], [2 / 3]], [0.5, 0.5], p=1.0)


def test_large_alpha_picks_the_diagonal_coupling():
    m = two_stable_market()
    r = mp.solve_transport(m, alpha=10.0)
    support = sorted((x, y) for x, y, mass in r["coupling"] if mass > 1e-9)
    assert support == [(0, 0), (1, 1)]
    assert mp.stability_gap(r["coupling"], m) == 0.0
    assert mp.welfare(r["coupling"], m) == pytest.approx(-1 / 3)


def test_stability_bound_on_a_random_market():
    import random

    rng = random.Random(3)
    xs = [[rng.random(), rng.random()] for _ in range(6)]
    ys = [[rng.random(), rng.random()] for _ in range(6)]
    m = mp.DiscreteMarket.from_points(xs, [1 / 6] * 6, ys, [1 / 6] * 6)
    for alpha in (1.0, 5.0):
        r = mp.solve_transport(m, alpha=alpha)
        assert mp.stability_gap(r["coupling"], m) <= math.log(2) / alpha + 1e-9
    u_star = mp.egalitarian_bound(m)
    r = mp.solve_transport(m, alpha=-8.0)
    assert mp.egalitarian_eps(r["coupling"], m, u_star) <= mp.egalitarian_eps_bound(-8.0) + 1e-9


def test_stable_limit_matches_greedy():
    m = mp.DiscreteMarket.from_table([[0.9, 0.1], [0.5, 0.3]], [0.5, 0.5], [0.5, 0.5])
    r = mp.stable_limit(m)
    chosen = sorted((x, y) for x, y, mass in r["coupling"] if mass > 1e-9)
    greedy = sorted((x, y) for x, y, mass in mp.greedy_matching(m))
    assert chosen == greedy == [(0, 0), (1, 1)]


def test_line_solver_is_exact():
    pieces = mp.stable_line_matching([-2, -1, 0, 1, 3], [1, 0, 2, 0], [0, 1, 0, 1])
    monge = [(p["lo"], p["hi"], p["slope"], p["intercept"]) for p in pieces if p["kind"] == "monge"]
    assert monge == [
        (Fraction(-2), Fraction(-10, 7), -1, 1),
        (Fraction(-10, 7), -1, -1, -2),
        (0, Fraction(2, 7), -2, 0),
        (Fraction(2, 7), 1, -2, 3),
    ]
    assort = mp.assortative_matching([-1, 0, 1], [1, 0], [0, 1])
    assert [(p["slope"], p["intercept"]) for p in assort] == [(1, 1)]


def test_three_sided_market():
    k = mp.KMarket([[1.0], [1.0], [1.0]], [-0.5])
    r = mp.solve_k_transport(k, alpha=5.0)
    assert r["coupling"] == [([0, 0, 0], pytest.approx(1.0))]
    assert r["stability_gap"] == 0.0


def test_ordinal_alignment():
    assert mp.check_acyclicity([[0, 1], [1, 0]], [[1, 0], [0, 1]]) is not None
    u = mp.build_potential([[0, 1], [1, 0]], [[0, 1], [1, 0]])
    assert u[0][0] > u[0][1] and u[1][1] > u[1][0]
    with pytest.raises(mp.ValidationError):
        mp.build_potential([[0, 1], [1, 0]], [[1, 0], [0, 1]])


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        mp.DiscreteMarket.from_table([[1.0]], [1.0], [2.0])
    with pytest.raises(mp.ValidationError):
        mp.parse_market('{"schema": "matchport/1", "kind": "pyramid"}')
    tiny = mp.DiscreteMarket.from_table([[1.0, 0.999999], [0.0, 1.0]], [0.5, 0.5], [0.5, 0.5])
    with pytest.raises(mp.OverflowError):
        mp.stable_limit(tiny)
    assert issubclass(mp.OverflowError, mp.SolverError)
