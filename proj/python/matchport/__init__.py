"""Stable matching through entropic optimal transport.

Couplings are lists of ``(x, y, mass)`` tuples. Exact values from the line
solver and the potential builder come back as :class:`fractions.Fraction`.
"""

from fractions import Fraction

from ._matchport import (
    DiscreteMarket,
    KMarket,
    OverflowError,
    SolverError,
    ValidationError,
    check_acyclicity,
    egalitarian_bound,
    egalitarian_eps,
    egalitarian_eps_bound,
    greedy_matching,
    load_discrete_market,
    parse_market,
    solve_k_transport,
    solve_transport,
    stability_bound,
    stability_gap,
    stable_limit,
    welfare,
)
from . import _matchport as _core

__all__ = [
    "DiscreteMarket",
    "KMarket",
    "OverflowError",
    "SolverError",
    "ValidationError",
    "assortative_matching",
    "build_potential",
    "check_acyclicity",
    "egalitarian_bound",
    "egalitarian_eps",
    "egalitarian_eps_bound",
    "greedy_matching",
    "load_discrete_market",
    "parse_market",
    "solve_k_transport",
    "solve_transport",
    "stability_bound",
    "stability_gap",
    "stable_limit",
    "stable_line_matching",
    "welfare",
]


def _text(values):
    return [str(v) for v in values]


def _fractions(pieces):
    return [{k: (v if k == "kind" else Fraction(v)) for k, v in p.items()} for p in pieces]


def stable_line_matching(breakpoints, f, g):
    """Exact stable matching of a piecewise-uniform line market.

    Returns diagonal and Monge pieces; a Monge piece sends x in [lo, hi) to
    slope * x + intercept.
    """
    return _fractions(_core.stable_line_matching(_text(breakpoints), _text(f), _text(g)))


def assortative_matching(breakpoints, f, g):
    return _fractions(_core.assortative_matching(_text(breakpoints), _text(f), _text(g)))


def build_potential(x_rank, y_rank):
    """Potential table for an acyclic preference profile."""
    return [[Fraction(v) for v in row] for row in _core.build_potential(x_rank, y_rank)]
