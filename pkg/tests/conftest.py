"""Shared fixtures: small algebras used across the test suite."""

from __future__ import annotations

import pytest

from pathalg.quiver_core import Element, Quiver
from pathalg.reduction_engine import ReductionSystem, Rule


@pytest.fixture
def two_cycle():
    """The 2-cycle quiver with rules ab -> 0, ba -> 0."""
    q = Quiver(["1", "2"], [("a", "1", "2"), ("b", "2", "1")])
    R = ReductionSystem(q, [Rule(q.path("a", "b"), Element.zero(q)),
                            Rule(q.path("b", "a"), Element.zero(q))])
    return q, R


@pytest.fixture
def four_dim():
    """The one-vertex algebra on x, y with rules x^2, yx, y^2 -> 0."""
    q = Quiver(["0"], [("x", "0", "0"), ("y", "0", "0")])
    R = ReductionSystem(q, [Rule(q.path("x", "x"), Element.zero(q)),
                            Rule(q.path("y", "x"), Element.zero(q)),
                            Rule(q.path("y", "y"), Element.zero(q))])
    return q, R


@pytest.fixture
def nf_quiver():
    """The 4-vertex quiver with arrows x, y1, y2, z, w and rules xy1, y2z."""
    q = Quiver(["1", "2", "3", "4"],
               [("x", "1", "2"), ("y1", "2", "3"), ("y2", "2", "3"),
                ("z", "3", "4"), ("w", "2", "4")])
    R = ReductionSystem(q, [Rule(q.path("x", "y1"), Element.zero(q)),
                            Rule(q.path("y2", "z"), Element.zero(q))])
    return q, R


def make_brauer(n: int):
    """The zigzag special biserial algebra on vertices 1..n-1."""
    verts = [str(i) for i in range(1, n)]
    arrows = []
    for i in range(1, n - 1):
        arrows.append((f"x{i}", str(i), str(i + 1)))
        arrows.append((f"y{i}", str(i + 1), str(i)))
    q = Quiver(verts, arrows)
    rules = []
    for i in range(1, n - 2):
        rules.append(Rule(q.path(f"x{i}", f"x{i+1}"), Element.zero(q)))
        rules.append(Rule(q.path(f"y{i+1}", f"y{i}"), Element.zero(q)))
        rules.append(Rule(q.path(f"x{i+1}", f"y{i+1}"),
                          Element.from_path(q.path(f"y{i}", f"x{i}"))))
    rules.append(Rule(q.path("x1", "y1", "x1"), Element.zero(q)))
    rules.append(Rule(q.path("y1", "x1", "y1"), Element.zero(q)))
    return q, ReductionSystem(q, rules)
