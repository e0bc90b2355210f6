from fractions import Fraction
from math import comb

import pytest
from hypothesis import given

from hypermatch.fractional import (
    LPError,
    conjectured_cstar,
    has_perfect_fractional_matching,
    linprog_exact,
    max_fractional_matching,
    min_fractional_cover,
    witness_json,
)
from hypermatch.hypergraph import Hypergraph, max_matching
from hypermatch.instances import cover_barrier, space_barrier

from oracles import hypergraphs


def _check_witness(H, value, fm):
    assert fm.is_valid(H)
    assert fm.size == value


@pytest.mark.parametrize("n,k", [(6, 3), (7, 3), (8, 4), (5, 2)])
def test_complete_value(n, k):
    # [TRIVIAL] uniform weight 1/binom(n-1,k-1) saturates every vertex
    H = Hypergraph.complete(n, k)
    value, fm = max_fractional_matching(H)
    assert value == Fraction(n, k)
    _check_witness(H, value, fm)
    uniform = Fraction(1, comb(n - 1, k - 1))
    assert uniform * len(H.edges) == value


def test_cover_barrier_9_value():
    # [DERIVED] every edge meets |W| = 2 vertices, so the value is at most 2
    H = cover_barrier(9, 3)
    value, fm = max_fractional_matching(H)
    assert value == 2
    _check_witness(H, value, fm)


def test_single_edge():
    value, _ = max_fractional_matching(Hypergraph(3, 3, ((0, 1, 2),)))
    assert value == 1


def test_edgeless():
    value, fm = max_fractional_matching(Hypergraph.empty(5, 3))
    assert value == 0 and fm.weights == {}


def test_perfect_fractional_examples():
    assert has_perfect_fractional_matching(Hypergraph.complete(6, 3))
    assert not has_perfect_fractional_matching(cover_barrier(9, 3))
    # [DERIVED] divisibility barriers do not block fractional matchings
    H = space_barrier(6, 3)
    assert has_perfect_fractional_matching(H)
    _check_witness(H, *max_fractional_matching(H))


def test_cstar_values():
    assert conjectured_cstar(3, 2) == Fraction(1, 3)
    assert conjectured_cstar(3, 1) == Fraction(5, 9)
    assert conjectured_cstar(5, 2) == Fraction(61, 125)


@pytest.mark.parametrize("ell", [0, 3])
def test_cstar_range(ell):
    with pytest.raises(ValueError):
        conjectured_cstar(3, ell)


@pytest.mark.parametrize("n", [6, 9, 12, 15])
def test_cover_barrier_value_family(n):
    H = cover_barrier(n, 3)
    assert max_fractional_matching(H)[0] == Fraction(n, 3) - 1


def test_witness_json_strings():
    _, fm = max_fractional_matching(Hypergraph(3, 3, ((0, 1, 2),)))
    assert witness_json(fm) == {"0 1 2": "1"}


def test_linprog_small():
    # max x + y, x + 2y <= 4, 3x + y <= 6  ->  x = 8/5, y = 6/5
    value, x = linprog_exact([1, 1], [[1, 2], [3, 1]], [4, 6])
    assert value == Fraction(14, 5) and x == [Fraction(8, 5), Fraction(6, 5)]


def test_linprog_phase_one():
    # min x subject to x >= 2  (as max -x, -x <= -2)
    value, x = linprog_exact([-1], [[-1]], [-2])
    assert value == -2 and x == [2]


def test_linprog_infeasible_and_unbounded():
    with pytest.raises(LPError):
        linprog_exact([1], [[1], [-1]], [1, -2])
    with pytest.raises(LPError):
        linprog_exact([1, 0], [[-1, 1]], [1])


@given(hypergraphs(n_min=3, n_max=8))
def test_duality_and_integral_bound(H):
    value, fm = max_fractional_matching(H)
    _check_witness(H, value, fm)
    cover, y = min_fractional_cover(H)
    assert cover == value
    assert all(w >= 0 for w in y)
    assert all(sum(y[v] for v in e) >= 1 for e in H.edges)
    assert value >= len(max_matching(H))
    assert value <= Fraction(H.n, H.k)
