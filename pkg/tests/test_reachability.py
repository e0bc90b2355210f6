from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from hypermatch.hypergraph import Hypergraph
from hypermatch.instances import lattice_barrier, space_barrier
from hypermatch.reachability import (
    ReachabilityParams,
    ReachabilityTable,
    is_closed,
    is_reachable,
    reachable_count,
    reachable_neighborhood,
)

from oracles import brute_reach_count, hypergraphs

K6 = Hypergraph.complete(6, 3)
EMPTY = Hypergraph.empty(6, 3)
P10 = ReachabilityParams(Fraction(1, 10))


def test_count_complete():
    # [DERIVED] any 2-subset of the other four vertices; binom(4,2)
    assert reachable_count(K6, 0, 1) == brute_reach_count(K6, 0, 1) == 6


def test_count_edgeless():
    assert reachable_count(EMPTY, 0, 1) == 0
    assert reachable_count(EMPTY, 0, 1, i=2) == 0


def test_count_depth_two():
    # every 5-subset of the other six vertices; binom(6,5)
    H = Hypergraph.complete(8, 3)
    assert reachable_count(H, 0, 1, i=2) == brute_reach_count(H, 0, 1, i=2) == 6


def test_reachable_thresholds():
    # 6 >= 36/10 but 6 < 36/2
    assert is_reachable(K6, 0, 1, P10)
    assert not is_reachable(K6, 0, 1, ReachabilityParams(Fraction(1, 2)))
    assert not is_reachable(EMPTY, 0, 1, ReachabilityParams(Fraction(1, 1000)))


def test_ambient_threshold_uses_ambient_size():
    # inside A = {0..4} the count is binom(3,2) = 3 and the bar is beta * 5^2
    A = range(5)
    assert reachable_count(K6, 0, 1, ambient=A) == 3
    assert is_reachable(K6, 0, 1, ReachabilityParams(Fraction(3, 25)), ambient=A)
    assert not is_reachable(K6, 0, 1, ReachabilityParams(Fraction(4, 25)), ambient=A)
    # the same count measured against the host size
    table = ReachabilityTable(K6, A, scale=6)
    assert not table.is_reachable(0, 1, ReachabilityParams(Fraction(3, 25)))


def test_neighborhood_examples():
    assert reachable_neighborhood(K6, 0, P10) == [1, 2, 3, 4, 5]
    assert reachable_neighborhood(EMPTY, 0, P10) == []


def test_closed_examples():
    assert is_closed(EMPTY, [3], P10)
    assert is_closed(K6, range(6), P10)
    # [DERIVED] nothing crosses between the two components
    H = lattice_barrier((3, 3), 3, [(3, 0), (0, 3)])
    assert not is_closed(H, range(6), ReachabilityParams(Fraction(1, 1000)))
    assert ReachabilityTable(H).unreachable_pair(range(6), ReachabilityParams(Fraction(1, 1000))) == (0, 1)


def test_count_errors():
    with pytest.raises(ValueError):
        reachable_count(K6, 2, 2)
    with pytest.raises(ValueError):
        reachable_count(K6, 0, 5, ambient=range(4))


@pytest.mark.parametrize("beta,i", [(Fraction(0), 1), (Fraction(3, 2), 1), (Fraction(1, 2), 0)])
def test_params_validation(beta, i):
    with pytest.raises(ValueError):
        ReachabilityParams(beta, i)


def test_space_barrier_x_and_y_not_reachable():
    # (2,0)-type links of an X vertex and (1,1)-type links of a Y vertex never meet
    H = space_barrier(6, 3)
    assert reachable_count(H, 0, 3) == brute_reach_count(H, 0, 3) == 0
    assert reachable_count(H, 3, 4) == brute_reach_count(H, 3, 4) > 0


# ---- properties -------------------------------------------------------------


@given(hypergraphs(n_min=4, n_max=8), st.data())
def test_count_matches_double_loop(H, data):
    u, v = data.draw(st.lists(st.integers(0, H.n - 1), min_size=2, max_size=2, unique=True))
    assert reachable_count(H, u, v) == brute_reach_count(H, u, v)
    assert reachable_count(H, u, v) == reachable_count(H, v, u)


@given(hypergraphs(n_min=6, n_max=7, max_edges=20), st.data())
def test_depth_two_matches_double_loop(H, data):
    u, v = data.draw(st.lists(st.integers(0, H.n - 1), min_size=2, max_size=2, unique=True))
    assert reachable_count(H, u, v, i=2) == brute_reach_count(H, u, v, i=2)


@given(hypergraphs(n_min=4, n_max=8), st.data())
def test_restriction_monotone(H, data):
    u, v = data.draw(st.lists(st.integers(0, H.n - 1), min_size=2, max_size=2, unique=True))
    extra = data.draw(st.sets(st.integers(0, H.n - 1)))
    small = sorted({u, v} | extra)
    assert reachable_count(H, u, v, ambient=small) <= reachable_count(H, u, v)
    assert reachable_count(H, u, v, ambient=small) == brute_reach_count(H, u, v, ambient=small)


@given(hypergraphs(n_min=4, n_max=8), st.fractions(Fraction(1, 500), 1), st.fractions(Fraction(1, 500), 1))
def test_beta_monotone(H, b1, b2):
    lo, hi = sorted((b1, b2))
    for u, v in combinations(range(H.n), 2):
        if not is_reachable(H, u, v, ReachabilityParams(lo)):
            assert not is_reachable(H, u, v, ReachabilityParams(hi))


@given(hypergraphs(n_min=4, n_max=8), st.fractions(Fraction(1, 500), Fraction(1, 5)))
def test_neighborhood_symmetric(H, beta):
    p = ReachabilityParams(beta)
    table = ReachabilityTable(H)
    nbhd = {v: set(table.neighborhood(v, p)) for v in range(H.n)}
    for u in range(H.n):
        for v in nbhd[u]:
            assert u in nbhd[v]
