from fractions import Fraction
from itertools import combinations
from math import comb

import pytest
from hypothesis import given, strategies as st

from hypermatch.hypergraph import (
    Hypergraph,
    degree,
    density_bound,
    induced,
    is_matching,
    is_perfect_matching,
    max_matching,
    min_l_degree,
    parse_text,
    perfect_matching_oracle,
    to_text,
)
from hypermatch.instances import space_barrier

from oracles import brute_degree, brute_has_pm, brute_matching_number, hypergraphs

K6 = Hypergraph.complete(6, 3)
SPACE6 = space_barrier(6, 3)


# ---- degree -----------------------------------------------------------------


def test_degree_complete():
    # [TRIVIAL] binom(n - l, k - l) = binom(4, 1)
    assert degree(K6, (0, 1)) == 4


def test_degree_of_an_edge_is_positive():
    # [TRIVIAL] an edge contains itself
    for e in SPACE6.edges:
        assert degree(SPACE6, e) >= 1


def test_degree_space_barrier_pair_in_y():
    # [DERIVED] third vertex must come from X
    assert degree(SPACE6, (3, 4)) == brute_degree(SPACE6, (3, 4)) == 3


def test_degree_rejects_oversized_set():
    with pytest.raises(ValueError):
        degree(K6, (0, 1, 2, 3))


# ---- minimum l-degree -------------------------------------------------------


@pytest.mark.parametrize("n,k,ell", [(6, 3, 1), (6, 3, 2), (7, 3, 0), (8, 4, 2), (9, 3, 2)])
def test_min_degree_complete(n, k, ell):
    # [TRIVIAL]
    H = Hypergraph.complete(n, k)
    assert min_l_degree(H, ell) == comb(n - ell, k - ell)


def test_min_degree_edgeless():
    assert min_l_degree(Hypergraph.empty(6, 3), 2) == 0


def test_min_degree_space_barrier():
    # [DERIVED] brute-force min over all 2-sets
    expected = min(brute_degree(SPACE6, S) for S in combinations(range(6), 2))
    assert min_l_degree(SPACE6, 2) == expected == 1


def test_min_degree_ell_zero_counts_edges():
    assert min_l_degree(SPACE6, 0) == len(SPACE6.edges)


@pytest.mark.parametrize("ell", [-1, 3])
def test_min_degree_range(ell):
    with pytest.raises(ValueError):
        min_l_degree(K6, ell)


def test_density_bound_rounds_up():
    assert density_bound(6, 3, 2) == 4


# ---- oracle -----------------------------------------------------------------


def test_oracle_complete_k6():
    pm = perfect_matching_oracle(K6)
    assert pm is not None and len(pm) == 2 and is_perfect_matching(K6, pm)


def test_oracle_space_barrier_has_no_pm():
    # [PAPER] the space barrier has no perfect matching
    assert perfect_matching_oracle(SPACE6) is None


def test_oracle_indivisible():
    assert perfect_matching_oracle(Hypergraph.complete(7, 3)) is None


def test_oracle_deterministic():
    H = space_barrier(9, 3)
    assert perfect_matching_oracle(H) == perfect_matching_oracle(Hypergraph(H.n, H.k, H.edges))


# ---- maximum matching -------------------------------------------------------


def test_max_matching_edgeless():
    assert max_matching(Hypergraph.empty(6, 3)) == []


def test_max_matching_space_barrier():
    # [DERIVED] any matching covers an even number of Y vertices
    M = max_matching(SPACE6)
    assert len(M) == brute_matching_number(SPACE6) == 1


def test_max_matching_k9():
    assert len(max_matching(Hypergraph.complete(9, 3))) == 3


# ---- induced ----------------------------------------------------------------


def test_induced_all_vertices_is_identity():
    H2, labels = induced(SPACE6, range(6))
    assert H2 == SPACE6 and labels == list(range(6))


def test_induced_single_edge():
    H2, _ = induced(K6, (0, 1, 2))
    assert H2.n == 3 and H2.edges == ((0, 1, 2),)


def test_induced_space_barrier_x_plus_one():
    # [DERIVED] edges of X + {3} with an even count in {3}: only X itself
    H2, labels = induced(SPACE6, (0, 1, 2, 3))
    assert labels == [0, 1, 2, 3]
    assert H2.edges == ((0, 1, 2),)


# ---- text format ------------------------------------------------------------


def test_text_round_trip():
    assert parse_text(to_text(SPACE6)) == SPACE6


@pytest.mark.parametrize(
    "text",
    [
        "3 4 2\n0 1 2\n2 1 0\n",  # duplicate
        "3 4 1\n0 1 4\n",  # out of range
        "3 4 2\n0 1 2\n",  # wrong count
        "3 4 1\n0 0 1\n",  # repeated vertex
    ],
)
def test_parser_rejects(text):
    with pytest.raises(ValueError):
        parse_text(text)


def test_constructor_validates():
    with pytest.raises(ValueError):
        Hypergraph(4, 3, ((0, 2, 1),))
    with pytest.raises(ValueError):
        Hypergraph(4, 1, ())


# ---- properties -------------------------------------------------------------


@given(hypergraphs(n_max=9), st.data())
def test_degree_monotonicity(H, data):
    ell2 = data.draw(st.integers(0, H.k - 1))
    ell1 = data.draw(st.integers(0, ell2))
    if H.n < H.k:
        return
    x = Fraction(min_l_degree(H, ell2), comb(H.n - ell2, H.k - ell2))
    assert min_l_degree(H, ell1) >= x * comb(H.n - ell1, H.k - ell1)


@given(hypergraphs(n_max=10))
def test_oracle_matches_subset_dp(H):
    pm = perfect_matching_oracle(H)
    assert (pm is not None) == brute_has_pm(H)
    if pm is not None:
        assert is_perfect_matching(H, pm)


@given(hypergraphs(n_max=10))
def test_oracle_iff_max_matching_covers_all(H):
    M = max_matching(H)
    assert is_matching(H, M)
    assert len(M) == brute_matching_number(H)
    assert (perfect_matching_oracle(H) is not None) == (H.k * len(M) == H.n)


@given(hypergraphs(n_max=8), st.lists(st.integers(0, 7), max_size=3, unique=True))
def test_degree_matches_brute(H, S):
    S = [v for v in S if v < H.n]
    assert degree(H, S) == brute_degree(H, S)


@given(hypergraphs(n_max=9))
def test_text_round_trip_property(H):
    assert parse_text(to_text(H)) == H
    assert to_text(parse_text(to_text(H))) == to_text(H)
