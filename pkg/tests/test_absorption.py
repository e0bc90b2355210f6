from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from hypermatch.absorption import (
    Abs1Result,
    AuxiliaryGraph,
    abs1_case,
    abs1_cover,
    absorb_leftover,
    build_abs1_matching,
    build_absorbing_family,
    build_reservoir,
    build_s_absorbing_matching,
    check_selection,
    derandomized_select,
    is_absorbing_set,
    is_s_absorbing_edge,
    regroup,
    s_absorbing_witness,
)
from hypermatch.core import ContractFailure, Partition, PipelineParams, SupplyExhausted
from hypermatch.hypergraph import Hypergraph, is_matching, is_perfect_matching
from hypermatch.instances import space_barrier
from hypermatch.lattice import robust_lattice

from oracles import brute_pm_on, dense_hypergraphs, hypergraphs

K9 = Hypergraph.complete(9, 3)
K12 = Hypergraph.complete(12, 3)
PARAMS = PipelineParams().resolve(3, 2)


def trivial(n):
    return Partition(((), tuple(range(n))))


# ---- absorbing sets ---------------------------------------------------------


def test_absorbing_set_examples():
    assert is_absorbing_set(K9, {3, 4, 5}, {0, 1, 2})
    assert not is_absorbing_set(Hypergraph.empty(6, 3), {3, 4, 5}, {0, 1, 2})
    # [DERIVED] H[{0,3,4}] is an edge but {0..5} has no perfect matching
    assert not is_absorbing_set(space_barrier(6, 3), {0, 3, 4}, {1, 2, 5})
    with pytest.raises(ValueError):
        is_absorbing_set(K9, {0, 1, 2}, {2, 3, 4})


@given(hypergraphs(n_min=6, n_max=9), st.data())
def test_absorbing_set_matches_oracle(H, data):
    verts = data.draw(st.permutations(range(H.n)))
    A, S = verts[:3], verts[3:6]
    expect = brute_pm_on(H, A) and brute_pm_on(H, A + S)
    assert is_absorbing_set(H, A, S) == expect


# ---- derandomized selection -------------------------------------------------


def independent_report(G, R, beta, tau, r):
    """Recompute the selection contract straight from the definitions."""
    nu = Fraction(2 * G.m * r, G.N ** 2)
    independent = all(b not in G.conflicts[a] for a, b in combinations(R, 2))
    size_ok = (1 - nu) * r <= len(R) <= r
    hits = [sum(1 for w in R if w in a) for a in G.adj]
    degree_ok = all(h >= (beta - tau - nu) * r for h in hits)
    return independent, size_ok, degree_ok, nu


def test_select_no_conflicts_full_r():
    N = 6
    G = AuxiliaryGraph([], list(range(N)), [], [set() for _ in range(N)])
    res = derandomized_select(G, Fraction(1, 2), Fraction(1, 4), N)
    assert res.R == list(range(N)) and res.nu == 0 and res.ok


def test_select_single_demand():
    N = 8
    G = AuxiliaryGraph(["u"], list(range(N)), [set(range(N))], [set() for _ in range(N)])
    res = derandomized_select(G, Fraction(1, 2), Fraction(1, 4), 3)
    assert len(res.R) == 3 and res.min_hits == 3 and res.ok


def test_select_rejects_tau_at_least_beta():
    G = AuxiliaryGraph([], [0], [], [set()])
    with pytest.raises(ValueError):
        derandomized_select(G, Fraction(1, 4), Fraction(1, 4), 1)
    with pytest.raises(ValueError):
        derandomized_select(G, Fraction(1, 2), Fraction(1, 4), 2)


def test_auxiliary_graph_validation():
    with pytest.raises(ValueError):
        AuxiliaryGraph([], [0, 1], [], [{1}, set()])
    with pytest.raises(ValueError):
        AuxiliaryGraph([0], [0], [], [set()])


@st.composite
def auxiliary_graphs(draw):
    N = draw(st.integers(1, 30))
    M = draw(st.integers(0, 4))
    adj = [set(draw(st.sets(st.integers(0, N - 1)))) for _ in range(M)]
    pairs = draw(st.sets(st.tuples(st.integers(0, N - 1), st.integers(0, N - 1)), max_size=15))
    conf = [set() for _ in range(N)]
    for a, b in pairs:
        if a != b:
            conf[a].add(b)
            conf[b].add(a)
    return AuxiliaryGraph(list(range(M)), list(range(N)), adj, conf)


@given(auxiliary_graphs(), st.data())
def test_selection_report_is_honest(G, data):
    r = data.draw(st.integers(0, G.N))
    beta, tau = Fraction(1, 2), Fraction(1, 5)
    res = derandomized_select(G, beta, tau, r)
    ind, size_ok, deg_ok, nu = independent_report(G, res.R, beta, tau, r)
    assert (res.independent, res.size_ok, res.degree_ok, res.nu) == (ind, size_ok, deg_ok, nu)
    # independence is always enforced by the greedy clean-up
    assert ind and len(res.R) <= r
    assert check_selection(G, res.R, beta, tau, r).to_json() == {**res.to_json(), "notes": []}


# ---- absorbing family -------------------------------------------------------


def test_family_on_k12_recount():
    fam = build_absorbing_family(K12, trivial(12), PARAMS)
    assert len(fam.sets) == 1 and len(fam.sets[0]) == PARAMS.t * 9
    A = fam.sets[0]
    assert is_matching(K12, fam.matchings[A]) and sorted(v for e in fam.matchings[A] for v in e) == list(A)
    # [DERIVED] only the complementary triple is disjoint from the member
    for S, c in fam.counts.items():
        assert c == int(not set(S) & set(A) and brute_pm_on(K12, A + S))
    assert sum(fam.counts.values()) == 1
    # n = 12 fits one 9-set, so the absorber quota alpha n is out of reach
    assert fam.required == PARAMS.alpha * 12 and not fam.ok


def test_family_edgeless_is_empty():
    fam = build_absorbing_family(Hypergraph.empty(12, 3), trivial(12), PARAMS)
    assert fam.sets == [] and not fam.ok


def test_family_budget_guard():
    with pytest.raises(ContractFailure):
        build_absorbing_family(Hypergraph.complete(15, 3), trivial(15), PARAMS)


@given(dense_hypergraphs(ns=(9, 12), k=3))
def test_family_members_disjoint_and_matchable(H):
    fam = build_absorbing_family(H, trivial(H.n), PARAMS)
    seen = set()
    for A in fam.sets:
        assert not seen & set(A)
        seen |= set(A)
        pm = fam.matchings[A]
        assert is_matching(H, pm) and sorted(v for e in pm for v in e) == list(A)
    members = set(fam.sets)
    for S, c in fam.counts.items():
        assert c == sum(1 for A in members if not set(A) & set(S) and brute_pm_on(H, A + S))


# ---- leftover absorption ----------------------------------------------------


def test_absorb_round_trip_k12():
    fam = build_absorbing_family(K12, trivial(12), PARAMS)
    (A,) = fam.sets
    S = tuple(v for v in range(12) if v not in A)
    out, log = absorb_leftover(K12, fam.matching(), fam, [S], direct_edges=False)
    assert is_perfect_matching(K12, out) and "absorbed by" in log[0]


def test_absorb_direct_edge_shortcut():
    fam = build_absorbing_family(K12, trivial(12), PARAMS)
    (A,) = fam.sets
    S = tuple(v for v in range(12) if v not in A)
    out, log = absorb_leftover(K12, fam.matching(), fam, [S])
    assert log == [f"{S}: edge"] and is_perfect_matching(K12, out)


def test_absorb_supply_exhausted():
    fam = build_absorbing_family(K12, trivial(12), PARAMS)
    (A,) = fam.sets
    S = tuple(v for v in range(12) if v not in A)
    with pytest.raises(SupplyExhausted):
        absorb_leftover(K12, fam.matching(), fam, [S], unusable=[A], direct_edges=False)


# ---- S-absorbing edges ------------------------------------------------------


def brute_s_absorbing(H, e, S, ell):
    lo, hi = ell // 2, (ell + 1) // 2
    es, sS, se = H.edges, set(S), set(e)
    for e1, e2 in combinations(es, 2):
        if set(e1) & set(e2):
            continue
        u = set(e1) | set(e2)
        if not sS <= u or not u <= sS | se:
            continue
        if sorted((len(set(e1) & se), len(set(e2) & se))) == [lo, hi]:
            return True
    return False


def test_s_absorbing_swap_arithmetic():
    # k = 3, ell = 2: |S| = 4; e gives one vertex to each new edge and frees k - ell = 1
    e, S = (0, 1, 2), (3, 4, 5, 6)
    e1, e2 = s_absorbing_witness(K12, e, S, 2)
    assert not set(e1) & set(e2)
    assert set(S) <= set(e1) | set(e2)
    assert len((set(e1) | set(e2)) & set(e)) == 2
    assert is_s_absorbing_edge(K12, e, S, 2)


def test_s_absorbing_errors():
    with pytest.raises(ValueError):
        s_absorbing_witness(K12, (0, 1, 2), (3, 4, 5), 2)
    with pytest.raises(ValueError):
        s_absorbing_witness(K12, (0, 1, 2), (2, 3, 4, 5), 2)


def test_s_absorbing_edgeless():
    assert not is_s_absorbing_edge(Hypergraph.empty(7, 3), (0, 1, 2), (3, 4, 5, 6), 2)


@given(hypergraphs(n_min=7, n_max=8, max_edges=40), st.data())
def test_s_absorbing_matches_pair_search(H, data):
    verts = data.draw(st.permutations(range(H.n)))
    e, S = tuple(sorted(verts[:3])), tuple(sorted(verts[3:7]))
    assert is_s_absorbing_edge(H, e, S, 2) == brute_s_absorbing(H, e, S, 2)


def test_s_absorbing_matching_k9():
    res = build_s_absorbing_matching(K9, 2, PARAMS)
    assert is_matching(K9, res.matching) and len(res.matching) <= res.cap
    assert res.cap == max(1, int(PARAMS.beta * 9 / 3))
    covered = {v for e in res.matching for v in e}
    for S, c in res.counts.items():
        assert not covered & set(S)
        assert c == sum(1 for e in res.matching if is_s_absorbing_edge(K9, e, S, 2))


def test_s_absorbing_matching_k12():
    # [DERIVED] in a complete graph every edge disjoint from S absorbs it
    res = build_s_absorbing_matching(K12, 2, PARAMS)
    assert len(res.matching) == 1 and len(res.counts) == 126
    assert min(res.counts.values()) >= 1


def test_s_absorbing_matching_edgeless():
    res = build_s_absorbing_matching(Hypergraph.empty(7, 3), 2, PARAMS)
    assert res.matching == [] and "no edges" in res.notes


# ---- regrouping -------------------------------------------------------------


def test_regroup_examples():
    P = Partition.build([], [], [(0, 1, 2), (3, 4, 5)])
    assert regroup(P, [0, 1, 3, 2, 4, 5], {(2, 1): 1, (1, 2): 1}) == [(0, 3, 4), (1, 2, 5)]
    with pytest.raises(ValueError):
        regroup(P, [0, 1, 2], {(2, 1): 1})
    with pytest.raises(ValueError):
        regroup(P, [0, 1, 2, 3], {(3, 0): 1})


# ---- absorbing matching for small ell ---------------------------------------


@pytest.mark.parametrize(
    "k,ell,case", [(3, 1, "I"), (6, 2, "I"), (5, 2, "III"), (4, 2, "II"), (7, 3, "II")]
)
def test_abs1_case_table(k, ell, case):
    assert abs1_case(k, ell) == case


def test_abs1_case_out_of_range():
    with pytest.raises(ValueError):
        abs1_case(3, 2)


def test_abs1_build_k12():
    p = PipelineParams().resolve(3, 1)
    res = build_abs1_matching(K12, 1, p)
    assert res.case == "I"
    assert is_perfect_matching(K12, res.matching)


def test_abs1_cover_leaves_at_most_k_plus_one():
    # graph case k = 2 with a one-member family, so four vertices stay outside V(M)
    H = Hypergraph.complete(10, 2)
    p = PipelineParams().resolve(2, 1)
    P = trivial(10)
    rv, L = robust_lattice(H, P, p.mu)
    fam = build_absorbing_family(H, P, p, r=1)
    reservoir = build_reservoir(H, P, rv.all, 1, fam.vertices)
    res = Abs1Result("I", P, L, rv.all, fam, reservoir, [])
    covered = {v for e in res.matching for v in e}
    R = [v for v in range(10) if v not in covered]
    out = abs1_cover(H, res, R)
    assert is_matching(H, out)
    assert H.n - 2 * len(out) <= H.k + 1
    with pytest.raises(ValueError):
        abs1_cover(H, res, sorted(covered)[:1])
