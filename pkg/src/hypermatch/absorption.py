"""Absorbing sets, derandomized selection and the absorbing builders.

Every builder returns a report with the achieved numbers next to the ones
the asymptotic statements promise. At desk scale those promises usually do
not hold, so reports are informative and callers decide what is fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Iterable, Sequence

from .core import ContractFailure, Partition, PipelineParams, SupplyExhausted
from .hypergraph import Edge, Hypergraph, is_matching, mask_of
from .lattice import (
    Lattice,
    index_vector,
    min_inf_representation,
    robust_lattice,
    two_unit_queries,
    one_unit_queries,
    merge_transferral_parts,
)

Vector = tuple[int, ...]


# ----------------------------------------------------------------------------
# auxiliary graph and derandomized selection


@dataclass
class AuxiliaryGraph:
    """Bipartite demand graph ``U``-``W`` plus a conflict graph on ``W``.

    ``adj[u]`` holds the ``W``-indices adjacent to demand ``u``;
    ``conflicts[w]`` the ``W``-indices in conflict with ``w``.
    """

    U: list
    W: list
    adj: list[set[int]]
    conflicts: list[set[int]]

    def __post_init__(self) -> None:
        if len(self.adj) != len(self.U) or len(self.conflicts) != len(self.W):
            raise ValueError("adjacency lists do not match the sides")
        for w, nb in enumerate(self.conflicts):
            if w in nb:
                raise ValueError(f"W-vertex {w} conflicts with itself")
            for x in nb:
                if w not in self.conflicts[x]:
                    raise ValueError("conflict relation is not symmetric")

    @property
    def N(self) -> int:
        return len(self.W)

    @property
    def M(self) -> int:
        return len(self.U)

    @property
    def m(self) -> int:
        return sum(len(c) for c in self.conflicts) // 2

    def min_degree(self) -> int:
        return min((len(a) for a in self.adj), default=self.N)

    @classmethod
    def from_predicates(cls, U: Sequence, W: Sequence, adjacent, conflict) -> "AuxiliaryGraph":
        adj = [{j for j, w in enumerate(W) if adjacent(u, w)} for u in U]
        conf: list[set[int]] = [set() for _ in W]
        for a, b in combinations(range(len(W)), 2):
            if conflict(W[a], W[b]):
                conf[a].add(b)
                conf[b].add(a)
        return cls(list(U), list(W), adj, conf)


@dataclass
class SelectionResult:
    R: list[int]
    r: int
    nu: Fraction
    target: Fraction  # (beta - tau - nu) r
    independent: bool
    size_ok: bool
    degree_ok: bool
    min_hits: int | None
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.independent and self.size_ok and self.degree_ok

    def to_json(self) -> dict[str, Any]:
        return {
            "R": self.R,
            "r": self.r,
            "nu": str(self.nu),
            "target": str(self.target),
            "independent": self.independent,
            "size_ok": self.size_ok,
            "degree_ok": self.degree_ok,
            "min_hits": self.min_hits,
            "ok": self.ok,
            "notes": self.notes,
        }


def selection_nu(G: AuxiliaryGraph, r: int) -> Fraction:
    return Fraction(2 * G.m * r, G.N**2) if G.N else Fraction(0)


def check_selection(G: AuxiliaryGraph, R: Sequence[int], beta, tau, r: int) -> SelectionResult:
    """Exact post-hoc check of the selection contract."""
    beta, tau = Fraction(beta), Fraction(tau)
    nu = selection_nu(G, r)
    Rs = set(R)
    independent = all(not (G.conflicts[w] & Rs) for w in Rs)
    size_ok = (1 - nu) * r <= len(Rs) <= r
    target = (beta - tau - nu) * r
    hits = [len(a & Rs) for a in G.adj]
    degree_ok = all(h >= target for h in hits)
    return SelectionResult(sorted(Rs), r, nu, target, independent, size_ok, degree_ok, min(hits, default=None))


def derandomized_select(G: AuxiliaryGraph, beta, tau, r: int) -> SelectionResult:
    """Choose an independent ``R`` in ``W`` hitting every demand often.

    Each ``w`` is fixed in order by the method of conditional expectations
    on a pessimistic estimator for ``R ~ Bin(W, p = r/N)``:

    * one Chernoff lower-tail term per demand ``u`` at ``(beta - tau/2) r``,
    * one Chernoff upper-tail term for ``|R|`` at ``(1 + tau/2) r``,
    * a Markov term ``E[#conflicts in R] / (nu r)``.

    Conflicts are then resolved greedily (later ``w`` dropped), ``R`` is
    trimmed to ``r`` and topped up while non-conflicting candidates remain.
    The contract is verified exactly afterwards and returned, not raised.
    """
    beta, tau = Fraction(beta), Fraction(tau)
    if not tau < beta:
        raise ValueError("need tau < beta")
    N = G.N
    if not 0 <= r <= N:
        raise ValueError("need 0 <= r <= |W|")
    notes = []
    if any(len(a) < beta * N for a in G.adj):
        notes.append("precondition deg(u) >= beta N fails for some u")
    if G.M > math.exp(float(tau) ** 2 * r / (3 * float(beta))) / 8:
        notes.append("size condition M <= exp(tau^2 r / (3 beta)) / 8 fails")
    if N == 0 or r == 0:
        res = check_selection(G, [], beta, tau, r)
        res.notes = notes
        return res

    p = r / N
    nu = float(selection_nu(G, r))
    # Chernoff parameters
    lam_u, theta_u = [], []
    for a in G.adj:
        mean = p * len(a)
        theta = float(beta - tau / 2) * r
        lam_u.append(math.log(mean / theta) if mean > theta > 0 else 0.5)
        theta_u.append(theta)
    lam_s = math.log(1 + float(tau) / 2)
    theta_s = (1 + float(tau) / 2) * r

    # multiplicative state: term_u = exp(lam theta) * prod over adjacent w of factor(w)
    def free_lower(lam):
        return 1 - p + p * math.exp(-lam)

    w_users: list[list[int]] = [[] for _ in range(N)]
    for u, a in enumerate(G.adj):
        for w in a:
            w_users[w].append(u)
    log_term = [
        lam * th + len(a) * math.log(free_lower(lam)) for lam, th, a in zip(lam_u, theta_u, G.adj)
    ]
    free_up = 1 - p + p * math.exp(lam_s)
    log_size = -lam_s * theta_s + N * math.log(free_up)
    prob = [p] * N
    conflict_scale = nu * r if G.m else 1.0
    exp_conf = G.m * p * p

    x = [0] * N
    for w in range(N):
        best = None
        for val in (1, 0):
            lt_delta = {}
            for u in w_users[w]:
                lam = lam_u[u]
                f = math.exp(-lam) if val else 1.0
                lt_delta[u] = math.log(f) - math.log(free_lower(lam))
            s_delta = (lam_s if val else 0.0) - math.log(free_up)
            c_delta = sum(prob[v] for v in G.conflicts[w]) * (val - prob[w])
            # terms of demands not adjacent to w are equal for both values
            phi = sum(math.exp(min(log_term[u] + d, 700)) for u, d in lt_delta.items())
            phi += math.exp(min(log_size + s_delta, 700))
            if G.m:
                phi += (exp_conf + c_delta) / conflict_scale
            if best is None or phi < best[0] - 1e-12:
                best = (phi, val, lt_delta, s_delta, c_delta)
        _, val, lt_delta, s_delta, c_delta = best
        x[w] = val
        for u, d in lt_delta.items():
            log_term[u] += d
        log_size += s_delta
        exp_conf += c_delta
        prob[w] = float(val)

    chosen: list[int] = []
    taken: set[int] = set()
    for w in range(N):
        if x[w] and not (G.conflicts[w] & taken):
            chosen.append(w)
            taken.add(w)
    beta_tau = beta - tau
    hits = [len(a & taken) for a in G.adj]
    while len(chosen) > r:
        # drop the latest w whose removal keeps every demand above target
        drop = next(
            (w for w in reversed(chosen) if all(hits[u] - 1 >= beta_tau * r for u in w_users[w])),
            chosen[-1],
        )
        chosen.remove(drop)
        taken.discard(drop)
        for u in w_users[drop]:
            hits[u] -= 1
    while len(chosen) < r:
        cands = [w for w in range(N) if w not in taken and not (G.conflicts[w] & taken)]
        if not cands:
            break
        need = {u for u in range(G.M) if hits[u] < beta_tau * r}
        w = max(cands, key=lambda c: (sum(1 for u in w_users[c] if u in need), -c))
        chosen.append(w)
        taken.add(w)
        for u in w_users[w]:
            hits[u] += 1
    res = check_selection(G, chosen, beta, tau, r)
    res.notes = notes
    return res


# ----------------------------------------------------------------------------
# absorbing sets


def is_absorbing_set(H: Hypergraph, A: Iterable[int], S: Iterable[int]) -> bool:
    A, S = set(A), set(S)
    if A & S:
        raise ValueError("A and S must be disjoint")
    if not H.has_perfect_matching_on(A):
        return False
    return H.has_perfect_matching_on(A | S)


@dataclass
class AbsorbingFamily:
    sets: list[tuple[int, ...]]
    matchings: dict  # set -> perfect matching of H[set]
    counts: dict  # robust k-set -> number of members absorbing it
    required: Fraction
    selection: SelectionResult | None
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return bool(self.counts) and all(c >= self.required for c in self.counts.values())

    @property
    def vertices(self) -> list[int]:
        return sorted(v for A in self.sets for v in A)

    def matching(self) -> list[Edge]:
        return sorted(e for A in self.sets for e in self.matchings[A])

    def to_json(self) -> dict[str, Any]:
        vals = list(self.counts.values())
        return {
            "members": [list(A) for A in self.sets],
            "required_per_set": str(self.required),
            "min_absorbers": min(vals) if vals else None,
            "robust_ksets": len(vals),
            "ok": self.ok,
            "selection": self.selection.to_json() if self.selection else None,
            "notes": self.notes,
        }


def robust_ksets(H: Hypergraph, P: Partition, robust: Iterable[Vector]) -> list[tuple[int, ...]]:
    robust = set(robust)
    pool = sorted(set(range(H.n)) - set(P.V0))
    return [S for S in combinations(pool, H.k) if index_vector(P, S) in robust]


def build_absorbing_family(
    H: Hypergraph, P: Partition, params: PipelineParams, r: int | None = None
) -> AbsorbingFamily:
    """Disjoint ``t k^2``-sets on the closed parts that absorb robust k-sets.

    Demands are the k-sets with a robust index vector, candidates every
    ``t k^2``-subset of the closed parts; a candidate serves a demand when
    they are disjoint and both ``H[A]`` and ``H[A + S]`` are perfectly
    matchable. ``r`` defaults to the most disjoint candidates that fit.
    Raises :class:`ContractFailure` only when the work exceeds
    ``params.absorb_budget``; unmet absorber counts are reported.
    """
    k, t = H.k, params.t
    size = t * k * k
    closed = [v for p in P.closed_parts for v in p]
    n1 = len(closed)
    rv, _ = robust_lattice(H, P, params.mu)
    demands = robust_ksets(H, P, rv.all)
    required = params.alpha * n1
    notes = []
    if n1 < size or not demands:
        if not demands:
            notes.append("no k-set has a robust index vector")
        counts = {S: 0 for S in demands}
        return AbsorbingFamily([], {}, counts, required, None, notes + ["no candidate sets"])
    n_cands = math.comb(n1, size)
    # matchability checks plus the pairwise conflict scan
    work = n_cands * (1 + math.comb(H.n - size, k)) + n_cands * (n_cands - 1) // 2
    if work > params.absorb_budget:
        raise ContractFailure(f"absorbing family needs ~{work} checks, budget {params.absorb_budget}")
    cands = list(combinations(closed, size))
    internal = [H.has_perfect_matching_on(A) for A in cands]
    masks = [mask_of(A) for A in cands]
    demand_idx = {S: i for i, S in enumerate(demands)}
    pool = sorted(set(range(H.n)) - set(P.V0))
    adj: list[set[int]] = [set() for _ in demands]
    for j, (A, am) in enumerate(zip(cands, masks)):
        if not internal[j]:
            continue
        for S in combinations([v for v in pool if not am >> v & 1], k):
            i = demand_idx.get(S)
            if i is not None and H.has_perfect_matching_on(am | mask_of(S)):
                adj[i].add(j)
    conflicts: list[set[int]] = [set() for _ in cands]
    for a, b in combinations(range(len(cands)), 2):
        if masks[a] & masks[b]:
            conflicts[a].add(b)
            conflicts[b].add(a)
    G = AuxiliaryGraph(demands, cands, adj, conflicts)
    if r is None:
        r = max(1, n1 // size)
    beta_sel = Fraction(G.min_degree(), G.N) if G.N else Fraction(0)
    if beta_sel > 0:
        sel = derandomized_select(G, beta_sel, beta_sel / 3, min(r, G.N))
        picked = sel.R
    else:
        sel = None
        notes.append("some robust k-set has no absorbing candidate at all")
        # still pick disjoint internally matchable sets, preferring broad coverage
        picked, used = [], 0
        order = sorted(range(len(cands)), key=lambda j: (-sum(j in a for a in adj), j))
        for j in order:
            if internal[j] and not masks[j] & used and len(picked) < r:
                picked.append(j)
                used |= masks[j]
    members = sorted(cands[j] for j in picked if internal[j])
    matchings = {A: H.perfect_matching_on(A) for A in members}
    member_idx = {cands[j]: j for j in picked}
    counts = {S: sum(1 for A in members if member_idx[A] in a) for S, a in zip(demands, adj)}
    return AbsorbingFamily(members, matchings, counts, required, sel, notes)


def absorb_leftover(
    H: Hypergraph,
    M: Sequence[Edge],
    family: AbsorbingFamily,
    leftover: Sequence[Sequence[int]],
    unusable: Iterable[tuple[int, ...]] = (),
    direct_edges: bool = True,
) -> tuple[list[Edge], list[str]]:
    """Swap each leftover k-set into the matching through a distinct absorber.

    A leftover set that is itself an edge is added directly (unless
    ``direct_edges`` is off). Otherwise the
    first unused family member ``A`` with a perfect matching of ``H[A + S]``
    has its internal matching replaced. Returns the new matching and a log.
    Raises :class:`SupplyExhausted` when no member fits.
    """
    cur = set(map(tuple, M))
    used = set(map(tuple, unusable))
    log = []
    for S in leftover:
        S = tuple(sorted(S))
        if direct_edges and S in H.edge_set:
            cur.add(S)
            log.append(f"{S}: edge")
            continue
        sm = mask_of(S)
        for A in family.sets:
            if A in used or mask_of(A) & sm:
                continue
            inner = family.matchings[A]
            if not all(e in cur for e in inner):
                continue
            pm = H.perfect_matching_on(mask_of(A) | sm)
            if pm is None:
                continue
            cur.difference_update(inner)
            cur.update(pm)
            used.add(A)
            log.append(f"{S}: absorbed by {A}")
            break
        else:
            raise SupplyExhausted(f"no absorbing set left for {S}")
    out = sorted(cur)
    if not is_matching(H, out):
        raise RuntimeError("absorption produced overlapping edges")
    return out, log


# ----------------------------------------------------------------------------
# S-absorbing edges


def _split(ell: int) -> tuple[int, int]:
    return ell // 2, (ell + 1) // 2


def s_absorbing_witness(
    H: Hypergraph, e: Sequence[int], S: Sequence[int], ell: int
) -> tuple[Edge, Edge] | None:
    """Disjoint edges ``(e1, e2)`` that let ``e`` absorb ``S``, if any."""
    k = H.k
    e, S = tuple(sorted(e)), tuple(sorted(S))
    if len(S) != 2 * k - ell or len(e) != k:
        raise ValueError(f"need |S| = 2k - ell = {2 * k - ell} and |e| = k")
    if set(e) & set(S):
        raise ValueError("e and S must be disjoint")
    lo, hi = _split(ell)
    es = H.edge_set
    for A in combinations(S, k - lo):
        A2 = tuple(v for v in S if v not in A)
        for B in combinations(e, lo):
            e1 = tuple(sorted(A + B))
            if e1 not in es:
                continue
            rest = tuple(v for v in e if v not in B)
            for B2 in combinations(rest, hi):
                e2 = tuple(sorted(A2 + B2))
                if e2 in es:
                    return e1, e2
    return None


def is_s_absorbing_edge(H: Hypergraph, e: Sequence[int], S: Sequence[int], ell: int) -> bool:
    return s_absorbing_witness(H, e, S, ell) is not None


@dataclass
class SAbsorbingResult:
    matching: list[Edge]
    counts: dict  # (2k - ell)-set disjoint from V(M') -> absorbing edges in M'
    cap: int
    selection: SelectionResult | None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        vals = list(self.counts.values())
        return {
            "matching": [list(e) for e in self.matching],
            "cap": self.cap,
            "min_absorbing": min(vals) if vals else None,
            "selection": self.selection.to_json() if self.selection else None,
            "notes": self.notes,
        }


def build_s_absorbing_matching(
    H: Hypergraph, ell: int, params: PipelineParams, r: int | None = None
) -> SAbsorbingResult:
    """A matching ``M'`` of at most ``r`` edges rich in S-absorbing edges.

    ``r`` defaults to ``max(1, floor(beta n / k))``, since the plain
    ``beta n / k`` cap is below one edge at desk scale.
    """
    k, n = H.k, H.n
    notes = []
    if not math.ceil(2 * k / 3) <= ell <= k - 1:
        notes.append(f"ell={ell} outside the intended range [ceil(2k/3), k-1]")
    if r is None:
        r = max(1, math.floor(params.beta * n / k))
    demands = list(combinations(range(n), 2 * k - ell))
    W = list(H.edges)
    if not W:
        return SAbsorbingResult([], {S: 0 for S in demands}, r, None, notes + ["no edges"])
    adj = []
    for S in demands:
        sS = set(S)
        adj.append({j for j, e in enumerate(W) if not sS & set(e) and is_s_absorbing_edge(H, e, S, ell)})
    masks = H.edge_masks
    conflicts: list[set[int]] = [set() for _ in W]
    for v in range(n):
        inc = H.incidence[v]
        for a in inc:
            conflicts[a].update(b for b in inc if b != a)
    G = AuxiliaryGraph(demands, W, adj, conflicts)
    beta_sel = Fraction(G.min_degree(), G.N)
    r = min(r, G.N)
    if beta_sel > 0:
        sel = derandomized_select(G, beta_sel, beta_sel / 3, r)
        picked = sel.R
    else:
        sel = None
        notes.append("some (2k-ell)-set has no absorbing edge")
        picked, used = [], 0
        for j in sorted(range(len(W)), key=lambda j: (-sum(j in a for a in adj), j)):
            if not masks[j] & used and len(picked) < r:
                picked.append(j)
                used |= masks[j]
    M = sorted(W[j] for j in picked)
    covered = mask_of(v for e in M for v in e)
    pick = set(picked)
    counts = {S: len(a & pick) for S, a in zip(demands, adj) if not mask_of(S) & covered}
    return SAbsorbingResult(M, counts, r, sel, notes)


# ----------------------------------------------------------------------------
# reservoir and regrouping


@dataclass
class Reservoir:
    edges: dict  # vector -> list of edges
    wanted: int
    shortfall: dict  # vector -> missing edges

    def all_edges(self) -> list[Edge]:
        return sorted(e for es in self.edges.values() for e in es)


def build_reservoir(
    H: Hypergraph, P: Partition, vectors: Sequence[Vector], per_vector: int, avoid: Iterable[int]
) -> Reservoir:
    """Greedily take ``per_vector`` disjoint edges of each robust vector."""
    used = mask_of(avoid)
    store: dict[Vector, list[Edge]] = {v: [] for v in vectors}
    by_vec: dict[Vector, list[int]] = {}
    for idx, e in enumerate(H.edges):
        by_vec.setdefault(index_vector(P, e), []).append(idx)
    for v in vectors:
        for idx in by_vec.get(v, []):
            if len(store[v]) >= per_vector:
                break
            em = H.edge_masks[idx]
            if not em & used:
                store[v].append(H.edges[idx])
                used |= em
    short = {v: per_vector - len(es) for v, es in store.items() if len(es) < per_vector}
    return Reservoir(store, per_vector, short)


def regroup(P: Partition, pool: Sequence[int], counts: dict) -> list[tuple[int, ...]]:
    """Split ``pool`` into k-sets, ``counts[v]`` of them with index vector ``v``.

    The pool's index vector must equal ``sum counts[v] v`` and the pool must
    avoid ``V0``; vertices are handed out in increasing order per part.
    """
    owner = P.owner()
    by_part: dict[int, list[int]] = {}
    for x in sorted(pool):
        i = owner[x]
        if i == 0:
            raise ValueError(f"vertex {x} of V0 cannot be regrouped")
        by_part.setdefault(i, []).append(x)
    out = []
    for v in sorted(counts):
        for _ in range(counts[v]):
            S = []
            for i, c in enumerate(v, start=1):
                for _ in range(c):
                    if not by_part.get(i):
                        raise ValueError("pool does not match the requested index vectors")
                    S.append(by_part[i].pop(0))
            out.append(tuple(sorted(S)))
    if any(by_part.values()):
        raise ValueError("pool has vertices left after regrouping")
    return out


@dataclass
class Regrouping:
    sets: list[tuple[int, ...]]
    borrowed: list[Edge]
    b: dict
    c: dict


def regroup_with_reservoir(
    P: Partition,
    Y: Sequence[int],
    I: Sequence[Vector],
    reservoir: Reservoir,
    cap: int,
) -> Regrouping:
    """Write ``i(Y) + sum c_v v = sum b_v v`` and cut the pool into k-sets.

    Coefficients come from a minimal sup-norm representation of ``i(Y)``
    over ``I``; ``c_v`` reservoir edges of vector ``v`` are borrowed.
    Raises :class:`ContractFailure` if no representation within ``cap``
    exists or the reservoir is short.
    """
    I = sorted(I)
    rep = min_inf_representation(index_vector(P, Y), I, cap)
    if rep is None:
        raise ContractFailure(f"no representation of i(Y) with coefficients <= {cap}")
    b = {v: a for v, a in zip(I, rep) if a > 0}
    c = {v: -a for v, a in zip(I, rep) if a < 0}
    borrowed = []
    for v, cnt in c.items():
        have = reservoir.edges.get(v, [])
        if len(have) < cnt:
            raise ContractFailure(f"reservoir holds {len(have)} edges of {v}, need {cnt}")
        borrowed.extend(have[:cnt])
    pool = list(Y) + [x for e in borrowed for x in e]
    return Regrouping(regroup(P, pool, b), sorted(borrowed), b, c)


# ----------------------------------------------------------------------------
# absorbing matching for small ell


@dataclass
class Abs1Result:
    case: str
    partition: Partition
    lattice: Lattice
    robust: tuple
    family: AbsorbingFamily
    reservoir: Reservoir
    cover: list[Edge]
    notes: list[str] = field(default_factory=list)

    @property
    def matching(self) -> list[Edge]:
        return sorted(self.family.matching() + self.reservoir.all_edges() + self.cover)


def abs1_case(k: int, ell: int) -> str:
    if ell == 1 or (ell == 2 and k >= 6):
        return "I"
    if (k, ell) == (5, 2):
        return "III"
    if min(3, k / 2) <= ell < math.ceil(2 * k / 3):
        return "II"
    raise ValueError(f"(k, ell) = ({k}, {ell}) is outside the small-ell range")


def build_abs1_matching(H: Hypergraph, ell: int, params: PipelineParams, per_vector: int = 1) -> Abs1Result:
    """Absorbing family, reservoir and ``V0`` cover for the small-ell range.

    Case I uses the trivial partition. Cases II and III prune with ``c = 3``,
    split into closed parts and merge along transferrals; they differ only
    in which lattice query the cover routine uses.
    """
    from .partition import closed_partition, prune_low_reachability
    import dataclasses

    k = H.k
    case = abs1_case(k, ell)
    notes = []
    if case == "I":
        P = Partition(((), tuple(range(H.n))))
    else:
        p3 = dataclasses.replace(params, delta=Fraction(1, 3))
        S, _ = prune_low_reachability(H, p3.alpha, p3.delta_prime, 3)
        closed = closed_partition(H, S, p3)
        V0 = sorted(set(range(H.n)) - set(S))
        P = merge_transferral_parts(H, Partition.build(V0, [], closed), params.mu, p3)
    rv, L = robust_lattice(H, P, params.mu)
    family = build_absorbing_family(H, P, params)
    reservoir = build_reservoir(H, P, rv.all, per_vector, family.vertices)
    used = mask_of(family.vertices) | mask_of(v for e in reservoir.all_edges() for v in e)
    cover = []
    for v in P.V0:
        if used >> v & 1:
            continue
        idx = next((i for i in H.incidence[v] if not H.edge_masks[i] & used), None)
        if idx is None:
            raise ContractFailure(f"no free edge covers V0 vertex {v}")
        cover.append(H.edges[idx])
        used |= H.edge_masks[idx]
    if not family.ok:
        notes.append("absorbing family below the required absorber count")
    return Abs1Result(case, P, L, rv.all, family, reservoir, sorted(cover), notes)


def abs1_cover(H: Hypergraph, res: Abs1Result, R: Sequence[int], cap: int = 4) -> list[Edge]:
    """Matching of ``H[R + V(M)]`` leaving at most ``k + 1`` vertices uncovered.

    ``R`` must avoid ``V(M)``. Blocks of ``k + 2`` (or ``k + 1`` in case III)
    vertices are completed to lattice vectors with one reservoir edge,
    regrouped into robust k-sets and absorbed one by one.
    """
    k = H.k
    P, L = res.partition, res.lattice
    Mset = set(res.matching)
    covered = mask_of(v for e in Mset for v in e)
    if mask_of(R) & covered:
        raise ValueError("R must avoid V(M)")
    pool = sorted(R)
    reservoir = Reservoir({v: list(es) for v, es in res.reservoir.edges.items()}, res.reservoir.wanted, {})
    broken: set[tuple[int, ...]] = set()
    while len(pool) >= k + 2:
        if res.case == "I":
            block, pool = pool[:k], pool[k:]
            sets = [tuple(block)]
        else:
            take = k + 1 if res.case == "III" else k + 2
            U, pool = pool[:take], pool[take:]
            iU = index_vector(P, U)
            if res.case == "III":
                opts = [(i, i) for i in one_unit_queries(L, iU)]
                drop_count = 1
            else:
                opts = two_unit_queries(L, iU)
                drop_count = 2
            pick = None
            for i, j in opts:
                for v in sorted(reservoir.edges):
                    need = {i: 1} if drop_count == 1 else ({i: 2} if i == j else {i: 1, j: 1})
                    if all(v[a - 1] >= c for a, c in need.items()) and reservoir.edges[v]:
                        pick = (i, j, v)
                        break
                if pick:
                    break
            if pick is None:
                raise ContractFailure(f"no reservoir edge completes block {U}")
            i, j, v = pick
            e = reservoir.edges[v].pop(0)
            Mset.discard(e)
            owner = P.owner()
            freed = []
            for a in ([i] if drop_count == 1 else [i, j]):
                x = next(x for x in e if owner[x] == a and x not in freed)
                freed.append(x)
            Uprime = sorted(U + [x for x in e if x not in freed])
            pool = sorted(pool + freed)
            reg = regroup_with_reservoir(P, Uprime, res.robust, reservoir, cap)
            for bv in reg.borrowed:
                vec = index_vector(P, bv)
                reservoir.edges[vec].remove(bv)
                Mset.discard(bv)
            sets = reg.sets
        new, _ = absorb_leftover(H, sorted(Mset), res.family, sets, broken)
        for A in res.family.sets:
            if A not in broken and not all(e in new for e in res.family.matchings[A]):
                broken.add(A)
        Mset = set(new)
    return sorted(Mset)
