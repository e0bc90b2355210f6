"""Vertex partition: pruning, closed parts, leftover clusters and validation.

All reachability thresholds are taken against the host's full vertex count
``n`` (``alpha n^(k-1)``, ``beta n^(tk-1)``), also when counting inside an
induced subgraph.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Sequence

from .core import Partition, PartitionNotCertified, PipelineParams
from .hypergraph import Hypergraph
from .lattice import robust_vectors
from .reachability import ReachabilityParams, ReachabilityTable

log = logging.getLogger(__name__)

Vector = tuple[int, ...]
ClusterKey = tuple[Vector, ...]


# ----------------------------------------------------------------------------
# pruning


def prune_low_reachability(
    H: Hypergraph, alpha: Fraction, delta_prime: Fraction, c: int | None = None
) -> tuple[list[int], list[tuple[int, ...]]]:
    """Greedily strip vertices with few reachable neighbours.

    While some ``v`` in the current set ``V_j`` has fewer than ``delta' n``
    ``(alpha, 1)``-reachable neighbours in ``H[V_j]``, remove ``v`` together
    with those neighbours (the least such ``v`` first). Returns the survivors
    ``S`` and the removed blocks in order.
    """
    rp = ReachabilityParams(Fraction(alpha), 1)
    need = Fraction(delta_prime) * H.n
    current = list(range(H.n))
    removed: list[tuple[int, ...]] = []
    while current:
        table = ReachabilityTable(H, current, scale=H.n)
        hit = None
        for v in current:
            nb = table.neighborhood(v, rp)
            if len(nb) < need:
                hit = (v, nb)
                break
        if hit is None:
            break
        block = tuple(sorted([hit[0], *hit[1]]))
        removed.append(block)
        drop = set(block)
        current = [u for u in current if u not in drop]
    if c is not None and len(removed) > c:
        log.info("pruning used %d rounds, above c=%d", len(removed), c)
    return current, removed


def pruning_slack_ok(n: int, k: int, alpha: Fraction, removed_total: int) -> bool:
    """Whether the (k-1)-sets touching ``removed_total`` vertices number at most ``alpha n^(k-1)``.

    This is the counting step that lets a pair unreachable inside the pruned
    host also fail ``(2 alpha, 1)``-reachability in ``H``.
    """
    touching = comb(n - 2, k - 1) - comb(max(n - 2 - removed_total, 0), k - 1)
    return touching <= Fraction(alpha) * n ** (k - 1)


# ----------------------------------------------------------------------------
# closed parts


def _components(vertices: Sequence[int], adj: dict[int, set[int]]) -> list[list[int]]:
    seen: set[int] = set()
    out = []
    for v in vertices:
        if v in seen:
            continue
        comp, stack = [], [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        out.append(sorted(comp))
    return out


def closed_partition(H: Hypergraph, S: Sequence[int], params: PipelineParams) -> list[tuple[int, ...]]:
    """Split ``S`` into ``(beta, t)``-closed parts of ``H[S]``.

    Parts start as components of the ``(alpha, 1)``-reachability graph, are
    split greedily into closed groups (vertices in increasing order, each
    joining the first group it is reachable to throughout), and then pairs
    whose union is closed are merged. Raises :class:`PartitionNotCertified`
    when the count or size bounds of the contract fail.
    """
    S = sorted(S)
    if not S:
        return []
    table = ReachabilityTable(H, S, scale=H.n)
    ra = ReachabilityParams(params.alpha, 1)
    rb = ReachabilityParams(params.beta, params.t)
    adj = {v: set() for v in S}
    for i, u in enumerate(S):
        for v in S[i + 1:]:
            if table.is_reachable(u, v, ra):
                adj[u].add(v)
                adj[v].add(u)
    groups: list[list[int]] = []
    for comp in _components(S, adj):
        local: list[list[int]] = []
        for v in comp:
            for g in local:
                if all(table.is_reachable(v, w, rb) for w in g):
                    g.append(v)
                    break
            else:
                local.append([v])
        groups.extend(local)
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                if all(table.is_reachable(a, b, rb) for a in groups[i] for b in groups[j]):
                    groups[i] = sorted(groups[i] + groups[j])
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    groups.sort(key=lambda g: g[0])
    d_cap = min(params.c, int(1 / params.delta_prime))
    if len(groups) > d_cap:
        raise PartitionNotCertified(f"{len(groups)} closed parts exceed the cap {d_cap}")
    min_size = (params.delta_prime - params.alpha) * H.n
    small = [g for g in groups if len(g) < min_size]
    if small:
        raise PartitionNotCertified(f"closed part {small[0]} below size {float(min_size):.3g}")
    return [tuple(g) for g in groups]


# ----------------------------------------------------------------------------
# leftover clusters


def leftover_profile(H: Hypergraph, parts: Sequence[Sequence[int]], v: int) -> Counter:
    """For each (k-1)-vector over ``parts``, the edges ``e`` through ``v`` with ``e - v`` of that vector."""
    owner = {u: i for i, p in enumerate(parts) for u in p}
    cnt: Counter = Counter()
    for idx in H.incidence[v]:
        vec = [0] * len(parts)
        ok = True
        for u in H.edges[idx]:
            if u == v:
                continue
            i = owner.get(u)
            if i is None:
                ok = False
                break
            vec[i] += 1
        if ok:
            cnt[tuple(vec)] += 1
    return cnt


def classify_leftover(
    H: Hypergraph, P1: Sequence[Sequence[int]], Vprime: Sequence[int], mu: Fraction
) -> dict[ClusterKey, list[int]]:
    """Group ``Vprime`` by the exact set of (k-1)-vectors carried by ``mu n^(k-1)`` edges."""
    thr = Fraction(mu) * H.n ** (H.k - 1)
    out: dict[ClusterKey, list[int]] = {}
    for v in sorted(Vprime):
        prof = leftover_profile(H, P1, v)
        key = tuple(sorted(vec for vec, c in prof.items() if c >= thr))
        out.setdefault(key, []).append(v)
    return out


def absorb_small_clusters(
    clusters: dict[ClusterKey, list[int]], k: int, b: int
) -> tuple[list[int], list[tuple[ClusterKey, list[int]]]]:
    """Move clusters with ``|V_I| < (k-1)|V0| + b`` into ``V0``.

    ``V_()`` (vertices with no robust link vector) goes to ``V0`` first.
    The rest are scanned by increasing size, ties by key; passes repeat
    until nothing moves, since ``V0`` grows as clusters are absorbed.
    """
    V0 = list(clusters.get((), []))
    rest = sorted(((key, vs) for key, vs in clusters.items() if key), key=lambda kv: (len(kv[1]), kv[0]))
    moved = True
    while moved:
        moved = False
        keep = []
        for key, vs in rest:
            if len(vs) < (k - 1) * len(V0) + b:
                V0.extend(vs)
                moved = True
            else:
                keep.append((key, vs))
        rest = keep
    return sorted(V0), rest


@dataclass
class PartitionTrace:
    survivors: list[int]
    removed: list[tuple[int, ...]]
    closed: list[tuple[int, ...]]
    clusters: dict[ClusterKey, list[int]]
    empty_cluster: list[int] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "pruning_rounds": len(self.removed),
            "removed": [list(b) for b in self.removed],
            "closed_parts": [list(p) for p in self.closed],
            "clusters": [
                {"vectors": [list(v) for v in key], "vertices": vs}
                for key, vs in sorted(self.clusters.items())
            ],
            "empty_cluster": self.empty_cluster,
        }


def build_partition_traced(H: Hypergraph, params: PipelineParams) -> tuple[Partition, PartitionTrace]:
    S, removed = prune_low_reachability(H, params.alpha, params.delta_prime, params.c)
    closed = closed_partition(H, S, params)
    Vprime = sorted(set(range(H.n)) - set(S))
    clusters = classify_leftover(H, closed, Vprime, params.mu)
    V0, rest = absorb_small_clusters(clusters, H.k, params.b)
    notes = []
    empty = clusters.get((), [])
    if empty:
        notes.append(f"{len(empty)} leftover vertices carry no robust link vector; sent to V0")
    P = Partition.build(
        V0,
        [vs for _, vs in rest],
        closed,
        certified_depth=(params.t,) * len(closed),
        notes=tuple(notes),
    )
    return P, PartitionTrace(S, removed, closed, clusters, list(empty))


def build_partition(H: Hypergraph, params: PipelineParams) -> Partition:
    """Prune, split into closed parts, classify the leftover and absorb small clusters."""
    return build_partition_traced(H, params)[0]


# ----------------------------------------------------------------------------
# asymptotic constants (reported, never used to gate desk-scale runs)


def cluster_type_count(c: int, k: int, lower: str = "k-1") -> int:
    """``2^binom(c+k-2, j)`` with ``j = k-1`` or ``j = c-1``.

    Both spellings of the lower index occur in the literature; they coincide
    by binomial symmetry and are kept only so either can be requested.
    """
    j = {"k-1": k - 1, "c-1": c - 1}[lower]
    return 2 ** comb(c + k - 2, j)


def asymptotic_b(c: int, k: int, C: int, lower: str = "k-1") -> int:
    j = {"k-1": k - 1, "c-1": c - 1}[lower]
    return k * comb(k + cluster_type_count(c, k, lower) + c - 1, k) + comb(c + k - 2, j) * C


def asymptotic_v0_bound(c: int, k: int, C: int, lower: str = "k-1") -> int:
    return k ** cluster_type_count(c, k, lower) * asymptotic_b(c, k, C, lower)


def geometric_v0_bound(n_types: int, k: int, b: int) -> int:
    """``(k^T - 1)/(k - 1) * b``: the largest ``V0`` the absorption rule can build from T clusters."""
    return (k**n_types - 1) // (k - 1) * b


# ----------------------------------------------------------------------------
# validation


@dataclass
class ItemResult:
    ok: bool
    detail: str = ""


@dataclass
class PartitionReport:
    items: dict[int, ItemResult]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.items.values())

    def to_json(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "items": {str(i): {"ok": r.ok, "detail": r.detail} for i, r in sorted(self.items.items())},
            "notes": self.notes,
        }


def validate_partition(H: Hypergraph, P: Partition, params: PipelineParams) -> PartitionReport:
    """Check the five partition properties with the supplied thresholds.

    Item 2 uses the cluster-absorption bound with the configured ``b``
    (and the number of possible cluster types for ``d = r - s``); closedness
    in item 5 is checked at depth ``params.t``.
    """
    n, k, c = H.n, H.k, params.c
    items: dict[int, ItemResult] = {}
    if not P.covers(n):
        raise ValueError("P is not a partition of V(H)")
    s, r = P.s, P.r
    d = r - s

    s_cap = cluster_type_count(c, k)
    items[1] = ItemResult(s <= s_cap and d <= c, f"s={s} (cap {s_cap}), r-s={d} (cap {c})")

    n_types = 2 ** comb(d + k - 2, k - 1) if d else 1
    v0_cap = geometric_v0_bound(n_types, k, params.b)
    low = len(P.V0) + sum(len(p) for p in P.small_parts)
    low_cap = c * params.delta_prime * n
    items[2] = ItemResult(
        len(P.V0) <= v0_cap and low <= low_cap,
        f"|V0|={len(P.V0)} (cap {v0_cap}), |V0..Vs|={low} (cap {float(low_cap):.4g})",
    )

    need3 = (k - 1) * len(P.V0) + params.b
    bad3 = [i for i in range(1, s + 1) if len(P.parts[i]) < need3]
    items[3] = ItemResult(not bad3, f"small parts below {need3}: {bad3}" if bad3 else f"all >= {need3}")

    rv = robust_vectors(H, P, params.mu)
    bad4 = [i for i in range(1, s + 1) if not any(v[i - 1] == 1 for v in rv.type2)]
    items[4] = ItemResult(not bad4, f"small parts without a type-2 vector: {bad4}" if bad4 else "ok")

    need5 = params.delta_prime * n / 2
    bad_size = [i for i in range(s + 1, r + 1) if len(P.parts[i]) < need5]
    table = ReachabilityTable(H, [v for p in P.closed_parts for v in p], scale=H.n)
    rp = ReachabilityParams(params.beta, params.t)
    bad_closed = []
    for i in range(s + 1, r + 1):
        pair = table.unreachable_pair(P.parts[i], rp)
        if pair is not None:
            bad_closed.append((i, pair))
    detail = []
    if bad_size:
        detail.append(f"parts below {float(need5):.4g}: {bad_size}")
    if bad_closed:
        detail.append("not closed: " + ", ".join(f"V{i} pair {p}" for i, p in bad_closed))
    items[5] = ItemResult(not bad_size and not bad_closed, "; ".join(detail) or "ok")
    return PartitionReport(items, list(P.notes))
