"""(beta, i)-reachability between vertices and closedness of vertex sets.

A set ``S`` of ``ik - 1`` vertices is reachable for ``u`` and ``v`` when both
``H[S + u]`` and ``H[S + v]`` have perfect matchings. Counts are taken inside
an ambient vertex set ``A`` (default ``V(H)``), so they describe reachability
in ``H[A]``. Thresholds are ``beta * scale^(ik-1)`` where ``scale`` defaults to
``|A|``. Pipeline stages pass ``scale=n`` so that thresholds stay tied to the
host while the ambient set shrinks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .hypergraph import Hypergraph, mask_of


@dataclass(frozen=True)
class ReachabilityParams:
    beta: Fraction
    i: int = 1

    def __post_init__(self) -> None:
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if self.i < 1:
            raise ValueError("depth i must be >= 1")


def _ambient(H: Hypergraph, ambient: Iterable[int] | None) -> list[int]:
    return list(range(H.n)) if ambient is None else sorted(set(ambient))


def _links(H: Hypergraph, amb_mask: int) -> list[set[tuple[int, ...]]]:
    """Link of every vertex inside the ambient set: {e - v : v in e, e in H[A]}."""
    links: list[set[tuple[int, ...]]] = [set() for _ in range(H.n)]
    for e, em in zip(H.edges, H.edge_masks):
        if em & amb_mask == em:
            for j, v in enumerate(e):
                links[v].add(e[:j] + e[j + 1:])
    return links


class ReachabilityTable:
    """Cached reachable-set counts for one host and ambient set.

    Depth 1 uses link intersections (a (k-1)-set is reachable for ``u, v``
    exactly when it lies in both links). Deeper levels enumerate every
    ``(ik-1)``-subset and ask the matching oracle.
    """

    def __init__(self, H: Hypergraph, ambient: Iterable[int] | None = None, scale: int | None = None):
        self.H = H
        self.ambient = _ambient(H, ambient)
        self.scale = len(self.ambient) if scale is None else scale
        self.mask = mask_of(self.ambient)
        self._links: list[set[tuple[int, ...]]] | None = None
        self._counts: dict[tuple[int, int, int], int] = {}

    def count(self, u: int, v: int, i: int = 1) -> int:
        if u == v:
            raise ValueError("reachability needs two distinct vertices")
        if not (self.mask >> u) & 1 or not (self.mask >> v) & 1:
            raise ValueError("u and v must lie in the ambient set")
        key = (min(u, v), max(u, v), i)
        if key not in self._counts:
            self._counts[key] = self._compute(key[0], key[1], i)
        return self._counts[key]

    def _compute(self, u: int, v: int, i: int) -> int:
        H = self.H
        if i == 1:
            if self._links is None:
                self._links = _links(H, self.mask)
            lu, lv = self._links[u], self._links[v]
            if len(lu) > len(lv):
                lu, lv = lv, lu
            return sum(1 for s in lu if s in lv)
        size = i * H.k - 1
        rest = [w for w in self.ambient if w != u and w != v]
        bu, bv = 1 << u, 1 << v
        total = 0
        for S in combinations(rest, size):
            sm = mask_of(S)
            if H.has_perfect_matching_on(sm | bu) and H.has_perfect_matching_on(sm | bv):
                total += 1
        return total

    def threshold_met(self, count: int, beta: Fraction, i: int) -> bool:
        return count >= Fraction(beta) * self.scale ** (i * self.H.k - 1)

    def is_reachable(self, u: int, v: int, params: ReachabilityParams) -> bool:
        return self.threshold_met(self.count(u, v, params.i), params.beta, params.i)

    def neighborhood(self, v: int, params: ReachabilityParams) -> list[int]:
        return [u for u in self.ambient if u != v and self.is_reachable(u, v, params)]

    def is_closed(self, U: Sequence[int], params: ReachabilityParams) -> bool:
        return all(self.is_reachable(a, b, params) for a, b in combinations(sorted(U), 2))

    def unreachable_pair(self, U: Sequence[int], params: ReachabilityParams):
        for a, b in combinations(sorted(U), 2):
            if not self.is_reachable(a, b, params):
                return (a, b)
        return None


def reachable_count(
    H: Hypergraph, u: int, v: int, i: int = 1, ambient: Iterable[int] | None = None
) -> int:
    return ReachabilityTable(H, ambient).count(u, v, i)


def is_reachable(
    H: Hypergraph, u: int, v: int, params: ReachabilityParams, ambient: Iterable[int] | None = None
) -> bool:
    return ReachabilityTable(H, ambient).is_reachable(u, v, params)


def reachable_neighborhood(
    H: Hypergraph, v: int, params: ReachabilityParams, ambient: Iterable[int] | None = None
) -> list[int]:
    return ReachabilityTable(H, ambient).neighborhood(v, params)


def is_closed(
    H: Hypergraph, U: Sequence[int], params: ReachabilityParams, ambient: Iterable[int] | None = None
) -> bool:
    return ReachabilityTable(H, ambient).is_closed(U, params)
