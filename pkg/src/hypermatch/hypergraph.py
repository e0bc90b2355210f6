"""k-uniform hypergraphs, degrees and exact matching oracles.

Vertices are the integers ``0..n-1``. Edges are strictly increasing tuples,
stored deduplicated in lexicographic order, so every enumeration downstream
is deterministic. Internally edges are also kept as bitmasks; the oracles
below work on masks.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

Edge = tuple[int, ...]


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def vertices_of(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


@dataclass(frozen=True)
class Hypergraph:
    n: int
    k: int
    edges: tuple[Edge, ...]
    # scratch space for memoised sub-hypergraph queries; not part of equality
    _pm_memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ValueError(f"uniformity must be >= 2, got {self.k}")
        if self.n < 0:
            raise ValueError("negative vertex count")
        prev = None
        for e in self.edges:
            if len(e) != self.k:
                raise ValueError(f"edge {e} does not have {self.k} vertices")
            if any(b <= a for a, b in zip(e, e[1:])):
                raise ValueError(f"edge {e} is not strictly increasing")
            if e[0] < 0 or e[-1] >= self.n:
                raise ValueError(f"edge {e} has a vertex outside [0, {self.n})")
            if prev is not None and e <= prev:
                raise ValueError("edges must be sorted and unique")
            prev = e

    @classmethod
    def from_edges(cls, n: int, k: int, edges: Iterable[Iterable[int]]) -> "Hypergraph":
        """Canonicalise arbitrary vertex collections. Duplicates are merged."""
        canon = set()
        for e in edges:
            t = tuple(sorted(e))
            if len(set(t)) != len(t):
                raise ValueError(f"edge {t} repeats a vertex")
            canon.add(t)
        return cls(n, k, tuple(sorted(canon)))

    @classmethod
    def complete(cls, n: int, k: int) -> "Hypergraph":
        return cls(n, k, tuple(combinations(range(n), k)))

    @classmethod
    def empty(cls, n: int, k: int) -> "Hypergraph":
        return cls(n, k, ())

    def __len__(self) -> int:
        return len(self.edges)

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def edge_masks(self) -> tuple[int, ...]:
        return tuple(mask_of(e) for e in self.edges)

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices through each vertex, in canonical edge order."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for idx, e in enumerate(self.edges):
            for v in e:
                inc[v].append(idx)
        return tuple(tuple(x) for x in inc)

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(to_text(self).encode()).hexdigest()

    def has_edge(self, vertices: Iterable[int]) -> bool:
        return tuple(sorted(vertices)) in self.edge_set

    def has_perfect_matching_on(self, vertices: Iterable[int] | int) -> bool:
        """Whether ``H[vertices]`` has a perfect matching (memoised per host)."""
        m = vertices if isinstance(vertices, int) else mask_of(vertices)
        return _pm_search(self, m) is not None

    def perfect_matching_on(self, vertices: Iterable[int] | int) -> list[Edge] | None:
        m = vertices if isinstance(vertices, int) else mask_of(vertices)
        found = _pm_search(self, m)
        return None if found is None else [self.edges[i] for i in found]


def _pm_search(H: Hypergraph, mask: int) -> tuple[int, ...] | None:
    """Edge indices of a perfect matching of H[mask], or None.

    Branches on the least vertex still to be covered and tries its edges in
    canonical order, so the answer is the lexicographically first one found
    by that rule.
    """
    memo = H._pm_memo
    if mask in memo:
        return memo[mask]
    if bin(mask).count("1") % H.k:
        memo[mask] = None
        return None
    masks = H.edge_masks
    inc = H.incidence

    def rec(m: int) -> tuple[int, ...] | None:
        if m == 0:
            return ()
        if m in memo:
            return memo[m]
        v = (m & -m).bit_length() - 1
        result = None
        for idx in inc[v]:
            em = masks[idx]
            if em & m == em:
                rest = rec(m ^ em)
                if rest is not None:
                    result = (idx,) + rest
                    break
        memo[m] = result
        return result

    return rec(mask)


def degree(H: Hypergraph, S: Sequence[int]) -> int:
    """Number of edges of ``H`` containing ``S``."""
    S = list(S)
    if len(S) > H.k:
        raise ValueError(f"|S|={len(S)} exceeds k={H.k}")
    if len(set(S)) != len(S) or any(not 0 <= v < H.n for v in S):
        raise ValueError(f"invalid vertex set {S}")
    if not S:
        return len(H.edges)
    sm = mask_of(S)
    return sum(1 for idx in H.incidence[S[0]] if H.edge_masks[idx] & sm == sm)


def min_l_degree(H: Hypergraph, ell: int) -> int:
    if not 0 <= ell <= H.k - 1:
        raise ValueError(f"ell must lie in [0, {H.k - 1}], got {ell}")
    if ell == 0:
        return len(H.edges)
    if H.n < ell:
        return 0
    counts = dict.fromkeys(combinations(range(H.n), ell), 0)
    for e in H.edges:
        for s in combinations(e, ell):
            counts[s] += 1
    return min(counts.values())


def is_matching(H: Hypergraph, edges: Iterable[Sequence[int]]) -> bool:
    """Edges belong to ``H`` and are pairwise disjoint."""
    seen = 0
    for e in edges:
        t = tuple(e)
        if t not in H.edge_set:
            return False
        m = mask_of(t)
        if m & seen:
            return False
        seen |= m
    return True


def is_perfect_matching(H: Hypergraph, edges: Iterable[Sequence[int]]) -> bool:
    edges = list(edges)
    return is_matching(H, edges) and len(edges) * H.k == H.n


def covered(edges: Iterable[Sequence[int]]) -> list[int]:
    return sorted(v for e in edges for v in e)


def perfect_matching_oracle(H: Hypergraph) -> list[Edge] | None:
    """Exhaustive search; ``None`` when no perfect matching exists."""
    if H.n % H.k:
        return None
    return H.perfect_matching_on((1 << H.n) - 1)


def max_matching(H: Hypergraph) -> list[Edge]:
    """A maximum matching, by memoised branching on the least undecided vertex.

    At each state the least undecided vertex is either left uncovered or
    covered by one of its edges inside the undecided set. A branch stops as
    soon as it reaches the trivial bound ``undecided // k``.
    """
    masks = H.edge_masks
    inc = H.incidence
    k = H.k
    memo: dict[int, tuple[int, ...]] = {}

    def rec(m: int) -> tuple[int, ...]:
        if m in memo:
            return memo[m]
        cap = bin(m).count("1") // k
        if cap == 0:
            return ()
        v = (m & -m).bit_length() - 1
        best: tuple[int, ...] = ()
        for idx in inc[v]:
            em = masks[idx]
            if em & m == em:
                cand = (idx,) + rec(m ^ em)
                if len(cand) > len(best):
                    best = cand
                    if len(best) == cap:
                        break
        if len(best) < cap:
            skip = rec(m & ~(1 << v))
            if len(skip) > len(best):
                best = skip
        memo[m] = best
        return best

    return sorted(H.edges[i] for i in rec((1 << H.n) - 1))


def induced(H: Hypergraph, U: Iterable[int]) -> tuple[Hypergraph, list[int]]:
    """Sub-hypergraph on ``U`` relabelled to ``0..|U|-1``.

    Returns the hypergraph and ``labels`` with ``labels[new] = old``.
    """
    labels = sorted(set(U))
    if any(not 0 <= v < H.n for v in labels):
        raise ValueError("U is not a subset of V(H)")
    pos = {v: i for i, v in enumerate(labels)}
    um = mask_of(labels)
    edges = tuple(
        tuple(pos[v] for v in e) for e, em in zip(H.edges, H.edge_masks) if em & um == em
    )
    return Hypergraph(len(labels), H.k, edges), labels


def density_bound(n: int, k: int, ell: int) -> int:
    return comb(n - ell, k - ell)


# ----------------------------------------------------------------------------
# shared text format: first line "k n m", then m lines of k vertex ids


def to_text(H: Hypergraph) -> str:
    lines = [f"{H.k} {H.n} {len(H.edges)}"]
    lines.extend(" ".join(map(str, e)) for e in H.edges)
    return "\n".join(lines) + "\n"


def parse_text(text: str) -> Hypergraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty hypergraph file")
    try:
        k, n, m = (int(x) for x in rows[0])
    except ValueError as exc:
        raise ValueError(f"bad header line {' '.join(rows[0])!r}") from exc
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"header announces {m} edges, found {len(body)}")
    seen = set()
    for lineno, row in enumerate(body, start=2):
        if len(row) != k:
            raise ValueError(f"line {lineno}: expected {k} vertices")
        e = tuple(sorted(int(x) for x in row))
        if len(set(e)) != k:
            raise ValueError(f"line {lineno}: repeated vertex")
        if e[0] < 0 or e[-1] >= n:
            raise ValueError(f"line {lineno}: vertex out of range [0, {n})")
        if e in seen:
            raise ValueError(f"line {lineno}: duplicate edge {e}")
        seen.add(e)
    return Hypergraph(n, k, tuple(sorted(seen)))


def read_hypergraph(path: str) -> Hypergraph:
    """Read the text format from ``path``; ``-`` reads standard input."""
    if path == "-":
        return parse_text(sys.stdin.read())
    with open(path) as fh:
        return parse_text(fh.read())
