"""Index vectors, robust vectors, integer lattices and coset groups.

All arithmetic is on Python integers. Lattices are stored by a row-style
Hermite normal form basis; coset groups ``L_max / L`` come from a Smith
normal form of ``L`` written in a basis of ``L_max``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import prod
from typing import Iterable, Sequence

from .core import ContractFailure, Partition, PipelineParams
from .hypergraph import Edge, Hypergraph, mask_of
from .reachability import ReachabilityParams, ReachabilityTable

Vector = tuple[int, ...]


# ----------------------------------------------------------------------------
# index vectors and robust vectors


def index_vector(P: Partition, A: Iterable[int]) -> Vector:
    """``|A & V_i|`` for ``i = 1..r``; vertices of ``V0`` are not counted."""
    owner = P.owner()
    vec = [0] * P.r
    for v in A:
        i = owner[v]
        if i:
            vec[i - 1] += 1
    return tuple(vec)


def edge_index_vectors(H: Hypergraph, P: Partition) -> list[Vector]:
    owner = P.owner()
    out = []
    for e in H.edges:
        vec = [0] * P.r
        for v in e:
            i = owner[v]
            if i:
                vec[i - 1] += 1
        out.append(tuple(vec))
    return out


def k_vectors(r: int, k: int) -> list[Vector]:
    """All non-negative integer vectors of length r with coordinate sum k."""
    if r == 0:
        return [()] if k == 0 else []
    out = []
    for bars in combinations(range(k + r - 1), r - 1):
        prev, vec = -1, []
        for b in bars:
            vec.append(b - prev - 1)
            prev = b
        vec.append(k + r - 2 - prev)
        out.append(tuple(vec))
    return sorted(out)


@dataclass(frozen=True)
class RobustVectors:
    type1: tuple[Vector, ...]
    type2: tuple[Vector, ...]
    edge_counts: dict  # vector -> number of edges with that index vector

    @property
    def all(self) -> tuple[Vector, ...]:
        return tuple(sorted(set(self.type1) | set(self.type2)))

    def to_json(self) -> dict:
        return {
            "type1": [list(v) for v in self.type1],
            "type2": [list(v) for v in self.type2],
        }


def robust_vectors(H: Hypergraph, P: Partition, mu: Fraction) -> RobustVectors:
    """The mu-robust k-vectors of ``H`` with respect to ``P``.

    Type 1: vanishing on the small parts, carried by at least ``mu n^k`` edges.
    Type 2: a single 1 on some small part ``V_i`` (zero on the other small
    parts), with every vertex of ``V_i`` in at least ``mu n^(k-1)`` edges of
    that index vector.
    """
    mu = Fraction(mu)
    n, k, s = H.n, H.k, P.s
    vecs = edge_index_vectors(H, P)
    counts = Counter(v for v in vecs if sum(v) == k)
    type1 = sorted(
        v for v, c in counts.items() if not any(v[:s]) and c >= mu * n**k
    )
    type2 = []
    if s:
        per_vertex: dict[Vector, Counter] = {}
        for e, v in zip(H.edges, vecs):
            if sum(v) != k:
                continue
            small = [i for i in range(s) if v[i]]
            if len(small) == 1 and v[small[0]] == 1:
                per_vertex.setdefault(v, Counter()).update(
                    w for w in e if w in set(P.parts[small[0] + 1])
                )
        for v, cnt in per_vertex.items():
            i = next(j for j in range(s) if v[j])
            part = P.parts[i + 1]
            if part and all(cnt[w] >= mu * n ** (k - 1) for w in part):
                type2.append(v)
    return RobustVectors(tuple(type1), tuple(sorted(type2)), dict(counts))


# ----------------------------------------------------------------------------
# Hermite and Smith normal forms


def hermite_rows(gens: Iterable[Sequence[int]], r: int) -> list[list[int]]:
    """Row-style Hermite normal form of the integer span of ``gens``.

    Rows are in echelon form with positive pivots, and every entry above a
    pivot is reduced into ``[0, pivot)``. Zero rows are dropped.
    """
    A = [list(g) for g in gens if any(g)]
    for g in A:
        if len(g) != r:
            raise ValueError(f"generator {g} has length {len(g)}, expected {r}")
    pivots: list[int] = []
    top = 0
    for col in range(r):
        while True:
            nz = [i for i in range(top, len(A)) if A[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(A[i][col]), i))
            A[top], A[piv] = A[piv], A[top]
            clean = True
            for i in range(top + 1, len(A)):
                if A[i][col]:
                    q = A[i][col] // A[top][col]
                    A[i] = [a - q * b for a, b in zip(A[i], A[top])]
                    if A[i][col]:
                        clean = False
            if clean:
                if A[top][col] < 0:
                    A[top] = [-a for a in A[top]]
                pivots.append(col)
                top += 1
                break
    A = A[:top]
    for j, pc in enumerate(pivots):
        for i in range(j):
            q = A[i][pc] // A[j][pc]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[j])]
    return A


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """Return ``(diag, U, V)`` with ``U M V = D`` and ``diag[i] | diag[i+1]``.

    ``U`` and ``V`` are unimodular; ``diag`` lists the non-zero invariant
    factors (its length is the rank).
    """
    A = [list(row) for row in M]
    m = len(A)
    ncols = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, f):  # col_dst += f * col_src
        for row in A:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    t = 0
    while t < min(m, ncols):
        entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, ncols) if A[i][j]]
        if not entries:
            break
        _, i0, j0 = min(entries)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, ncols):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
            rest = [(abs(A[i][t]), i, t) for i in range(t + 1, m) if A[i][t]]
            rest += [(abs(A[t][j]), t, j) for j in range(t + 1, ncols) if A[t][j]]
            if rest:
                _, i1, j1 = min(rest)
                if j1 == t:
                    swap_rows(t, i1)
                else:
                    swap_cols(t, j1)
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, ncols) if A[i][j] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return [A[i][i] for i in range(t)], U, V


# ----------------------------------------------------------------------------
# lattices


class Lattice:
    """Subgroup of ``Z^r`` spanned by a set of generators."""

    def __init__(self, r: int, generators: Iterable[Sequence[int]] = ()):
        self.r = r
        self.generators = [tuple(g) for g in generators]
        self.basis = [tuple(row) for row in hermite_rows(self.generators, r)]
        self._pivots = [next(j for j, a in enumerate(row) if a) for row in self.basis]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __contains__(self, vec: Sequence[int]) -> bool:
        if len(vec) != self.r:
            raise ValueError(f"vector of length {len(vec)} in a rank-{self.r} ambient")
        v = list(vec)
        col = 0
        for row, pc in zip(self.basis, self._pivots):
            if any(v[col:pc]):
                return False
            if v[pc] % row[pc]:
                return False
            q = v[pc] // row[pc]
            if q:
                v = [a - q * b for a, b in zip(v, row)]
            col = pc + 1
        return not any(v)

    def contains(self, vec: Sequence[int]) -> bool:
        return vec in self

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Lattice) and self.r == other.r and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.r, tuple(self.basis)))

    def __repr__(self) -> str:
        return f"Lattice(r={self.r}, basis={self.basis})"

    def index(self) -> int | None:
        """``[Z^r : L]`` when finite (product of HNF pivots)."""
        if self.rank < self.r:
            return None
        return prod(row[pc] for row, pc in zip(self.basis, self._pivots))


def lattice_generate(gens: Iterable[Sequence[int]], r: int | None = None) -> Lattice:
    gens = [tuple(g) for g in gens]
    if r is None:
        if not gens:
            raise ValueError("r is required when there are no generators")
        r = len(gens[0])
    return Lattice(r, gens)


def lmax_basis(r: int, k: int) -> list[Vector]:
    """``u_i - u_(i+1)`` for ``i < r``, then ``k u_r``."""
    rows = []
    for i in range(r - 1):
        row = [0] * r
        row[i], row[i + 1] = 1, -1
        rows.append(tuple(row))
    if r:
        rows.append(tuple([0] * (r - 1) + [k]))
    return rows


def lmax(r: int, k: int) -> Lattice:
    """Integer vectors of length r whose coordinate sum is divisible by k."""
    return Lattice(r, lmax_basis(r, k))


def lmax_coords(v: Sequence[int], k: int) -> list[int]:
    """Coordinates of ``v`` in :func:`lmax_basis` (requires ``k | sum(v)``)."""
    total = sum(v)
    if total % k:
        raise ValueError(f"{tuple(v)} is not in L_max (sum {total} not divisible by {k})")
    out, run = [], 0
    for a in v[:-1]:
        run += a
        out.append(run)
    if len(v):
        out.append(total // k)
    return out


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant by fraction-free elimination."""
    A = [list(r) for r in M]
    n = len(A)
    sign, prev = 1, 1
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c]), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                A[i][j] = (A[i][j] * A[c][c] - A[i][c] * A[c][j]) // prev
        prev = A[c][c]
    return sign * (A[n - 1][n - 1] if n else 1)


class CosetGroup:
    """The quotient ``L_max / L`` with an explicit residue map.

    Elements are tuples: one entry modulo each invariant factor larger than
    one, followed by one unbounded entry per missing rank.
    """

    def __init__(self, L: Lattice, r: int, k: int):
        if L.r != r:
            raise ValueError("lattice dimension does not match r")
        for row in L.basis:
            if sum(row) % k:
                raise ValueError(f"L is not contained in L_max: {row} has sum {sum(row)}")
        self.L, self.r, self.k = L, r, k
        X = [lmax_coords(row, k) for row in L.basis]
        if X:
            diag, _, V = smith_normal_form(X)
        else:
            diag, V = [], [[int(i == j) for j in range(r)] for i in range(r)]
        self.invariant_factors = tuple(diag)
        self._V = V
        self._torsion = [(i, d) for i, d in enumerate(diag) if d != 1]
        self._free = list(range(len(diag), r))

    @property
    def is_finite(self) -> bool:
        return not self._free

    @property
    def order(self) -> int | None:
        return prod(d for _, d in self._torsion) if self.is_finite else None

    @property
    def moduli(self) -> tuple[int, ...]:
        return tuple(d for _, d in self._torsion)

    def residue(self, v: Sequence[int]) -> tuple[int, ...]:
        y = lmax_coords(v, self.k)
        z = [sum(y[a] * self._V[a][j] for a in range(self.r)) for j in range(self.r)]
        return tuple(z[i] % d for i, d in self._torsion) + tuple(z[i] for i in self._free)

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * (len(self._torsion) + len(self._free))

    def add(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        nt = len(self._torsion)
        head = tuple((x + y) % d for x, y, (_, d) in zip(a[:nt], b[:nt], self._torsion))
        return head + tuple(x + y for x, y in zip(a[nt:], b[nt:]))

    def neg(self, a: Sequence[int]) -> tuple[int, ...]:
        nt = len(self._torsion)
        return tuple((-x) % d for x, (_, d) in zip(a[:nt], self._torsion)) + tuple(-x for x in a[nt:])

    def elements(self) -> list[tuple[int, ...]]:
        if not self.is_finite:
            raise ValueError("infinite coset group")
        return [tuple(t) for t in product(*(range(d) for d in self.moduli))]

    def to_json(self) -> dict:
        return {
            "invariant_factors": list(self.invariant_factors),
            "moduli": list(self.moduli),
            "order": self.order,
            "finite": self.is_finite,
        }


def coset_group(L: Lattice, r: int, k: int) -> CosetGroup:
    return CosetGroup(L, r, k)


def residue(Q: CosetGroup, v: Sequence[int]) -> tuple[int, ...]:
    return Q.residue(v)


def unit(r: int, i: int) -> list[int]:
    u = [0] * r
    u[i - 1] = 1
    return u


def has_transferral(L: Lattice, i: int, j: int) -> bool:
    """Whether ``u_i - u_j`` lies in ``L`` (parts numbered from 1)."""
    if i == j or not (1 <= i <= L.r and 1 <= j <= L.r):
        raise ValueError("need distinct part indices in [1, r]")
    v = [0] * L.r
    v[i - 1], v[j - 1] = 1, -1
    return v in L


def transferral_matrix(L: Lattice) -> list[list[bool]]:
    return [[i != j and has_transferral(L, i, j) for j in range(1, L.r + 1)] for i in range(1, L.r + 1)]


def two_unit_queries(L: Lattice, vec: Sequence[int]) -> list[tuple[int, int]]:
    """All ``i <= j`` with ``vec - u_i - u_j`` in ``L``."""
    out = []
    for i in range(1, L.r + 1):
        for j in range(i, L.r + 1):
            w = list(vec)
            w[i - 1] -= 1
            w[j - 1] -= 1
            if w in L:
                out.append((i, j))
    return out


def one_unit_queries(L: Lattice, vec: Sequence[int]) -> list[int]:
    """All ``i`` with ``vec - u_i`` in ``L``."""
    out = []
    for i in range(1, L.r + 1):
        w = list(vec)
        w[i - 1] -= 1
        if w in L:
            out.append(i)
    return out


def robust_lattice(H: Hypergraph, P: Partition, mu: Fraction) -> tuple[RobustVectors, Lattice]:
    rv = robust_vectors(H, P, mu)
    return rv, Lattice(P.r, rv.all)


# ----------------------------------------------------------------------------
# merging parts joined by a transferral


def _closed_union_table(H: Hypergraph, P: Partition) -> ReachabilityTable:
    return ReachabilityTable(H, [v for p in P.closed_parts for v in p], scale=H.n)


def merge_transferral_parts(
    H: Hypergraph, P: Partition, mu: Fraction, params: PipelineParams | None = None
) -> Partition:
    """Merge closed parts ``V_i, V_j`` while ``u_i - u_j`` lies in the robust lattice.

    Pairs are tried in increasing ``(i, j)``; robust vectors are recomputed
    after every merge. Merged parts are re-checked for ``(beta, t)``
    closedness inside the union of closed parts when ``params`` is given;
    the result is recorded in ``certified_depth``.
    """
    parts = list(P.parts)
    depth = list(P.certified_depth)
    s = P.s
    notes = list(P.notes)
    while True:
        cur = Partition(tuple(parts), s=s, certified_depth=tuple(depth))
        _, L = robust_lattice(H, cur, mu)
        pair = next(
            (
                (i, j)
                for i in range(s + 1, cur.r + 1)
                for j in range(i + 1, cur.r + 1)
                if has_transferral(L, i, j)
            ),
            None,
        )
        if pair is None:
            return Partition(tuple(parts), s=s, certified_depth=tuple(depth), notes=tuple(notes))
        i, j = pair
        merged = tuple(sorted(parts[i] + parts[j]))
        parts[i] = merged
        del parts[j]
        del depth[j - s - 1]
        d = None
        if params is not None:
            table = _closed_union_table(H, Partition(tuple(parts), s=s))
            if table.is_closed(merged, ReachabilityParams(params.beta, params.t)):
                d = params.t
        depth[i - s - 1] = d
        notes.append(f"merged parts {i},{j} via transferral")


# ----------------------------------------------------------------------------
# coefficient bounds


def min_inf_representation(
    v: Sequence[int], I: Sequence[Sequence[int]], cap: int
) -> tuple[int, ...] | None:
    """Integer coefficients ``a`` with ``sum a_i I_i = v`` minimising ``max |a_i|``.

    Tries radius ``R = 0, 1, .., cap`` and returns the first representation
    found (coefficients in ``[-R, R]``), or ``None`` if none exists within
    ``cap``. Partial sums that cannot reach ``v`` with the remaining
    generators are pruned.
    """
    I = [tuple(g) for g in I]
    v = tuple(v)
    r = len(v)
    if not I:
        return () if not any(v) else None
    # remaining reach per coordinate after generator j
    reach = [[0] * r for _ in range(len(I) + 1)]
    for j in range(len(I) - 1, -1, -1):
        reach[j] = [a + abs(b) for a, b in zip(reach[j + 1], I[j])]
    for R in range(cap + 1):
        states: dict[Vector, tuple[int, ...]] = {tuple([0] * r): ()}
        for j, g in enumerate(I):
            nxt: dict[Vector, tuple[int, ...]] = {}
            lim = [R * x for x in reach[j + 1]]
            for s, coeffs in states.items():
                for a in sorted(range(-R, R + 1), key=lambda x: (abs(x), -x)):
                    t = tuple(x + a * y for x, y in zip(s, g))
                    if t in nxt:
                        continue
                    if all(abs(vt - tt) <= l for vt, tt, l in zip(v, t, lim)):
                        nxt[t] = coeffs + (a,)
            states = nxt
        if v in states:
            return states[v]
    return None


def bounded_vectors(r: int, m: int) -> list[Vector]:
    """Non-negative vectors of length r with coordinate sum at most m."""
    return [vec for total in range(m + 1) for vec in k_vectors(r, total)]


def coefficient_bound(r: int, k: int, I: Sequence[Sequence[int]], m: int, cap: int = 8) -> int:
    """Largest minimal coefficient size needed to write a lattice point.

    Ranges over all non-negative vectors ``v`` of coordinate sum at most
    ``m`` that lie in the lattice spanned by ``I``; for each, the smallest
    ``max |a_i|`` over integer representations ``v = sum a_i I_i`` is taken.
    Raises :class:`ContractFailure` if some ``v`` needs more than ``cap``.
    """
    if not I:
        raise ValueError("I must be non-empty")
    L = Lattice(r, I)
    best = 0
    for v in bounded_vectors(r, m):
        if v not in L:
            continue
        rep = min_inf_representation(v, I, cap)
        if rep is None:
            raise ContractFailure(f"coefficient search cap {cap} binds at {v}")
        best = max(best, max((abs(a) for a in rep), default=0))
    return best


# ----------------------------------------------------------------------------
# solubility


@dataclass
class SolubilityResult:
    matching: list[Edge] | None
    bound: int
    examined: int

    @property
    def soluble(self) -> bool:
        return self.matching is not None


def solubility_search(
    H: Hypergraph, P: Partition, L: Lattice, U: Iterable[int], q: int
) -> SolubilityResult:
    """Smallest matching covering ``U`` whose leftover index vector lies in ``L``.

    Matchings of size ``0, 1, .., |U| + q`` are enumerated as increasing
    tuples of edge indices (lexicographic order within a size); the first
    hit is returned. ``examined`` counts the complete candidates tested.
    """
    U = sorted(set(U))
    um = mask_of(U)
    bound = len(U) + q
    vecs = edge_index_vectors(H, P)
    masks = H.edge_masks
    full = index_vector(P, range(H.n))
    k = H.k
    last_inc = [max(H.incidence[u], default=-1) for u in range(H.n)]
    examined = 0

    def rec(start: int, size: int, used: int, left: list[int], chosen: list[int]):
        nonlocal examined
        if size == 0:
            if used & um != um:
                return None
            examined += 1
            return list(chosen) if left in L else None
        uncovered = um & ~used
        if bin(uncovered).count("1") > size * k:
            return None
        w = uncovered
        while w:
            low = w & -w
            if last_inc[low.bit_length() - 1] < start:
                return None
            w ^= low
        for idx in range(start, len(masks)):
            em = masks[idx]
            if em & used:
                continue
            chosen.append(idx)
            got = rec(
                idx + 1, size - 1, used | em, [a - b for a, b in zip(left, vecs[idx])], chosen
            )
            chosen.pop()
            if got is not None:
                return got
        return None

    for size in range(0, min(bound, H.n // k) + 1):
        got = rec(0, size, 0, list(full), [])
        if got is not None:
            return SolubilityResult([H.edges[i] for i in got], bound, examined)
    return SolubilityResult(None, bound, examined)


def is_soluble(
    H: Hypergraph, P: Partition, L: Lattice, U: Iterable[int], q: int
) -> list[Edge] | None:
    """A ``(U, q)``-solution, or ``None`` if there is none."""
    return solubility_search(H, P, L, U, q).matching


# ----------------------------------------------------------------------------
# coset pigeonhole


def zero_sum_reduction(Q: CosetGroup, residues: Sequence[Sequence[int]]) -> list[int]:
    """Indices of at most ``|Q| - 1`` items with the same residue total as all items.

    While more than ``|Q| - 1`` items remain, two of the partial sums
    ``s_0 .. s_m`` coincide, and the block between them sums to zero in
    ``Q`` and is dropped. Requires a finite ``Q``.
    """
    if not Q.is_finite:
        raise ValueError("pigeonhole needs a finite coset group")
    keep = list(range(len(residues)))
    bound = Q.order - 1
    while len(keep) > bound:
        seen = {Q.identity: 0}
        acc = Q.identity
        for pos, idx in enumerate(keep, start=1):
            acc = Q.add(acc, residues[idx])
            if acc in seen:
                start = seen[acc]
                keep = keep[:start] + keep[pos:]
                break
            seen[acc] = pos
        else:  # pragma: no cover - impossible by pigeonhole
            raise AssertionError("no repeated partial sum")
    return keep


def residue_sum(Q: CosetGroup, residues: Iterable[Sequence[int]]) -> tuple[int, ...]:
    acc = Q.identity
    for x in residues:
        acc = Q.add(acc, x)
    return acc
