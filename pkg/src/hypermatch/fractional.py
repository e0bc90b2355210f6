"""Fractional matchings via an exact rational simplex.

Weights, pivots and optimum values are ``Fraction`` throughout, so the
"value equals n/k" test is an exact equality rather than a tolerance check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .hypergraph import Edge, Hypergraph


class LPError(RuntimeError):
    pass


def linprog_exact(
    c: Sequence[int],
    A: Sequence[Sequence[int]],
    b: Sequence[int],
) -> tuple[Fraction, list[Fraction]]:
    """Maximise ``c.x`` subject to ``A x <= b`` and ``x >= 0`` (integer data).

    Two-phase tableau simplex with Bland's rule: the entering column is the
    lowest index with positive reduced cost, the leaving row is the minimum
    ratio with ties broken by lowest basic index. Rows with negative
    right-hand side are negated and given an artificial variable.

    The tableau is kept fraction-free (integer pivoting): stored entries are
    integers over one common denominator ``D`` and each update divides
    exactly by the previous pivot.
    """
    m, nvar = len(A), len(c)
    nart = sum(1 for bi in b if bi < 0)
    width = nvar + m + nart
    rhs_col = width
    T: list[list[int]] = []
    basis: list[int] = []
    arts: list[int] = []
    for i in range(m):
        row = [int(a) for a in A[i]] + [0] * (m + nart) + [int(b[i])]
        row[nvar + i] = 1
        if b[i] < 0:
            row = [-x for x in row]
            j = nvar + m + len(arts)
            arts.append(j)
            row[j] = 1
            basis.append(j)
        else:
            basis.append(nvar + i)
        T.append(row)

    def reduced_row(obj: list[int]) -> list[int]:
        # reduced costs w.r.t. the current basis, at denominator D
        red = [x * D for x in obj] + [0]
        for i in range(m):
            cb = obj[basis[i]]
            if cb:
                red = [a - cb * t for a, t in zip(red, T[i])]
        return red

    D = 1
    phase2 = [int(x) for x in c] + [0] * (m + nart)
    objrows = [reduced_row(phase2)]
    if nart:
        phase1 = [0] * width
        for j in arts:
            phase1[j] = -1
        objrows.append(reduced_row(phase1))

    def pivot(r: int, col: int) -> None:
        nonlocal D
        pr = T[r]
        p = pr[col]
        for rowlist in (T, objrows):
            for i, row in enumerate(rowlist):
                if row is pr:
                    continue
                f = row[col]
                if f:
                    rowlist[i] = [(p * a - f * q) // D for a, q in zip(row, pr)]
                elif p != D:
                    rowlist[i] = [(p * a) // D for a in row]
        D = p
        basis[r] = col

    def run(which: int, allowed: int) -> None:
        while True:
            red = objrows[which]
            enter = next((j for j in range(allowed) if red[j] > 0), None)
            if enter is None:
                return
            leave = None
            for i in range(m):
                a = T[i][enter]
                if a > 0:
                    if leave is None:
                        leave = i
                        continue
                    # compare T[i][rhs]/a against T[leave][rhs]/T[leave][enter]
                    lhs = T[i][rhs_col] * T[leave][enter]
                    cur = T[leave][rhs_col] * a
                    if lhs < cur or (lhs == cur and basis[i] < basis[leave]):
                        leave = i
            if leave is None:
                raise LPError("unbounded")
            pivot(leave, enter)

    if nart:
        run(1, width)
        if any(basis[i] >= nvar + m and T[i][rhs_col] != 0 for i in range(m)):
            raise LPError("infeasible")
        # drive zero-level artificials out of the basis where possible
        for i in range(m):
            if basis[i] >= nvar + m:
                j = next((j for j in range(nvar + m) if T[i][j] and j not in basis), None)
                if j is not None:
                    pivot(i, j)
        objrows.pop()
    run(0, nvar + m)
    x = [Fraction(0)] * nvar
    for i, j in enumerate(basis):
        if j < nvar:
            x[j] = Fraction(T[i][rhs_col], D)
    return sum((cj * xj for cj, xj in zip(c, x)), Fraction(0)), x


@dataclass(frozen=True)
class FractionalMatching:
    n: int
    k: int
    weights: dict  # edge -> Fraction, positive entries only

    @property
    def size(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def is_valid(self, H: Hypergraph) -> bool:
        load = [Fraction(0)] * H.n
        for e, w in self.weights.items():
            if e not in H.edge_set or not 0 <= w <= 1:
                return False
            for v in e:
                load[v] += w
        return all(x <= 1 for x in load)

    def is_perfect(self) -> bool:
        return self.size == Fraction(self.n, self.k)


def max_fractional_matching(H: Hypergraph) -> tuple[Fraction, FractionalMatching]:
    """Exact LP optimum of the fractional matching polytope of ``H``.

    The per-edge bound ``w(e) <= 1`` is implied by the vertex constraints
    (every edge has a vertex), so only vertex rows enter the tableau.
    """
    if not H.edges:
        return Fraction(0), FractionalMatching(H.n, H.k, {})
    A = [[0] * len(H.edges) for _ in range(H.n)]
    for j, e in enumerate(H.edges):
        for v in e:
            A[v][j] = 1
    value, x = linprog_exact([1] * len(H.edges), A, [1] * H.n)
    weights = {e: w for e, w in zip(H.edges, x) if w}
    return value, FractionalMatching(H.n, H.k, weights)


def min_fractional_cover(H: Hypergraph) -> tuple[Fraction, list[Fraction]]:
    """Minimum fractional vertex cover, solved as its own LP (needs phase one)."""
    if not H.edges:
        return Fraction(0), [Fraction(0)] * H.n
    A = []
    for e in H.edges:
        row = [0] * H.n
        for v in e:
            row[v] = -1
        A.append(row)
    value, y = linprog_exact([-1] * H.n, A, [-1] * len(H.edges))
    return -value, y


def has_perfect_fractional_matching(H: Hypergraph) -> bool:
    return max_fractional_matching(H)[0] == Fraction(H.n, H.k)


def conjectured_cstar(k: int, ell: int) -> Fraction:
    """``1 - (1 - 1/k)^(k - ell)``, exact."""
    if not 1 <= ell <= k - 1:
        raise ValueError(f"need 1 <= ell <= k-1, got k={k}, ell={ell}")
    return 1 - Fraction(k - 1, k) ** (k - ell)


def witness_json(fm: FractionalMatching) -> dict[str, str]:
    return {" ".join(map(str, e)): str(w) for e, w in sorted(fm.weights.items())}

