"""Barrier constructions and seeded random k-graphs."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .hypergraph import Hypergraph


@dataclass(frozen=True)
class BarrierSpec:
    n: int
    k: int
    part_sizes: tuple[int, ...]
    kind: str  # "space" | "cover" | "lattice-defined"

    def __post_init__(self) -> None:
        if sum(self.part_sizes) != self.n:
            raise ValueError("part sizes must sum to n")
        if self.kind not in ("space", "cover", "lattice-defined"):
            raise ValueError(f"unknown barrier kind {self.kind!r}")
        if self.kind == "space" and self.part_sizes[1] % 2 == 0:
            raise ValueError("space barrier needs |Y| odd")


def space_barrier_spec(n: int, k: int) -> BarrierSpec:
    # |Y| is the largest odd integer <= floor(n/2); X takes the rest
    y = n // 2 if (n // 2) % 2 else n // 2 - 1
    return BarrierSpec(n, k, (n - y, y), "space")


def space_barrier(n: int, k: int) -> Hypergraph:
    """All k-sets meeting ``Y`` in an even number of vertices.

    ``X = {0..|X|-1}`` and ``Y`` is the rest, with ``|Y|`` odd, so no
    matching covers ``Y``.
    """
    if not n >= k >= 2:
        raise ValueError("need n >= k >= 2")
    nx = space_barrier_spec(n, k).part_sizes[0]
    edges = tuple(e for e in combinations(range(n), k) if sum(v >= nx for v in e) % 2 == 0)
    return Hypergraph(n, k, edges)


def cover_barrier_spec(n: int, k: int) -> BarrierSpec:
    w = n // k - 1
    return BarrierSpec(n, k, (w, n - w), "cover")


def cover_barrier(n: int, k: int) -> Hypergraph:
    """All k-sets meeting ``W = {0..n/k-2}``; every matching has at most |W| edges."""
    if n % k or n < 2 * k:
        raise ValueError("cover barrier needs k | n and n >= 2k")
    w = n // k - 1
    edges = tuple(e for e in combinations(range(n), k) if e[0] < w)
    return Hypergraph(n, k, edges)


def part_of(part_sizes: Sequence[int]) -> list[int]:
    owner = []
    for i, size in enumerate(part_sizes):
        owner.extend([i] * size)
    return owner


def lattice_barrier(
    part_sizes: Sequence[int], k: int, allowed: Iterable[Sequence[int]]
) -> Hypergraph:
    """k-sets whose intersection profile over consecutive parts lies in ``allowed``."""
    r = len(part_sizes)
    allowed_set = set()
    for vec in allowed:
        vec = tuple(vec)
        if len(vec) != r or any(x < 0 for x in vec) or sum(vec) != k:
            raise ValueError(f"{vec} is not a {k}-vector over {r} parts")
        allowed_set.add(vec)
    owner = part_of(part_sizes)
    n = len(owner)
    edges = []
    for e in combinations(range(n), k):
        prof = [0] * r
        for v in e:
            prof[owner[v]] += 1
        if tuple(prof) in allowed_set:
            edges.append(e)
    return Hypergraph(n, k, tuple(edges))


def random_kgraph(n: int, k: int, p: Fraction | int | str, seed: int) -> Hypergraph:
    """Each k-set kept independently with probability ``p``.

    One 64-bit draw per k-set in lexicographic order from a seeded Mersenne
    Twister; the draw ``u`` keeps the set iff ``u < p * 2**64`` (exact).
    """
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rng = random.Random(seed)
    cut = p * (1 << 64)
    edges = tuple(e for e in combinations(range(n), k) if rng.getrandbits(64) < cut)
    return Hypergraph(n, k, edges)
