"""Shared value types: pipeline thresholds, vertex partitions, error classes."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Any, Sequence


class PartitionNotCertified(RuntimeError):
    """A partition stage could not certify its output contract."""


class ContractFailure(RuntimeError):
    """A desk-scale run missed a guarantee that only holds asymptotically."""


class SupplyExhausted(RuntimeError):
    """No unused absorbing set is left for a leftover k-set."""


def _frac(x: Any) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class PipelineParams:
    """Thresholds that the asymptotic argument fixes by a hierarchy.

    Here they are explicit values. ``delta=None`` means "use the conjectured
    threshold for (k, ell)" and is filled in by :meth:`resolve`. ``q=None``
    means "use the order of the computed coset group".
    """

    delta: Fraction | None = None
    delta_prime: Fraction = Fraction(1, 6)
    gamma: Fraction = Fraction(1, 100)
    alpha: Fraction = Fraction(1, 50)
    beta: Fraction = Fraction(1, 200)
    mu: Fraction = Fraction(1, 1000)
    t: int = 1
    q: int | None = None
    C: int = 4
    b: int = 3
    oracle_cap: int = 15
    absorb_budget: int = 200_000

    def __post_init__(self) -> None:
        for name in ("delta", "delta_prime", "gamma", "alpha", "beta", "mu"):
            val = getattr(self, name)
            if val is None:
                continue
            val = _frac(val)
            object.__setattr__(self, name, val)
            if val <= 0:
                raise ValueError(f"{name} must be positive")
        if self.t < 1 or self.C < 1 or self.b < 0:
            raise ValueError("t and C must be >= 1, b >= 0")
        if self.q is not None and self.q < 1:
            raise ValueError("q must be >= 1")

    @property
    def c(self) -> int:
        if self.delta is None:
            raise ValueError("delta unresolved; call resolve(k, ell)")
        return floor(1 / self.delta)

    def resolve(self, k: int, ell: int) -> "PipelineParams":
        if self.delta is not None:
            return self
        from .fractional import conjectured_cstar

        return dataclasses.replace(self, delta=conjectured_cstar(k, ell))

    def to_json(self) -> dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Fraction) else v
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "PipelineParams":
        kw = {}
        for f in dataclasses.fields(cls):
            if f.name in data:
                v = data[f.name]
                kw[f.name] = Fraction(v) if isinstance(v, str) else v
        return cls(**kw)


@dataclass(frozen=True)
class Partition:
    """Ordered parts ``V0, V1..Vs, V(s+1)..Vr`` of ``V(H)``.

    ``parts[0]`` is the exceptional part ``V0``; ``parts[1..s]`` are the small
    robust clusters; ``parts[s+1..r]`` are the closed parts. Index-vector
    coordinate ``i`` (1-based) counts ``parts[i]``.
    """

    parts: tuple[tuple[int, ...], ...]
    s: int = 0
    # certified closedness depth of each closed part (None = not verified)
    certified_depth: tuple[int | None, ...] = ()
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        parts = tuple(tuple(sorted(p)) for p in self.parts)
        object.__setattr__(self, "parts", parts)
        if not parts:
            raise ValueError("a partition has at least the part V0")
        if not 0 <= self.s <= len(parts) - 1:
            raise ValueError("need 0 <= s <= r")
        seen: set[int] = set()
        for p in parts:
            if seen.intersection(p):
                raise ValueError("parts overlap")
            seen.update(p)
        if not self.certified_depth:
            object.__setattr__(self, "certified_depth", (None,) * (self.r - self.s))

    @classmethod
    def build(cls, V0: Sequence[int], small: Sequence[Sequence[int]], closed: Sequence[Sequence[int]], **kw):
        return cls((tuple(V0), *map(tuple, small), *map(tuple, closed)), s=len(small), **kw)

    @property
    def r(self) -> int:
        return len(self.parts) - 1

    @property
    def V0(self) -> tuple[int, ...]:
        return self.parts[0]

    @property
    def small_parts(self) -> tuple[tuple[int, ...], ...]:
        return self.parts[1 : self.s + 1]

    @property
    def closed_parts(self) -> tuple[tuple[int, ...], ...]:
        return self.parts[self.s + 1 :]

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.parts)

    def owner(self) -> dict[int, int]:
        return {v: i for i, p in enumerate(self.parts) for v in p}

    def covers(self, n: int) -> bool:
        return sorted(v for p in self.parts for v in p) == list(range(n))

    def to_json(self) -> dict[str, Any]:
        return {
            "V0": list(self.V0),
            "s": self.s,
            "r": self.r,
            "parts": [list(p) for p in self.parts[1:]],
            "certified_depth": list(self.certified_depth),
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Partition":
        parts = (tuple(data["V0"]), *(tuple(p) for p in data["parts"]))
        depth = tuple(data.get("certified_depth") or ())
        return cls(parts, s=data["s"], certified_depth=depth, notes=tuple(data.get("notes", ())))
