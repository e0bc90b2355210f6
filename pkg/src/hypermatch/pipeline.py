"""End-to-end decision procedure, certificates and oracle cross-validation.

``decide`` returns a verdict of one of three kinds:

* ``structural``: a perfect matching built by the lattice/absorption route,
* ``certificate``: no perfect matching, witnessed by an insoluble
  ``(partition, lattice)`` pair (or by ``k`` not dividing ``n``),
* ``oracle``: some desk-scale contract failed and the exact oracle answered.

A "yes" always carries a verified perfect matching. A "no" only comes from
insolubility, which is sound because a perfect matching always yields a
``(V0, |Q|)``-solution, or from the exhaustive oracle.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .absorption import (
    absorb_leftover,
    build_absorbing_family,
    build_reservoir,
    regroup_with_reservoir,
)
from .core import ContractFailure, Partition, PartitionNotCertified, PipelineParams, SupplyExhausted
from .hypergraph import (
    Edge,
    Hypergraph,
    induced,
    is_perfect_matching,
    mask_of,
    max_matching,
    perfect_matching_oracle,
    to_text,
)
from .instances import cover_barrier, lattice_barrier, random_kgraph, space_barrier
from .lattice import (
    CosetGroup,
    Lattice,
    bounded_vectors,
    coefficient_bound,
    coset_group,
    index_vector,
    residue_sum,
    robust_lattice,
    merge_transferral_parts,
    solubility_search,
    zero_sum_reduction,
)
from .partition import build_partition_traced

YES, NO = "yes", "no"


@dataclass
class Certificate:
    """An insolubility witness that can be re-checked from ``H`` and ``mu``."""

    fingerprint: str
    n: int
    k: int
    mu: Fraction
    partition: Partition | None
    basis: list[tuple[int, ...]]
    generators: list[tuple[int, ...]]
    order: int | None
    moduli: tuple[int, ...]
    leftover_residue: tuple[int, ...] | None
    q: int
    bound: int
    examined: int
    reason: str = "insoluble"

    def to_json(self) -> dict[str, Any]:
        return {
            "reason": self.reason,
            "fingerprint": self.fingerprint,
            "n": self.n,
            "k": self.k,
            "mu": str(self.mu),
            "partition": self.partition.to_json() if self.partition else None,
            "lattice_basis": [list(b) for b in self.basis],
            "generators": [list(g) for g in self.generators],
            "coset_order": self.order,
            "moduli": list(self.moduli),
            "leftover_residue": list(self.leftover_residue) if self.leftover_residue is not None else None,
            "q": self.q,
            "search_bound": self.bound,
            "candidates_examined": self.examined,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "Certificate":
        return cls(
            fingerprint=d["fingerprint"],
            n=d["n"],
            k=d["k"],
            mu=Fraction(d["mu"]),
            partition=Partition.from_json(d["partition"]) if d.get("partition") else None,
            basis=[tuple(b) for b in d["lattice_basis"]],
            generators=[tuple(g) for g in d["generators"]],
            order=d["coset_order"],
            moduli=tuple(d["moduli"]),
            leftover_residue=tuple(d["leftover_residue"]) if d.get("leftover_residue") is not None else None,
            q=d["q"],
            bound=d["search_bound"],
            examined=d["candidates_examined"],
            reason=d.get("reason", "insoluble"),
        )


@dataclass
class Decision:
    verdict: str
    kind: str  # "structural" | "certificate" | "oracle"
    matching: list[Edge] | None = None
    certificate: Certificate | None = None
    stage: str = ""
    reason: str = ""
    trace: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def has_pm(self) -> bool:
        return self.verdict == YES

    def to_json(self, timings: bool = False) -> dict[str, Any]:
        out = {
            "verdict": self.verdict,
            "kind": self.kind,
            "stage": self.stage,
            "reason": self.reason,
            "matching": [list(e) for e in self.matching] if self.matching is not None else None,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "trace": self.trace,
        }
        if timings:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


class _Clock:
    def __init__(self) -> None:
        self.marks: dict[str, float] = {}
        self._t = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.marks[name] = self.marks.get(name, 0.0) + now - self._t
        self._t = now


def _check_ell(H: Hypergraph, ell: int) -> None:
    if not 1 <= ell <= H.k - 1:
        raise ValueError(f"ell must lie in [1, {H.k - 1}], got {ell}")


def _fallback(H: Hypergraph, stage: str, reason: str, trace: dict, clock: _Clock) -> Decision:
    pm = perfect_matching_oracle(H)
    clock.lap("oracle")
    return Decision(
        YES if pm is not None else NO, "oracle", pm, None, stage, reason, trace, clock.marks
    )


def lattice_stage(H: Hypergraph, P: Partition, mu: Fraction):
    rv, L = robust_lattice(H, P, mu)
    Q = coset_group(L, P.r, H.k)
    return rv, L, Q


def decide(H: Hypergraph, ell: int, params: PipelineParams | None = None) -> Decision:
    """Decide whether ``H`` has a perfect matching (see the module docstring)."""
    _check_ell(H, ell)
    params = (params or PipelineParams()).resolve(H.k, ell)
    clock = _Clock()
    trace: dict[str, Any] = {"params": params.to_json()}
    if H.n % H.k:
        cert = Certificate(
            H.fingerprint, H.n, H.k, params.mu, None, [], [], None, (), None, 0, 0, 0,
            reason=f"{H.k} does not divide {H.n}",
        )
        return Decision(NO, "certificate", None, cert, "divisibility", cert.reason, trace, clock.marks)

    try:
        P, ptrace = build_partition_traced(H, params)
    except PartitionNotCertified as exc:
        clock.lap("partition")
        return _fallback(H, "partition", str(exc), trace, clock)
    P = merge_transferral_parts(H, P, params.mu, params)
    clock.lap("partition")
    trace["partition"] = P.to_json()
    trace["partition_build"] = ptrace.to_json()

    rv, L, Q = lattice_stage(H, P, params.mu)
    clock.lap("lattice")
    trace["robust_vectors"] = rv.to_json()
    trace["lattice_basis"] = [list(b) for b in L.basis]
    trace["coset_group"] = Q.to_json()
    if not Q.is_finite:
        return _fallback(H, "coset-group", "coset group is infinite", trace, clock)

    q = max(params.q or 0, Q.order)
    sol = solubility_search(H, P, L, P.V0, q)
    clock.lap("solubility")
    trace["solubility"] = {
        "q": q,
        "bound": sol.bound,
        "examined": sol.examined,
        "soluble": sol.soluble,
        "solution": [list(e) for e in sol.matching] if sol.soluble else None,
    }

    if not sol.soluble:
        full = index_vector(P, [v for v in range(H.n) if v not in set(P.V0)])
        cert = Certificate(
            H.fingerprint, H.n, H.k, params.mu, P,
            [tuple(b) for b in L.basis], list(rv.all), Q.order, Q.moduli,
            Q.residue(full) if sum(full) % H.k == 0 else None,
            q, sol.bound, sol.examined,
        )
        if H.n <= params.oracle_cap:
            pm = perfect_matching_oracle(H)
            clock.lap("oracle-check")
            if pm is not None:
                raise AssertionError("insolubility certificate contradicts the oracle")
            trace["oracle_confirmed"] = True
        return Decision(NO, "certificate", None, cert, "solubility", "(V0, q)-insoluble", trace, clock.marks)

    try:
        M, build = construct_matching(H, P, L, Q, rv.all, sol.matching, q, params)
        trace["construction"] = build
    except (ContractFailure, SupplyExhausted, PartitionNotCertified) as exc:
        clock.lap("construction")
        stage = {ContractFailure: "construction", SupplyExhausted: "absorption"}.get(type(exc), "construction")
        return _fallback(H, stage, str(exc), trace, clock)
    clock.lap("construction")
    if not is_perfect_matching(H, M):
        raise AssertionError("constructed matching failed verification")
    return Decision(YES, "structural", M, None, "construction", "", trace, clock.marks)


# ----------------------------------------------------------------------------
# constructive route


def construct_matching(
    H: Hypergraph,
    P: Partition,
    L: Lattice,
    Q: CosetGroup,
    I: Sequence[tuple[int, ...]],
    M1: Sequence[Edge],
    q: int,
    params: PipelineParams,
) -> tuple[list[Edge], dict[str, Any]]:
    """Turn a ``(V0, q)``-solution into a perfect matching, or raise.

    Solution ``M1``; absorbing family avoiding ``V(M1)``; reservoir ``M2``
    of ``C'`` edges per robust vector; maximum matching ``M3`` of the rest
    with uncovered set ``U``; residue repair by pigeonhole over
    ``M3 + M0``; regrouping with reservoir edges; absorption.
    """
    k = H.k
    report: dict[str, Any] = {}
    M1 = sorted(M1)
    used = mask_of(v for e in M1 for v in e)

    family = build_absorbing_family(H, P, params)
    members = [A for A in family.sets if not mask_of(A) & used]
    report["family"] = family.to_json()
    report["family_usable"] = len(members)
    family.sets = members
    M0 = family.matching()
    used |= mask_of(family.vertices)

    m_cap = k * q + k
    if I and len(bounded_vectors(P.r, m_cap)) <= 5000:
        try:
            Cp = coefficient_bound(P.r, k, I, m_cap, cap=params.C)
        except ContractFailure:
            Cp = params.C
    else:
        Cp = params.C
    report["C_prime"] = Cp
    reservoir = build_reservoir(H, P, I, Cp, [v for v in range(H.n) if used >> v & 1])
    report["reservoir_shortfall"] = {",".join(map(str, v)): s for v, s in sorted(reservoir.shortfall.items())}
    M2 = reservoir.all_edges()
    used |= mask_of(v for e in M2 for v in e)

    # small-part vertices must be covered by robust edges before the max matching
    small = [v for p in P.small_parts for v in p if not used >> v & 1]
    robust = set(I)
    extra = []
    for v in small:
        if used >> v & 1:
            continue
        idx = next(
            (i for i in H.incidence[v] if not H.edge_masks[i] & used and index_vector(P, H.edges[i]) in robust),
            None,
        )
        if idx is None:
            raise ContractFailure(f"small-part vertex {v} has no free robust edge")
        extra.append(H.edges[idx])
        used |= H.edge_masks[idx]
    M2_cover = sorted(extra)

    rest = [v for v in range(H.n) if not used >> v & 1]
    sub, labels = induced(H, rest)
    M3 = sorted(tuple(labels[x] for x in e) for e in max_matching(sub))
    covered3 = mask_of(v for e in M3 for v in e)
    U = [v for v in rest if not covered3 >> v & 1]
    report["uncovered_after_M3"] = U
    base = M1 + M0 + M2 + M2_cover + M3
    if not U:
        report["repair"] = "none needed"
        return sorted(base), report

    if sum(index_vector(P, U)) != len(U) or len(U) % k:
        raise ContractFailure("uncovered set meets V0 or has the wrong size")
    # pigeonhole: drop zero-residue blocks from M3 + M0 until at most q - 1 edges
    pool = M3 + M0
    residues = [Q.residue(index_vector(P, e)) for e in pool]
    target = Q.neg(Q.residue(index_vector(P, U)))
    if residue_sum(Q, residues) != target:
        raise ContractFailure("residue bookkeeping does not balance")
    keep = zero_sum_reduction(Q, residues)
    chosen = [pool[i] for i in keep]
    report["repair_edges"] = [list(e) for e in chosen]
    Y = sorted(U + [v for e in chosen for v in e])
    reg = regroup_with_reservoir(P, Y, I, reservoir, params.C)
    report["regroup_b"] = {",".join(map(str, v)): c for v, c in sorted(reg.b.items())}
    report["regroup_c"] = {",".join(map(str, v)): c for v, c in sorted(reg.c.items())}
    drop = set(chosen) | set(reg.borrowed)
    damaged = [A for A in family.sets if any(e in drop for e in family.matchings[A])]
    current = [e for e in base if e not in drop]
    final, log = absorb_leftover(H, current, family, reg.sets, unusable=damaged)
    report["absorption"] = log
    return final, report


def verify_certificate(H: Hypergraph, cert: Certificate, params: PipelineParams | None = None) -> bool:
    """Recompute the robust lattice and rerun the exhaustive solubility search."""
    if cert.fingerprint != H.fingerprint or cert.n != H.n or cert.k != H.k:
        raise ValueError("certificate belongs to a different hypergraph")
    if params is not None and Fraction(params.mu) != cert.mu:
        raise ValueError("certificate mu does not match params")
    if cert.partition is None:
        return H.n % H.k != 0
    P = cert.partition
    if not P.covers(H.n):
        return False
    rv, L, Q = lattice_stage(H, P, cert.mu)
    if [tuple(b) for b in L.basis] != [tuple(b) for b in cert.basis]:
        return False
    if not Q.is_finite or cert.q < Q.order:
        return False
    return not solubility_search(H, P, L, P.V0, cert.q).soluble


def almost_perfect_matching(H: Hypergraph, ell: int) -> tuple[list[Edge], dict[str, Any]]:
    _check_ell(H, ell)
    M = max_matching(H)
    left = H.n - H.k * len(M)
    bound = 2 * H.k - ell - 1
    return M, {"covered": H.k * len(M), "uncovered": left, "bound": bound, "within_bound": left <= bound}


# ----------------------------------------------------------------------------
# cross-validation


FAMILIES = ("random", "space", "cover", "lattice", "complete", "mixed")


def _lattice_instance(n: int, rng: random.Random) -> Hypergraph:
    a = rng.randrange(1, n)
    sizes = (a, n - a)
    allowed = [v for v in ((3, 0), (2, 1), (1, 2), (0, 3)) if rng.random() < 0.6] or [(3, 0)]
    return lattice_barrier(sizes, 3, allowed)


def generate_instance(family: str, rng: random.Random) -> tuple[str, Hypergraph]:
    """One k=3 instance on n in {6, 9, 12} from the named family."""
    if family == "mixed":
        family = rng.choice(("random", "random", "space", "cover", "lattice", "complete"))
    n = rng.choice((6, 9, 12))
    if family == "random":
        p = rng.choice(("1/5", "1/2", "9/10"))
        return f"random(n={n},p={p})", random_kgraph(n, 3, p, rng.getrandbits(32))
    if family == "space":
        n = rng.choice((6, 7, 8, 9, 10, 11, 12))
        return f"space({n})", space_barrier(n, 3)
    if family == "cover":
        return f"cover({n})", cover_barrier(n, 3)
    if family == "lattice":
        H = _lattice_instance(n, rng)
        return f"lattice(n={n})", H
    if family == "complete":
        return f"complete({n})", Hypergraph.complete(n, 3)
    raise ValueError(f"unknown family {family!r}")


@dataclass
class CrossValidation:
    rows: list[dict[str, Any]]
    disagreements: int

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for row in self.rows:
            out[row["kind"]] = out.get(row["kind"], 0) + 1
        return out

    def to_csv(self, timings: bool = False) -> str:
        cols = ["index", "instance", "n", "k", "edges", "fingerprint", "verdict", "oracle", "kind", "stage", "agree"]
        if timings:
            cols.append("seconds")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow(row)
        return buf.getvalue()


class Disagreement(AssertionError):
    pass


def cross_validate(
    ell: int,
    family: str,
    count: int,
    seed: int,
    params: PipelineParams | None = None,
    bundle_dir: str | None = None,
    progress: Callable[[int, dict], None] | None = None,
) -> CrossValidation:
    """Run ``decide`` and the oracle on ``count`` generated instances.

    Any disagreement writes a reproduction bundle (instance text, params,
    decision) to ``bundle_dir`` when given, then raises :class:`Disagreement`.
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    params = params or PipelineParams()
    rng = random.Random(seed)
    rows = []
    for idx in range(count):
        name, H = generate_instance(family, rng)
        t0 = time.perf_counter()
        dec = decide(H, ell, params)
        secs = time.perf_counter() - t0
        oracle = perfect_matching_oracle(H) is not None
        agree = dec.has_pm == oracle
        row = {
            "index": idx,
            "instance": name,
            "n": H.n,
            "k": H.k,
            "edges": len(H.edges),
            "fingerprint": H.fingerprint[:16],
            "verdict": dec.verdict,
            "oracle": YES if oracle else NO,
            "kind": dec.kind,
            "stage": dec.stage,
            "agree": agree,
            "seconds": f"{secs:.4f}",
        }
        rows.append(row)
        if progress:
            progress(idx, row)
        if not agree:
            if bundle_dir:
                os.makedirs(bundle_dir, exist_ok=True)
                path = os.path.join(bundle_dir, f"disagreement_{seed}_{idx}.json")
                with open(path, "w") as fh:
                    json.dump(
                        {
                            "instance": name,
                            "hypergraph": to_text(H),
                            "ell": ell,
                            "params": params.to_json(),
                            "decision": dec.to_json(),
                            "oracle": oracle,
                        },
                        fh,
                        indent=2,
                        sort_keys=True,
                    )
            raise Disagreement(f"decide and oracle disagree on {name} (index {idx})")
    return CrossValidation(rows, 0)


def with_params(params: PipelineParams, **changes: Any) -> PipelineParams:
    return dataclasses.replace(params, **{k: v for k, v in changes.items() if v is not None})
