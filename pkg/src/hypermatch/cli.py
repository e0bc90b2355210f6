"""Command-line entry point: ``hypermatch <command> ...``.

Exit codes: 0 = yes (a perfect matching was produced) or success,
1 = no (certificate or oracle says none), 2 = error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .core import PartitionNotCertified, PipelineParams
from .fractional import has_perfect_fractional_matching, max_fractional_matching, min_fractional_cover, witness_json
from .hypergraph import Hypergraph, perfect_matching_oracle, read_hypergraph, to_text
from .instances import cover_barrier, lattice_barrier, random_kgraph, space_barrier
from .lattice import index_vector, transferral_matrix, merge_transferral_parts
from .partition import build_partition_traced, validate_partition
from .pipeline import FAMILIES, Disagreement, cross_validate, decide, lattice_stage

EXIT_YES, EXIT_NO, EXIT_ERROR = 0, 1, 2


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str)


def _vec_list(text: str) -> list[tuple[int, ...]]:
    return [tuple(int(x) for x in part.split(",")) for part in text.split(";") if part.strip()]


def _add_params(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("thresholds")
    g.add_argument("--ell", type=int, required=True, help="degree order ell in [1, k-1]")
    g.add_argument("--delta", type=Fraction, help="degree threshold (default: conjectured value)")
    g.add_argument("--mu", type=Fraction)
    g.add_argument("--beta", type=Fraction)
    g.add_argument("--alpha", type=Fraction)
    g.add_argument("--delta-prime", dest="delta_prime", type=Fraction)
    g.add_argument("--t", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--C", dest="C", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--oracle-cap", dest="oracle_cap", type=int)


def _params(args: argparse.Namespace, k: int) -> PipelineParams:
    keys = ("delta", "mu", "beta", "alpha", "delta_prime", "t", "q", "C", "b", "oracle_cap")
    kw = {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}
    return PipelineParams(**kw).resolve(k, args.ell)


def cmd_decide(args) -> int:
    H = read_hypergraph(args.input)
    dec = decide(H, args.ell, _params(args, H.k))
    if args.json:
        print(_dump(dec.to_json(timings=args.timings)))
    else:
        print(f"{dec.verdict} ({dec.kind}, stage {dec.stage or '-'})")
        if dec.matching is not None:
            for e in dec.matching:
                print(" ".join(map(str, e)))
        elif dec.reason:
            print(dec.reason)
        if args.timings:
            for name, secs in dec.timings.items():
                print(f"{name}: {secs:.4f}s")
    return EXIT_YES if dec.has_pm else EXIT_NO


def cmd_oracle(args) -> int:
    H = read_hypergraph(args.input)
    pm = perfect_matching_oracle(H)
    print(_dump({"verdict": "yes" if pm is not None else "no", "matching": pm}))
    return EXIT_YES if pm is not None else EXIT_NO


def cmd_gen(args) -> int:
    if args.kind == "space":
        H = space_barrier(args.n, args.k)
    elif args.kind == "cover":
        H = cover_barrier(args.n, args.k)
    elif args.kind == "random":
        H = random_kgraph(args.n, args.k, args.p, args.seed)
    else:
        sizes = [int(x) for x in args.sizes.split(",")]
        H = lattice_barrier(sizes, args.k, _vec_list(args.allowed))
    text = to_text(H)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_fractional(args) -> int:
    H = read_hypergraph(args.input)
    value, fm = max_fractional_matching(H)
    out = {
        "value": str(value),
        "target": str(Fraction(H.n, H.k)),
        "perfect": value == Fraction(H.n, H.k),
        "weights": witness_json(fm),
    }
    if args.dual:
        cover, y = min_fractional_cover(H)
        out["dual_value"] = str(cover)
        out["dual_weights"] = [str(x) for x in y]
    print(_dump(out))
    return 0


def _partition(H: Hypergraph, args):
    params = _params(args, H.k)
    P, trace = build_partition_traced(H, params)
    if args.merge:
        P = merge_transferral_parts(H, P, params.mu, params)
    return params, P, trace


def cmd_partition(args) -> int:
    H = read_hypergraph(args.input)
    try:
        params, P, trace = _partition(H, args)
    except PartitionNotCertified as exc:
        print(_dump({"certified": False, "reason": str(exc)}))
        return EXIT_ERROR
    report = validate_partition(H, P, params)
    print(_dump({"certified": True, "partition": P.to_json(), "build": trace.to_json(), "validation": report.to_json()}))
    return 0


def cmd_lattice_info(args) -> int:
    H = read_hypergraph(args.input)
    try:
        params, P, _ = _partition(H, args)
    except PartitionNotCertified as exc:
        print(_dump({"certified": False, "reason": str(exc)}))
        return EXIT_ERROR
    rv, L, Q = lattice_stage(H, P, params.mu)
    rest = [v for v in range(H.n) if v not in set(P.V0)]
    full = index_vector(P, rest)
    out = {
        "partition": P.to_json(),
        "robust_vectors": rv.to_json(),
        "hnf_basis": [list(b) for b in L.basis],
        "coset_group": Q.to_json(),
        "leftover_vector": list(full),
        "leftover_residue": list(Q.residue(full)) if sum(full) % H.k == 0 else None,
        "transferrals": transferral_matrix(L) if P.r else [],
    }
    print(_dump(out))
    return 0


def cmd_cross_validate(args) -> int:
    params = PipelineParams()
    try:
        cv = cross_validate(args.ell, args.family, args.count, args.seed, params, args.bundle_dir)
    except Disagreement as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    text = cv.to_csv(timings=args.timings)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(_dump({"instances": len(cv.rows), "disagreements": cv.disagreements, "kinds": cv.counts}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypermatch", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide perfect matching existence")
    p.add_argument("--input", required=True, help="instance file, or - for stdin")
    _add_params(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--timings", action="store_true", help="report per-stage wall time (not reproducible)")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("oracle", help="exhaustive perfect matching search")
    p.add_argument("--input", required=True, help="instance file, or - for stdin")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write an instance in text format")
    gsub = p.add_subparsers(dest="kind", required=True)
    for kind in ("space", "cover"):
        g = gsub.add_parser(kind)
        g.add_argument("n", type=int)
        g.add_argument("k", type=int)
        g.add_argument("--out")
    g = gsub.add_parser("random")
    g.add_argument("n", type=int)
    g.add_argument("k", type=int)
    g.add_argument("p", type=Fraction)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g = gsub.add_parser("lattice")
    g.add_argument("--sizes", required=True, help="comma-separated part sizes, e.g. 6,6")
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--allowed", required=True, help="semicolon-separated k-vectors, e.g. '3,0;0,3'")
    g.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("fractional", help="exact fractional matching number")
    p.add_argument("--input", required=True, help="instance file, or - for stdin")
    p.add_argument("--dual", action="store_true", help="also solve the fractional cover LP")
    p.set_defaults(func=cmd_fractional)

    for name, func in (("partition", cmd_partition), ("lattice-info", cmd_lattice_info)):
        p = sub.add_parser(name)
        p.add_argument("--input", required=True, help="instance file, or - for stdin")
        _add_params(p)
        p.add_argument("--no-merge", dest="merge", action="store_false", help="skip transferral merging")
        p.set_defaults(func=func)

    p = sub.add_parser("cross-validate", help="compare decide with the oracle on generated instances")
    p.add_argument("--family", choices=FAMILIES, default="mixed")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--out")
    p.add_argument("--bundle-dir", dest="bundle_dir")
    p.add_argument("--timings", action="store_true")
    p.set_defaults(func=cmd_cross_validate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
