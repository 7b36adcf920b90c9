"""esconvex command line: gen, analyze, verify, pipeline, table, plot."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import constructions as cons
from .cupcap import cupcap_threshold, largest_cap, largest_cup, por_valtr_support
from .errors import EsConvexError, GuardExceeded, InputTooSmall
from .exact import to_str
from .fileio import FileFormatError, dump_pointset, dump_trace, load_pointset, load_trace, pointset_to_dict
from .geometry import PointSet, convex_hull, generic_direction, is_convex_position, is_general_position, project

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3
GP_REPORT_LIMIT = {2: 3000, 3: 400}


class UsageError(Exception):
    pass


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("ESCONVEX_THREADS", "1")))
    except ValueError:
        return 1


def _emit(args, payload: dict, rows):
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=1, sort_keys=True))
        return
    for key, value in rows:
        print(f"{key:<22} {value}")


def _load(path) -> PointSet:
    ps, _ = load_pointset(path)
    return ps


def _gp_status(ps: PointSet) -> str:
    if len(ps) > GP_REPORT_LIMIT.get(ps.dim, 0):
        return "unchecked (too large)"
    ok, wit = is_general_position(ps)
    return "yes" if ok else f"no, witness {list(wit)}"


# --------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    meta = {"generator": args.kind, "seed": args.seed}
    if args.kind == "kv":
        if args.dim not in (2, 3) or args.stage < 0:
            raise UsageError("kv needs --dim 2|3 and --stage >= 0")
        ps = cons.karolyi_valtr(args.dim, args.stage, seed=args.seed, check_recurrence=False).points
        meta.update(dim=args.dim, stage=args.stage)
    elif args.kind == "es2":
        if args.n is None:
            raise UsageError("es2 needs --n")
        ps = cons.es2_lower_construction(args.n)
        meta.update(n=args.n)
    elif args.kind == "random":
        if args.n is None or args.n < 1:
            raise UsageError("random needs --n >= 1")
        ps = cons.random_pointset(args.dim, args.n, args.dist, seed=args.seed)
        meta.update(dim=args.dim, n=args.n, distribution=args.dist)
    elif args.kind == "extremal-cupcap":
        if args.a is None or args.b is None:
            raise UsageError("extremal-cupcap needs --a and --b")
        from .cupcap import extremal_cupcap_set

        ps = extremal_cupcap_set(args.a, args.b)
        meta.update(a=args.a, b=args.b)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown kind {args.kind}")
    if args.out:
        dump_pointset(ps, args.out, meta)
    else:
        print(json.dumps(pointset_to_dict(ps, meta), indent=1))
    print(f"points {len(ps)} dim {ps.dim} general-position {_gp_status(ps)}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


# --------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    ps = _load(args.file)
    payload, rows = {"n": len(ps), "dim": ps.dim}, [("points", len(ps))]
    if args.mc:
        if ps.dim == 3:
            size, wit = cons.mc_3d(ps, guard=args.guard)
        else:
            size, wit = cons.mc_any(ps)
        payload["mc"] = {"size": size, "witness": list(wit)}
        rows += [("mc", size), ("mc witness", list(wit))]
    if args.cups_caps:
        if ps.dim != 2:
            raise UsageError("--cups-caps needs a planar file")
        cup, cw = largest_cup(ps)
        cap, kw = largest_cap(ps)
        payload["cup"] = {"size": cup, "witness": list(cw.indices)}
        payload["cap"] = {"size": cap, "witness": list(kw.indices)}
        rows += [("largest cup", cup), ("largest cap", cap)]
    if args.support is not None:
        if ps.dim != 2:
            raise UsageError("--support needs a planar file")
        sup = por_valtr_support(ps, args.support, seed=args.seed)
        payload["support"] = {"kind": sup.kind, "polygon": list(sup.polygon), "counts": sup.counts}
        rows += [("support polygon", f"{sup.kind} {list(sup.polygon)}"), ("region counts", sup.counts)]
    if len(payload) == 2:
        raise UsageError("choose at least one of --mc, --cups-caps, --support")
    _emit(args, payload, rows)
    return EXIT_OK


# --------------------------------------------------------------------------
# verify


def _groups_from(files):
    if len(files) > 1:
        return [list(_load(f).points) for f in files]
    ps = _load(files[0])
    if ps.labels is None:
        raise UsageError("two-separated needs several files or one labeled file")
    groups = {}
    for p, lab in zip(ps.points, ps.labels):
        groups.setdefault(lab, []).append(p)
    return [groups[k] for k in sorted(groups, key=str)]


def cmd_verify(args) -> int:
    prop = args.property
    if prop == "trace":
        from .pipeline import replay

        trace, ps = load_trace(args.files[0])
        ok, problems = replay(trace, ps)
        if ok:
            print(f"OK trace replayed ({len(trace.result)} points, {trace.result_kind})")
            return EXIT_OK
        print("FAIL " + "; ".join(problems))
        return EXIT_VIOLATED
    if prop == "two-separated":
        from .separation import is_two_separated

        ok, wit = is_two_separated(_groups_from(args.files))
        if ok:
            print("OK")
            return EXIT_OK
        print(f"FAIL pairing {wit}")
        return EXIT_VIOLATED
    ps = _load(args.files[0])
    if prop == "general-position":
        ok, wit = is_general_position(ps)
        if ok:
            print("OK")
            return EXIT_OK
        print(f"FAIL witness {list(wit)}")
        return EXIT_VIOLATED
    ok, idx = is_convex_position(ps)
    if ok:
        print("OK")
        return EXIT_OK
    print(f"FAIL witness {idx} at ({', '.join(to_str(c) for c in ps[idx])})")
    return EXIT_VIOLATED


# --------------------------------------------------------------------------
# pipeline


def cmd_pipeline(args) -> int:
    from .pipeline import PipelineParams, StageFailure, find_convex_subset_3d

    ps = _load(args.file)
    params = PipelineParams(args.k0, args.k, args.t, args.a, args.b, args.mode)
    try:
        params.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        K, trace = find_convex_subset_3d(ps, params, threads=args.threads)
    except StageFailure as exc:
        print(f"FAIL stage {exc.stage}: {exc.cause}")
        return exc.exit_code
    except InputTooSmall as exc:
        raise UsageError(str(exc)) from exc
    print(f"|K| = {len(K)} ({trace.result_kind})")
    if trace.failed_stage:
        print(f"failed stage: {trace.failed_stage}")
    if args.out:
        dump_pointset(ps.subset(K), args.out, {"generator": "pipeline", "indices": list(K)})
    if args.trace:
        dump_trace(trace, ps, args.trace)
    return EXIT_OK


# --------------------------------------------------------------------------
# table


def _table(args, header, rows):
    if args.format == "csv":
        print(",".join(str(h) for h in header))
        for r in rows:
            print(",".join(str(c) for c in r))
        return
    print("| " + " | ".join(str(h) for h in header) + " |")
    print("|" + "---|" * len(header))
    for r in rows:
        print("| " + " | ".join(str(c) for c in r) + " |")


def _named_polytope(name):
    from gmpy2 import mpq

    if name == "tetrahedron":
        pts = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    elif name == "octahedron":
        pts = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    else:
        return convex_hull(_load(name))
    return convex_hull([tuple(mpq(c) for c in p) for p in pts])


def cmd_table(args) -> int:
    if args.kind == "cupcap-thresholds":
        lo, hi = args.min, args.max
        if lo < 2 or hi < lo:
            raise UsageError("need 2 <= --min <= --max")
        header = ["a\\b"] + list(range(lo, hi + 1))
        rows = [[a] + [cupcap_threshold(a, b) for b in range(lo, hi + 1)] for a in range(lo, hi + 1)]
        _table(args, header, rows)
        return EXIT_OK
    from .positive_fraction import connected_subgraph_bound, count_connected_subgraphs, count_realizable_facet_sets

    P = _named_polytope(args.polytope)
    G = P.facet_graph()
    header = ["t", "realizable", "bound (3t choose t) f2", "all connected", "connected subgraphs", "subgraph bound"]
    rows = []
    for t in range(1, args.tmax + 1):
        fc = count_realizable_facet_sets(P, t)
        if max(len(nb) for nb in G.values()) <= 3:
            cs = count_connected_subgraphs(G, t)
            sb = to_str(connected_subgraph_bound(t, len(G)))
        else:
            cs, sb = "-", "-"
        rows.append([t, fc.count, fc.bound, "yes" if fc.all_connected else "no", cs, sb])
    _table(args, header, rows)
    return EXIT_OK


# --------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    from .cupcap import support_regions
    from .plotting import render_svg

    ps = _load(args.file)
    pts = list(ps.points)
    if ps.dim == 3:
        if not args.project:
            raise UsageError("3D files need --project")
        img, _ = project(pts, generic_direction(pts))
        pts = list(img.points)
    regions, chains = [], []
    if args.support is not None:
        sup = por_valtr_support(pts, args.support, seed=args.seed)
        regions = support_regions(pts, sup.polygon)
        chains.append(list(sup.polygon))
    if args.cups_caps:
        chains.append(list(largest_cup(pts)[1].indices))
        chains.append(list(largest_cap(pts)[1].indices))
    svg = render_svg(pts, regions=regions, chains=chains, title=os.path.basename(args.file))
    with open(args.out, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.out} ({len(pts)} points, {len(regions)} regions)")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="esconvex", description="Exact convex-position tools for planar and spatial point sets.")
    p.add_argument("--threads", type=int, default=default_threads(), help="worker processes (default: $ESCONVEX_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a point set")
    g.add_argument("kind", choices=["kv", "es2", "random", "extremal-cupcap"])
    g.add_argument("--dim", type=int, default=3)
    g.add_argument("--stage", type=int, default=3)
    g.add_argument("--n", type=int)
    g.add_argument("--a", type=int)
    g.add_argument("--b", type=int)
    g.add_argument("--dist", choices=list(cons.DISTRIBUTIONS), default="cube")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", help="exact statistics of a point set")
    a.add_argument("file")
    a.add_argument("--mc", action="store_true")
    a.add_argument("--cups-caps", action="store_true")
    a.add_argument("--support", type=int)
    a.add_argument("--guard", type=int, default=cons.MC3_GUARD)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="check a property, printing a witness on failure")
    v.add_argument("property", choices=["general-position", "convex-position", "two-separated", "trace"])
    v.add_argument("files", nargs="+")
    v.set_defaults(func=cmd_verify)

    q = sub.add_parser("pipeline", help="find a large convex subset of a 3D set")
    q.add_argument("file")
    q.add_argument("--k0", type=int, default=5)
    q.add_argument("--k", type=int, default=4)
    q.add_argument("--t", type=int, default=3)
    q.add_argument("--a", type=int, default=4)
    q.add_argument("--b", type=int, default=4)
    q.add_argument("--mode", choices=["strict", "best-effort"], default="best-effort")
    q.add_argument("--trace")
    q.add_argument("--out")
    q.set_defaults(func=cmd_pipeline)

    t = sub.add_parser("table", help="exact counts against their bounds")
    t.add_argument("kind", choices=["cupcap-thresholds", "lemma-bounds"])
    t.add_argument("--min", type=int, default=2)
    t.add_argument("--max", type=int, default=6)
    t.add_argument("--polytope", default="tetrahedron")
    t.add_argument("--tmax", type=int, default=3)
    t.add_argument("--format", choices=["markdown", "csv"], default="markdown")
    t.set_defaults(func=cmd_table)

    s = sub.add_parser("plot", help="SVG picture of a planar (or projected) set")
    s.add_argument("file")
    s.add_argument("--out", required=True)
    s.add_argument("--project", action="store_true")
    s.add_argument("--support", type=int)
    s.add_argument("--cups-caps", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except GuardExceeded as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EsConvexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
