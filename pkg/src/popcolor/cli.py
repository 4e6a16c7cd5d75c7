"""Command line entry point: ``popcolor {solve,relax,export,bench,verify}``.

Exit codes: 0 on success, 1 for bad input (unreadable or malformed files,
invalid options), 2 when an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import InvariantViolation, bench, density_summary, format_summary, records_to_csv, run_graph, solve_graph
from .bnb import BnbConfig
from .graph import DimacsError, Graph, connected_components, read_dimacs
from .lp import fmt_rational, relax, solve_lp
from .models import ModelKind, apply_precoloring, build_model, nonzero_count
from .mps import MpsError, write_mps
from .preprocess import PrecolorPlan, dsatur_upper_bound, preprocess_pipeline
from .verify import SUITE, default_q, run_suite

log = logging.getLogger("popcolor")

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2


class InputError(Exception):
    pass


def _kinds(values: list[str] | None, default: list[str]) -> list[ModelKind]:
    names = []
    for v in values or default:
        names.extend(s for s in v.split(",") if s)
    try:
        return [ModelKind(s.upper()) for s in names]
    except ValueError as exc:
        raise InputError(f"unknown model kind; choose from {', '.join(k.value for k in ModelKind)}") from exc


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cfg(args) -> BnbConfig:
    try:
        return BnbConfig(time_limit=args.time_limit, node_limit=args.node_limit, search=args.search)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _prepared_model(g: Graph, kind: ModelKind, preprocess: bool, colors: int | None):
    """The model ``relax``/``export`` operate on, plus a description of how it was built."""
    if preprocess:
        rep = preprocess_pipeline(g)
        H = colors or rep.H
        if H < rep.plan.clique_lb:
            raise InputError(f"--colors {H} is below the clique bound {rep.plan.clique_lb}")
        plan = PrecolorPlan(rep.plan.clique, rep.plan.q, rep.plan.fixed, H)
        m = build_model(rep.trace.residual, kind, H, plan.q)
        m = apply_precoloring(m, plan)
        info = {
            "H": H,
            "q": rep.trace.residual_map[plan.q],
            "residual_vertices": rep.trace.residual.n,
            "removed": len(rep.trace.removals),
        }
        return m, info
    H = colors or dsatur_upper_bound(g)[0]
    q = default_q(g) if kind.needs_q else None
    m = build_model(g, kind, H, q)
    return m, {"H": H, "q": q, "residual_vertices": g.n, "removed": 0}


def cmd_solve(args) -> int:
    g = read_dimacs(args.instance)
    kind = _kinds([args.model] if args.model else None, ["POPH2"])
    if len(kind) != 1:
        raise InputError("solve takes exactly one --model")
    cfg = _cfg(args)
    if args.colors is not None:
        lb, ub, status, coloring, lb_exact = solve_graph(g, kind[0], cfg, not args.no_preprocess, args.colors)
        payload = {"instance": g.name, "model": kind[0].value, "lb": lb, "ub": ub, "status": status.value,
                   "lb_exact": fmt_rational(lb_exact)}
        rows = None
    else:
        res = run_graph(g, kind, cfg, not args.no_preprocess)[0]
        rec, coloring = res.record, res.coloring
        payload = rec.as_row() | {"time_s": round(rec.time_s, 3)}
        rows = [rec]
    if args.format == "csv":
        if rows is None:
            raise InputError("--format csv is not available together with --colors")
        _emit(records_to_csv(rows), args.out)
    else:
        payload["coloring"] = None if coloring is None else {str(v): c for v, c in sorted(coloring.items())}
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_relax(args) -> int:
    g = read_dimacs(args.instance)
    kind = _kinds([args.model] if args.model else None, ["POP2"])[0]
    best = None
    parts = []
    for comp, cmap in connected_components(g):
        m, info = _prepared_model(comp, kind, not args.no_preprocess, args.colors)
        sol = solve_lp(relax(m))
        if not sol.optimal:
            raise InvariantViolation(f"relaxation is {sol.status.value}")
        if info["q"] is not None:
            info["q"] = cmap[info["q"]]
        parts.append({"vertices": comp.n, "nu": fmt_rational(sol.value), "nonzeros": nonzero_count(m), **info})
        best = sol.value if best is None else max(best, sol.value)
    if args.format == "json":
        _emit(json.dumps({"instance": g.name, "model": kind.value, "nu": fmt_rational(best), "components": parts},
                         indent=2) + "\n", args.out)
    else:
        _emit(f"{fmt_rational(best)}\n", args.out)
    return EXIT_OK


def cmd_export(args) -> int:
    g = read_dimacs(args.instance)
    kind = _kinds([args.model] if args.model else None, ["POPH2"])[0]
    m, _ = _prepared_model(g, kind, not args.no_preprocess, args.colors)
    _emit(write_mps(m, free=args.free_mps), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    kinds = _kinds(args.model, [k.value for k in ModelKind])
    try:
        records = bench(args.directory, kinds, _cfg(args), not args.no_preprocess, args.workers)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc
    if args.format == "json":
        _emit(json.dumps([r.as_row() for r in records], indent=2) + "\n", args.out)
    else:
        _emit(records_to_csv(records), args.out)
    print(format_summary(density_summary(records)), file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.only or None)
    if args.format == "json":
        _emit(json.dumps([{"check": c.name, "passed": c.passed, "detail": c.detail} for c in checks], indent=2) + "\n",
              args.out)
    else:
        _emit("".join(c.line() + "\n" for c in checks), args.out)
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed", file=sys.stderr)
    return EXIT_INVARIANT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="popcolor", description="Exact ILP graph coloring with assignment and partial-ordering models.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, *, solver=False, model_many=False, fmt=("json", "csv"), default_fmt="json"):
        if model_many:
            sp.add_argument("--model", action="append", help="model kind(s), repeatable or comma separated (default: all)")
        else:
            sp.add_argument("--model", help="model kind (ASS, ASSQ, POP, POP1, POP2, POPH, POPH1, POPH2)")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=fmt, default=default_fmt)
        sp.add_argument("--no-preprocess", action="store_true", help="skip dominance removal, bounds and precoloring")
        if solver:
            sp.add_argument("--time-limit", type=float, default=60.0, help="seconds per instance and model")
            sp.add_argument("--node-limit", type=int, default=None)
            sp.add_argument("--search", choices=("depth-first", "best-bound"), default="depth-first")

    sp = sub.add_parser("solve", help="solve one DIMACS instance with one model")
    sp.add_argument("instance")
    common(sp, solver=True)
    sp.add_argument("--colors", type=int, help="number of colors H (default: DSATUR bound)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("relax", help="print the exact LP bound as p/q")
    sp.add_argument("instance")
    common(sp, fmt=("text", "json"), default_fmt="text")
    sp.add_argument("--colors", type=int, help="number of colors H (default: DSATUR bound)")
    sp.set_defaults(func=cmd_relax)

    sp = sub.add_parser("export", help="write the model as MPS")
    sp.add_argument("instance")
    common(sp, fmt=("mps",), default_fmt="mps")
    sp.add_argument("--colors", type=int, help="number of colors H (default: DSATUR bound)")
    sp.add_argument("--free-mps", action="store_true", help="free-format MPS (no 8-character name limit)")
    sp.set_defaults(func=cmd_export)

    sp = sub.add_parser("bench", help="sweep a directory of .col files")
    sp.add_argument("directory")
    common(sp, solver=True, model_many=True, default_fmt="csv")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("verify", help="run the exact relaxation checks and report pass/fail")
    sp.add_argument("--only", action="append", choices=sorted(SUITE), help="run only these groups")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("text", "json"), default="text")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, DimacsError, MpsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantViolation, AssertionError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
