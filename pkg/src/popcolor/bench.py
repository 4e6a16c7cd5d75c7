"""End-to-end instance runs and the directory benchmark sweep."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .bnb import BnbConfig, MipStatus, solve_mip
from .graph import Graph, connected_components, density, read_dimacs
from .models import ModelKind, apply_precoloring, build_model
from .preprocess import Coloring, dsatur_upper_bound, lift_coloring, preprocess_pipeline

log = logging.getLogger(__name__)

CSV_FIELDS = ["instance", "V", "E", "model", "lb", "ub", "status", "time_s", "density_class", "lb_exact"]


class InvariantViolation(AssertionError):
    """An internal consistency check failed (exit code 2 in the CLI)."""


def validate_coloring(g: Graph, c: Coloring) -> list[tuple[int, int]]:
    missing = [v for v in g.vertices if v not in c]
    if missing:
        raise ValueError(f"coloring misses vertices {missing}")
    return [(u, v) for u, v in g.sorted_edges() if c[u] == c[v]]


def density_class(g: Graph) -> int:
    if g.n < 2:
        return 1
    return min(10, max(1, math.ceil(10 * density(g))))


@dataclass
class BenchRecord:
    instance: str
    V: int
    E: int
    model: str
    lb: int
    ub: int | None
    status: str
    time_s: float
    density_class: int
    lb_exact: str = ""

    @property
    def solved(self) -> bool:
        return self.status == MipStatus.OPTIMAL.value

    def as_row(self) -> dict:
        d = asdict(self)
        d["ub"] = "" if self.ub is None else self.ub
        d["time_s"] = f"{self.time_s:.3f}"
        return d

    @classmethod
    def from_row(cls, row: dict) -> "BenchRecord":
        return cls(
            instance=row["instance"],
            V=int(row["V"]),
            E=int(row["E"]),
            model=row["model"],
            lb=int(row["lb"]),
            ub=None if row["ub"] == "" else int(row["ub"]),
            status=row["status"],
            time_s=float(row["time_s"]),
            density_class=int(row["density_class"]),
            lb_exact=row.get("lb_exact", ""),
        )


@dataclass
class InstanceResult:
    record: BenchRecord
    coloring: Coloring | None


def solve_graph(
    g: Graph,
    kind: ModelKind | str,
    cfg: BnbConfig,
    preprocess: bool = True,
    colors: int | None = None,
) -> tuple[int, int | None, MipStatus, Coloring | None, Fraction]:
    """Color ``g`` component by component; returns (lb, ub, status, coloring, exact lb)."""
    kind = ModelKind(kind)
    t0 = time.perf_counter()
    lb, ub = 0, 0
    lb_exact = Fraction(0)
    status = MipStatus.OPTIMAL
    full: Coloring = {}
    for comp, cmap in connected_components(g):
        remaining = cfg.time_limit - (time.perf_counter() - t0)
        if remaining <= 0:
            remaining = 1e-3
        ccfg = BnbConfig(remaining, cfg.node_limit, cfg.search, cfg.propagate, cfg.pivot_rule)
        c_lb, c_ub, c_status, c_col, c_exact = _solve_component(comp, kind, ccfg, preprocess, colors)
        lb, lb_exact = max(lb, c_lb), max(lb_exact, c_exact)
        if ub is not None:
            ub = None if c_ub is None else max(ub, c_ub)
        if c_status is not MipStatus.OPTIMAL:
            status = c_status if status is MipStatus.OPTIMAL else status
        if c_col is not None:
            full.update({cmap[v]: c for v, c in c_col.items()})
    coloring = full if len(full) == g.n else None
    if coloring is not None:
        bad = validate_coloring(g, coloring)
        if bad:
            raise InvariantViolation(f"final coloring is improper on {bad}")
        if ub is not None and max(coloring.values(), default=0) > ub:
            raise InvariantViolation("coloring uses more colors than the reported upper bound")
    if status is MipStatus.OPTIMAL and lb != ub:
        raise InvariantViolation(f"optimal status with lb={lb} != ub={ub}")
    return lb, ub, status, coloring, lb_exact


def _solve_component(comp: Graph, kind: ModelKind, cfg: BnbConfig, preprocess: bool, colors: int | None):
    if comp.m == 0:
        # a connected component without edges is a single vertex; ASS would score it 0
        return 1, 1, MipStatus.OPTIMAL, {v: 1 for v in comp.vertices}, Fraction(1)
    if preprocess:
        rep = preprocess_pipeline(comp)
        if rep.early_exit:
            return rep.H, rep.H, MipStatus.OPTIMAL, rep.coloring, Fraction(rep.H)
        res = rep.trace.residual
        H = colors or rep.H
        plan = rep.plan if H == rep.plan.H else type(rep.plan)(rep.plan.clique, rep.plan.q, rep.plan.fixed, H)
        m = build_model(res, kind, H, plan.q, lower_bound=plan.clique_lb)
        m = apply_precoloring(m, plan)
        witness = rep.witness_residual if max(rep.witness_residual.values()) <= H else None
        r = solve_mip(m, cfg, incumbent=witness)
        col = None
        if r.incumbent is not None:
            col = lift_coloring(rep.trace, rep.trace.to_original(r.incumbent))
        lb = max(r.lb_int, plan.clique_lb)
        return lb, r.ub, r.status, col, max(r.lb, Fraction(plan.clique_lb))
    H0, witness = dsatur_upper_bound(comp)
    H = colors or H0
    q = min(comp.vertices, key=lambda v: (-comp.degree(v), v))
    m = build_model(comp, kind, H, q)
    r = solve_mip(m, cfg, incumbent=witness if H0 <= H else None)
    return r.lb_int, r.ub, r.status, r.incumbent, r.lb


def run_instance(
    path,
    kinds: Sequence[ModelKind | str],
    cfg: BnbConfig | None = None,
    preprocess: bool = True,
) -> list[BenchRecord]:
    cfg = cfg or BnbConfig()
    g = read_dimacs(path)
    return [r.record for r in run_graph(g, kinds, cfg, preprocess)]


def run_graph(g: Graph, kinds: Sequence[ModelKind | str], cfg: BnbConfig, preprocess: bool = True) -> list[InstanceResult]:
    out = []
    for kind in kinds:
        kind = ModelKind(kind)
        t0 = time.perf_counter()
        lb, ub, status, coloring, lb_exact = solve_graph(g, kind, cfg, preprocess)
        elapsed = time.perf_counter() - t0
        rec = BenchRecord(
            instance=g.name or "graph",
            V=g.n,
            E=g.m,
            model=kind.value,
            lb=lb,
            ub=ub,
            status=status.value,
            time_s=elapsed,
            density_class=density_class(g),
            lb_exact=f"{lb_exact.numerator}/{lb_exact.denominator}" if lb_exact.denominator != 1 else str(lb_exact.numerator),
        )
        log.info("%s %s lb=%s ub=%s %s %.3fs", rec.instance, rec.model, lb, ub, rec.status, elapsed)
        out.append(InstanceResult(rec, coloring))
    return out


def _run_one(args):
    path, kinds, cfg, preprocess = args
    return run_instance(path, kinds, cfg, preprocess)


def bench(
    directory,
    kinds: Sequence[ModelKind | str],
    cfg: BnbConfig | None = None,
    preprocess: bool = True,
    workers: int = 1,
) -> list[BenchRecord]:
    files = sorted(Path(directory).glob("*.col"), key=lambda p: p.stem)
    if not files:
        raise FileNotFoundError(f"no .col files in {directory}")
    cfg = cfg or BnbConfig()
    jobs = [(p, list(kinds), cfg, preprocess) for p in files]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            chunks = list(ex.map(_run_one, jobs))
    else:
        chunks = [_run_one(j) for j in jobs]
    return [rec for chunk in chunks for rec in chunk]


def records_to_csv(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.as_row())
    return buf.getvalue()


def records_from_csv(text: str) -> list[BenchRecord]:
    return [BenchRecord.from_row(row) for row in csv.DictReader(io.StringIO(text))]


def density_summary(records: Iterable[BenchRecord]) -> dict[str, dict[int, tuple[int, int]]]:
    """Per model: density class -> (solved, attempted)."""
    out: dict[str, dict[int, tuple[int, int]]] = {}
    for r in records:
        per = out.setdefault(r.model, {c: (0, 0) for c in range(1, 11)})
        s, a = per[r.density_class]
        per[r.density_class] = (s + r.solved, a + 1)
    return out


def format_summary(summary: dict[str, dict[int, tuple[int, int]]]) -> str:
    head = "model   " + " ".join(f"({(c - 1) / 10:.1f},{c / 10:.1f}]".rjust(10) for c in range(1, 11)) + "     total"
    lines = [head]
    for model, per in sorted(summary.items()):
        cells = " ".join(f"{s}/{a}".rjust(10) for s, a in (per[c] for c in range(1, 11)))
        ts = sum(s for s, _ in per.values())
        ta = sum(a for _, a in per.values())
        lines.append(f"{model:<8}{cells} {f'{ts}/{ta}':>9}")
    return "\n".join(lines)
