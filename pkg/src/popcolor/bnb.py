"""Branch-and-bound for the binary coloring models on top of the exact LP core."""

from __future__ import annotations

import enum
import heapq
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from gmpy2 import mpq

from .lp import CompiledLp, LpStatus, LpTimeout, fmt_rational
from .models import DecodeError, IlpModel, VarRef, extract_coloring
from .preprocess import Coloring

log = logging.getLogger(__name__)


class MipStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"
    LIMIT = "LimitReached"


@dataclass
class BnbConfig:
    time_limit: float = 60.0
    node_limit: int | None = None
    search: str = "depth-first"  # or "best-bound"
    propagate: bool = True
    pivot_rule: str = "dantzig"

    def __post_init__(self):
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node limit must be positive")
        if self.search not in ("depth-first", "best-bound"):
            raise ValueError(f"unknown search order {self.search!r}")


@dataclass
class MipResult:
    lb: Fraction
    ub: int | None
    incumbent: Coloring | None
    status: MipStatus
    nodes: int
    time: float
    root_bound: Fraction | None = None
    lp_iterations: int = 0
    incumbent_values: dict[VarRef, Fraction] | None = field(default=None, repr=False)

    @property
    def lb_int(self) -> int:
        return math.ceil(self.lb)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "lb": self.lb_int,
            "lb_exact": fmt_rational(self.lb),
            "ub": self.ub,
            "root_bound": None if self.root_bound is None else fmt_rational(self.root_bound),
            "nodes": self.nodes,
            "time_s": round(self.time, 3),
            "coloring": None if self.incumbent is None else {str(v): c for v, c in sorted(self.incumbent.items())},
        }


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


def choose_branch_var(assignment: Mapping[VarRef, Fraction], m: IlpModel) -> VarRef:
    """Fractional integer variable with the highest priority.

    Ties go to the fractional part closest to 1/2, then to model order.
    """
    best = None
    best_key = None
    for k, v in enumerate(m.variables):
        if not v.integer:
            continue
        f = _frac_part(Fraction(assignment.get(v.ref, 0)))
        if f == 0:
            continue
        key = (-v.priority, abs(f - Fraction(1, 2)), k)
        if best_key is None or key < best_key:
            best, best_key = v.ref, key
    if best is None:
        raise ValueError("assignment is integral; nothing to branch on")
    return best


class _Propagator:
    """Activity-based bound tightening over the constraint rows."""

    def __init__(self, lp: CompiledLp, integer: list[bool]):
        self.integer = integer
        self.rows: list[tuple[list[tuple[int, mpq]], mpq | None, mpq | None]] = []
        for coefs, sense, b in zip(lp.rows, lp.senses, lp.rhs):
            lo_rhs = b if sense in (">=", "=") else None
            hi_rhs = b if sense in ("<=", "=") else None
            self.rows.append((coefs, lo_rhs, hi_rhs))
        self.col_rows: list[list[int]] = [[] for _ in lp.refs]
        for r, (coefs, _, _) in enumerate(self.rows):
            for j, _ in coefs:
                self.col_rows[j].append(r)
        self.cutoff_row: int | None = None

    def set_cutoff(self, coefs: list[tuple[int, mpq]], rhs: mpq):
        row = (coefs, None, rhs)
        if self.cutoff_row is None:
            self.cutoff_row = len(self.rows)
            self.rows.append(row)
            for j, _ in coefs:
                self.col_rows[j].append(self.cutoff_row)
        else:
            self.rows[self.cutoff_row] = row

    def run(self, lo: list, hi: list, changed: list[int]) -> bool:
        """Tighten ``lo``/``hi`` in place; False when a row proves infeasibility."""
        queue = []
        queued = set()
        for j in changed:
            for r in self.col_rows[j]:
                if r not in queued:
                    queued.add(r)
                    queue.append(r)
        if not changed:
            queue = list(range(len(self.rows)))
            queued = set(queue)
        while queue:
            r = queue.pop()
            queued.discard(r)
            coefs, lo_rhs, hi_rhs = self.rows[r]
            minact = maxact = mpq(0)
            for j, a in coefs:
                if a > 0:
                    minact += a * lo[j]
                    maxact += a * hi[j]
                else:
                    minact += a * hi[j]
                    maxact += a * lo[j]
            if hi_rhs is not None and minact > hi_rhs:
                return False
            if lo_rhs is not None and maxact < lo_rhs:
                return False
            for j, a in coefs:
                span = hi[j] - lo[j]
                if span == 0:
                    continue
                new_lo, new_hi = lo[j], hi[j]
                if hi_rhs is not None and abs(a) * span > hi_rhs - minact:
                    slack = hi_rhs - minact
                    if a > 0:
                        new_hi = lo[j] + slack / a
                    else:
                        new_lo = hi[j] + slack / a
                if lo_rhs is not None and abs(a) * span > maxact - lo_rhs:
                    slack = maxact - lo_rhs
                    if a > 0:
                        new_lo = max(new_lo, hi[j] - slack / a)
                    else:
                        new_hi = min(new_hi, lo[j] - slack / a)
                if self.integer[j]:
                    new_lo = mpq(math.ceil(new_lo))
                    new_hi = mpq(math.floor(new_hi))
                if new_lo > new_hi:
                    return False
                if new_lo > lo[j] or new_hi < hi[j]:
                    # only integer columns are tightened; continuous ones could loop on tiny steps
                    if not self.integer[j]:
                        continue
                    lo[j], hi[j] = max(lo[j], new_lo), min(hi[j], new_hi)
                    for r2 in self.col_rows[j]:
                        if r2 not in queued:
                            queued.add(r2)
                            queue.append(r2)
                    # activities changed; recompute this row on its next visit
                    if r not in queued:
                        queued.add(r)
                        queue.append(r)
                    break
        return True


def _objective_integral(m: IlpModel) -> bool:
    if m.obj_constant.denominator != 1:
        return False
    idx = m.index
    return all(c.denominator == 1 and m.variables[idx[r]].integer for r, c in m.objective)


def solve_mip(
    m: IlpModel,
    cfg: BnbConfig | None = None,
    incumbent: Coloring | None = None,
) -> MipResult:
    """Minimize ``m`` over its integer points.

    ``incumbent`` is an optional proper coloring of ``m.graph`` whose color
    count seeds the upper bound.
    """
    cfg = cfg or BnbConfig()
    t0 = time.perf_counter()
    lp = CompiledLp(m)
    nvar = len(lp.refs)
    integer = [v.integer for v in m.variables]
    for v in m.variables:
        if v.hi is None:
            raise ValueError(f"variable {v.ref.name} has no upper bound; binary models expected")
    int_obj = _objective_integral(m)
    prop = _Propagator(lp, integer) if cfg.propagate else None

    best_val: Fraction | None = None
    best_col: Coloring | None = None
    best_vals = None
    if incumbent is not None:
        best_val = Fraction(len(set(incumbent.values())))
        best_col = dict(incumbent)

    def cutoff_ok(bound: Fraction) -> bool:
        if best_val is None:
            return True
        if int_obj:
            return math.ceil(bound) < best_val
        return bound < best_val

    def install_cutoff():
        if prop is None or best_val is None or not int_obj:
            return
        coefs = [(lp.index[r], mpq(c.numerator, c.denominator)) for r, c in m.objective]
        prop.set_cutoff(coefs, mpq(best_val - 1) - lp.obj_constant)

    install_cutoff()

    nodes = 0
    lp_iters = 0
    root_bound: Fraction | None = None
    limit_hit = False
    improved_by_search = False
    # open nodes: (bound, seq, lo, hi, changed)
    counter = 0
    open_nodes: list = []
    root = (Fraction(-10**18), counter, list(lp.lo), list(lp.hi), None)
    open_nodes.append(root)

    def push(node):
        if cfg.search == "best-bound":
            heapq.heappush(open_nodes, node)
        else:
            open_nodes.append(node)

    def pop():
        if cfg.search == "best-bound":
            return heapq.heappop(open_nodes)
        return open_nodes.pop()

    while open_nodes:
        if (cfg.node_limit is not None and nodes >= cfg.node_limit) or time.perf_counter() - t0 > cfg.time_limit:
            limit_hit = True
            break
        bound, _, lo, hi, changed = pop()
        if not cutoff_ok(bound):
            continue
        if prop is not None and changed is not None:
            if not prop.run(lo, hi, changed):
                nodes += 1
                continue
        try:
            sol = lp.solve(lo, hi, rule=cfg.pivot_rule, deadline=t0 + cfg.time_limit)
        except LpTimeout:
            # the node stays open so its parent bound still counts
            push((bound, counter, lo, hi, None))
            limit_hit = True
            break
        nodes += 1
        lp_iters += sol.iterations
        if root_bound is None:
            root_bound = sol.value if sol.optimal else None
        if sol.status is LpStatus.INFEASIBLE:
            continue
        if sol.status is LpStatus.UNBOUNDED:
            raise ValueError("relaxation is unbounded; coloring models are always bounded")
        if not cutoff_ok(sol.value):
            continue
        vals = sol.assignment
        frac = [k for k in range(nvar) if integer[k] and vals[lp.refs[k]].denominator != 1]
        if not frac:
            col = None
            if m.graph is not None and m.kind is not None:
                try:
                    col = extract_coloring(m, vals)
                except DecodeError as exc:
                    raise AssertionError(f"integral LP point does not decode: {exc}") from exc
            best_val, best_col, best_vals = sol.value, col, dict(vals)
            improved_by_search = True
            log.debug("incumbent %s at node %d", best_val, nodes)
            install_cutoff()
            continue
        ref = choose_branch_var(vals, m)
        j = lp.index[ref]
        child_bound = sol.value
        down_lo, down_hi = list(lo), list(hi)
        down_hi[j] = mpq(math.floor(vals[ref]))
        up_lo, up_hi = list(lo), list(hi)
        up_lo[j] = mpq(math.ceil(vals[ref]))
        counter += 1
        push((child_bound, counter, down_lo, down_hi, [j]))
        counter += 1
        push((child_bound, counter, up_lo, up_hi, [j]))

    elapsed = time.perf_counter() - t0
    ub = None if best_val is None else int(best_val) if best_val.denominator == 1 else best_val
    if limit_hit:
        open_bounds = [b for b, *_ in open_nodes if cutoff_ok(b)]
        if root_bound is None:
            lb = Fraction(0)
        elif open_bounds:
            lb = max(min(open_bounds), root_bound)
        else:
            lb = best_val if best_val is not None else root_bound
        if best_val is not None and lb >= best_val:
            lb = best_val
        if best_val is not None and int_obj and math.ceil(lb) >= best_val:
            status = MipStatus.OPTIMAL
        else:
            status = MipStatus.FEASIBLE if improved_by_search else MipStatus.LIMIT
    elif best_val is None:
        status, lb = MipStatus.INFEASIBLE, Fraction(root_bound) if root_bound is not None else Fraction(0)
    else:
        status, lb = MipStatus.OPTIMAL, best_val
    if best_col is not None and m.graph is not None:
        bad = [(u, v) for u, v in m.graph.sorted_edges() if best_col[u] == best_col[v]]
        if bad:
            raise AssertionError(f"incumbent coloring is improper on {bad}")
    return MipResult(lb, ub, best_col, status, nodes, elapsed, root_bound, lp_iters, best_vals)
