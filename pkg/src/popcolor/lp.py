"""Exact rational LP solver for model relaxations.

Bounded-variable primal simplex on a sparse tableau (one dict per row) in
``gmpy2.mpq`` arithmetic. Two phases with artificial variables. Pricing is
either Bland's smallest-index rule, or Dantzig's largest-coefficient rule
that falls back to Bland after a run of degenerate pivots, so the method
terminates on degenerate problems. No floating point is used on the pivot
path.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

from gmpy2 import mpq

from .models import IlpModel, VarRef

MAX_BITS = 1 << 14


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


class LpMagnitudeError(ArithmeticError):
    """A tableau entry outgrew the rational size guard."""


class LpTimeout(RuntimeError):
    """The wall-clock deadline passed inside the simplex loop."""


@dataclass
class LpSolution:
    status: LpStatus
    value: Fraction | None = None
    assignment: dict[VarRef, Fraction] = field(default_factory=dict)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL

    def to_dict(self) -> dict:
        d = {"status": self.status.value, "iterations": self.iterations}
        if self.value is not None:
            d["value"] = fmt_rational(self.value)
            d["value_decimal"] = float(self.value)
            d["assignment"] = {r.name: fmt_rational(v) for r, v in self.assignment.items()}
        return d


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def relax(m: IlpModel) -> IlpModel:
    if not any(v.integer for v in m.variables):
        return m
    return replace(m, variables=tuple(replace(v, integer=False) for v in m.variables))


class CompiledLp:
    """Row-wise sparse copy of a model in mpq, reused across bound changes."""

    def __init__(self, m: IlpModel):
        self.refs = [v.ref for v in m.variables]
        self.index = dict(m.index)
        self.lo = [mpq(v.lo.numerator, v.lo.denominator) for v in m.variables]
        self.hi = [None if v.hi is None else mpq(v.hi.numerator, v.hi.denominator) for v in m.variables]
        self.rows = [[(self.index[r], mpq(c.numerator, c.denominator)) for r, c in con.coefs] for con in m.constraints]
        self.senses = [con.sense for con in m.constraints]
        self.rhs = [mpq(con.rhs.numerator, con.rhs.denominator) for con in m.constraints]
        self.cost = [mpq(0) for _ in self.refs]
        for r, c in m.objective:
            self.cost[self.index[r]] = mpq(c.numerator, c.denominator)
        self.obj_constant = mpq(m.obj_constant.numerator, m.obj_constant.denominator)

    def solve(
        self,
        lo=None,
        hi=None,
        rule: str = "bland",
        max_iter: int | None = None,
        deadline: float | None = None,
    ) -> LpSolution:
        """Solve with optional per-variable bound overrides (lists indexed like ``refs``).

        ``deadline`` is a ``time.perf_counter()`` value; passing it raises
        :class:`LpTimeout`.
        """
        if rule not in ("bland", "dantzig"):
            raise ValueError(f"unknown pivot rule {rule!r}")
        lo = self.lo if lo is None else lo
        hi = self.hi if hi is None else hi
        return _solve(self, lo, hi, rule, max_iter, deadline)


def solve_lp(m: IlpModel, rule: str = "bland") -> LpSolution:
    if any(v.integer for v in m.variables):
        raise ValueError("model has integrality flags; call relax() first")
    return CompiledLp(m).solve(rule=rule)


def _solve(lp: CompiledLp, lo, hi, rule, max_iter, deadline=None) -> LpSolution:
    nvar = len(lp.refs)
    for j in range(nvar):
        if lo[j] is None:
            raise NotImplementedError("free variables are not supported")
        if hi[j] is not None and hi[j] < lo[j]:
            return LpSolution(LpStatus.INFEASIBLE)

    # presolve: substitute fixed variables, shift the rest to lower bound 0
    free = [j for j in range(nvar) if hi[j] is None or hi[j] != lo[j]]
    col_of = {j: k for k, j in enumerate(free)}
    ub = [None if hi[j] is None else hi[j] - lo[j] for j in free]
    const = lp.obj_constant + sum((lp.cost[j] * lo[j] for j in range(nvar)), mpq(0))

    rows: list[dict[int, mpq]] = []
    rhs: list[mpq] = []
    slack_sign: list[int] = []
    for coefs, sense, b in zip(lp.rows, lp.senses, lp.rhs):
        row: dict[int, mpq] = {}
        for j, a in coefs:
            b -= a * lo[j]
            k = col_of.get(j)
            if k is not None:
                row[k] = a
        if not row:
            if (sense == "<=" and b < 0) or (sense == ">=" and b > 0) or (sense == "=" and b != 0):
                return LpSolution(LpStatus.INFEASIBLE)
            continue
        rows.append(row)
        rhs.append(b)
        slack_sign.append(1 if sense == "<=" else -1 if sense == ">=" else 0)

    tab = _Tableau(rows, rhs, slack_sign, ub, [lp.cost[j] for j in free], rule, max_iter, deadline)
    status = tab.run()
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status, iterations=tab.iterations)

    vals = tab.structural_values()
    out: dict[VarRef, Fraction] = {}
    value = const
    for j in range(nvar):
        k = col_of.get(j)
        x = lo[j] if k is None else lo[j] + vals[k]
        out[lp.refs[j]] = _frac(x)
        if k is not None:
            value += lp.cost[j] * vals[k]
    return LpSolution(LpStatus.OPTIMAL, _frac(value), out, tab.iterations)


class _Tableau:
    """Bounded primal simplex state.

    Columns ``0..n-1`` are structural, then one slack per inequality row,
    then one artificial per row that needs it. Every variable has lower
    bound 0 and upper bound ``ub[j]`` (None for +inf).
    """

    def __init__(self, rows, rhs, slack_sign, ub, cost, rule, max_iter, deadline=None):
        self.n = n = len(ub)
        self.deadline = deadline
        self.rule = rule
        self.max_iter = max_iter
        self.iterations = 0
        m = len(rows)
        ub = list(ub)
        cost = list(cost)
        col = n
        for r, s in enumerate(slack_sign):
            if s:
                rows[r][col] = mpq(s)
                ub.append(None)
                cost.append(mpq(0))
                col += 1
        self.n_real = col
        basis = [-1] * m
        for r in range(m):
            if rhs[r] < 0:
                rows[r] = {j: -a for j, a in rows[r].items()}
                rhs[r] = -rhs[r]
            if slack_sign[r]:
                # slack column index: the one added above for this row
                sj = max(j for j in rows[r] if j >= n)
                if rows[r][sj] == 1:
                    basis[r] = sj
        self.art_start = col
        for r in range(m):
            if basis[r] < 0:
                rows[r][col] = mpq(1)
                ub.append(None)
                cost.append(mpq(0))
                basis[r] = col
                col += 1
        self.ncol = col
        # rows hold nonbasic coefficients only; the basic one is implicitly 1
        for r, bj in enumerate(basis):
            del rows[r][bj]
        self.rows = rows
        self.basis = basis
        self.beta = list(rhs)
        self.ub = ub
        self.cost = cost
        self.at_upper = [False] * col
        self.is_basic = [False] * col
        for j in basis:
            self.is_basic[j] = True

    # --- core ---------------------------------------------------------------

    def _reduced_costs(self, cost) -> dict[int, mpq]:
        d = {j: c for j, c in enumerate(cost) if c != 0 and not self.is_basic[j]}
        for r, bj in enumerate(self.basis):
            cb = cost[bj]
            if cb == 0:
                continue
            for j, a in self.rows[r].items():
                if j != bj:
                    d[j] = d.get(j, 0) - cb * a
        return {j: v for j, v in d.items() if v != 0 and not self.is_basic[j]}

    def _entering(self, d, allowed):
        best = None
        best_score = None
        for j, dj in d.items():
            if j >= allowed:
                continue
            if self.at_upper[j]:
                if dj <= 0:
                    continue
            elif dj >= 0:
                continue
            if self.rule == "bland":
                if best is None or j < best:
                    best = j
            else:
                score = abs(dj)
                if best is None or score > best_score or (score == best_score and j < best):
                    best, best_score = j, score
        return best

    def _ratio(self, j):
        """Largest step for entering ``j``; returns (t, leaving row or -1 for a bound flip)."""
        direction = -1 if self.at_upper[j] else 1
        t = self.ub[j]
        leave = -1
        leave_var = j
        for r, row in enumerate(self.rows):
            a = row.get(j)
            if a is None:
                continue
            rate = a * direction  # basic value decreases at this rate per unit step
            bj = self.basis[r]
            if rate > 0:
                lim = self.beta[r] / rate
            else:
                u = self.ub[bj]
                if u is None:
                    continue
                lim = (self.beta[r] - u) / rate
            if t is None or lim < t or (lim == t and bj < leave_var):
                t, leave, leave_var = lim, r, bj
        return t, leave, direction

    def _step(self, j, t, direction):
        if t:
            delta = t * direction
            for r, row in enumerate(self.rows):
                a = row.get(j)
                if a is not None:
                    self.beta[r] -= a * delta

    def _pivot(self, r, j, t, direction, d):
        row = self.rows[r]
        leaving = self.basis[r]
        p = row[j]
        inv = 1 / p
        # leaving variable ends at the bound it hit
        new_beta_j = (self.ub[j] if self.at_upper[j] else 0) + t * direction
        leaves_at_upper = self.beta[r] != 0 and self.ub[leaving] is not None and self.beta[r] == self.ub[leaving]
        del row[j]
        prow = {k: a * inv for k, a in row.items()}
        prow[leaving] = inv
        for big in prow.values():
            if big.numerator.bit_length() > MAX_BITS or big.denominator.bit_length() > MAX_BITS:
                raise LpMagnitudeError(
                    f"tableau entry exceeds {MAX_BITS} bits at iteration {self.iterations} "
                    f"(rows={len(self.rows)}, cols={self.ncol})"
                )
        pitems = list(prow.items())
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            a = other.pop(j, None)
            if a is None:
                continue
            get = other.get
            for k, pk in pitems:
                v = get(k)
                if v is None:
                    other[k] = -a * pk
                else:
                    v -= a * pk
                    if v:
                        other[k] = v
                    else:
                        del other[k]
        dj = d.pop(j, 0)
        if dj:
            for k, pk in prow.items():
                v = d.get(k, 0) - dj * pk
                if v:
                    d[k] = v
                else:
                    d.pop(k, None)
        prow[leaving] = inv
        self.rows[r] = prow
        self.basis[r] = j
        self.beta[r] = new_beta_j
        self.is_basic[j] = True
        self.is_basic[leaving] = False
        self.at_upper[j] = False
        self.at_upper[leaving] = leaves_at_upper

    def _optimize(self, cost, allowed) -> LpStatus:
        d = self._reduced_costs(cost)
        degenerate = 0
        base_rule = self.rule
        while True:
            if self.max_iter is not None and self.iterations >= self.max_iter:
                raise RuntimeError(f"simplex iteration limit {self.max_iter} reached")
            if self.deadline is not None and self.iterations % 16 == 0 and time.perf_counter() > self.deadline:
                raise LpTimeout(f"deadline passed after {self.iterations} pivots")
            if base_rule != "bland":
                self.rule = "bland" if degenerate > 50 else base_rule
            j = self._entering(d, allowed)
            if j is None:
                self.rule = base_rule
                return LpStatus.OPTIMAL
            t, r, direction = self._ratio(j)
            if t is None:
                self.rule = base_rule
                return LpStatus.UNBOUNDED
            self.iterations += 1
            degenerate = degenerate + 1 if t == 0 else 0
            self._step(j, t, direction)
            if r < 0:
                self.at_upper[j] = not self.at_upper[j]
            else:
                self._pivot(r, j, t, direction, d)

    def run(self) -> LpStatus:
        if self.art_start < self.ncol:
            phase1 = [mpq(0)] * self.ncol
            for j in range(self.art_start, self.ncol):
                phase1[j] = mpq(1)
            self._optimize(phase1, self.ncol)
            infeas = sum((self.beta[r] for r, bj in enumerate(self.basis) if bj >= self.art_start), mpq(0))
            if infeas > 0:
                return LpStatus.INFEASIBLE
            self._drop_artificials()
        return self._optimize(self.cost, self.n_real)

    def _drop_artificials(self):
        keep = []
        for r, bj in enumerate(self.basis):
            if bj < self.art_start:
                keep.append(r)
                continue
            row = self.rows[r]
            cand = [k for k in row if k < self.art_start and k != bj]
            if not cand:
                continue  # redundant row
            k = min(cand)
            self._pivot(r, k, mpq(0), 1, {})
            # entering variable keeps its nonbasic value, which is 0 or its upper bound
            keep.append(r)
        self.rows = [{k: a for k, a in self.rows[r].items() if k < self.art_start} for r in keep]
        self.basis = [self.basis[r] for r in keep]
        self.beta = [self.beta[r] for r in keep]

    def structural_values(self) -> list[mpq]:
        vals = [self.ub[j] if self.at_upper[j] else mpq(0) for j in range(self.n)]
        for r, bj in enumerate(self.basis):
            if bj < self.n:
                vals[bj] = self.beta[r]
        return vals


def verify_solution(m: IlpModel, sol: LpSolution) -> bool:
    """Exact feasibility and objective check of an optimal LP solution."""
    if not sol.optimal:
        return False
    vals = sol.assignment
    for v in m.variables:
        x = vals[v.ref]
        if x < v.lo or (v.hi is not None and x > v.hi):
            return False
    if not all(c.satisfied(vals) for c in m.constraints):
        return False
    return m.objective_value(vals) == sol.value


def lp_value(m: IlpModel, bounds: Mapping[VarRef, tuple[Fraction, Fraction]] | None = None) -> Fraction | None:
    """Convenience: optimum of the relaxation, or None when infeasible."""
    mm = relax(m if not bounds else m.with_bounds(bounds))
    sol = solve_lp(mm)
    return sol.value if sol.optimal else None
