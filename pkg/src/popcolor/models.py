"""Assignment and partial-ordering ILP models for vertex coloring.

Every model is a minimization over binary variables, built as a plain
data structure that the LP core, the branch-and-bound and the MPS writer
all consume. Variables:

* ``x_v_i``: vertex ``v`` gets color ``i``
* ``w_i``:   color ``i`` is used
* ``l_v_i``: the color of ``v`` is smaller than ``i``
* ``g_i_v``: the color of ``v`` is larger than ``i``
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

from .graph import Graph
from .preprocess import Coloring, PrecolorPlan

ZERO = Fraction(0)
ONE = Fraction(1)


class ModelKind(str, enum.Enum):
    ASS = "ASS"
    ASSQ = "ASSQ"
    POP = "POP"
    POP1 = "POP1"
    POP2 = "POP2"
    POPH = "POPH"
    POPH1 = "POPH1"
    POPH2 = "POPH2"

    @property
    def assignment_family(self) -> bool:
        return self in (ModelKind.ASS, ModelKind.ASSQ)

    @property
    def needs_q(self) -> bool:
        return self is not ModelKind.ASS


class VarRef(NamedTuple):
    """Variable identity. ``a``/``b`` follow the subscript order of the name:
    ``x``: (v, i), ``w``: (i, 0), ``l``: (v, i), ``g``: (i, v)."""

    kind: str
    a: int
    b: int = 0

    @property
    def name(self) -> str:
        if self.kind == "w":
            return f"w_{self.a}"
        return f"{self.kind}_{self.a}_{self.b}"

    @classmethod
    def parse(cls, name: str) -> "VarRef":
        parts = name.split("_")
        try:
            if parts[0] == "w" and len(parts) == 2:
                return cls("w", int(parts[1]))
            if parts[0] in ("x", "l", "g") and len(parts) == 3:
                return cls(parts[0], int(parts[1]), int(parts[2]))
        except ValueError:
            pass
        raise ValueError(f"not a model variable name: {name!r}")

    @property
    def vertex(self) -> int | None:
        if self.kind in ("x", "l"):
            return self.a
        if self.kind == "g":
            return self.b
        return None


def X(v: int, i: int) -> VarRef:
    return VarRef("x", v, i)


def W(i: int) -> VarRef:
    return VarRef("w", i)


def L(v: int, i: int) -> VarRef:
    return VarRef("l", v, i)


def G(i: int, v: int) -> VarRef:
    return VarRef("g", i, v)


@dataclass(frozen=True)
class Variable:
    ref: VarRef
    lo: Fraction = ZERO
    hi: Fraction = ONE
    integer: bool = True
    priority: int = 0

    @property
    def binary(self) -> bool:
        return self.integer and self.lo >= 0 and self.hi <= 1


@dataclass(frozen=True)
class LinCon:
    coefs: tuple[tuple[VarRef, Fraction], ...]
    sense: str  # "<=", "=", ">="
    rhs: Fraction
    tag: str

    def activity(self, values: Mapping[VarRef, Fraction]) -> Fraction:
        return sum((c * values.get(r, ZERO) for r, c in self.coefs), ZERO)

    def satisfied(self, values: Mapping[VarRef, Fraction]) -> bool:
        a = self.activity(values)
        if self.sense == "<=":
            return a <= self.rhs
        if self.sense == ">=":
            return a >= self.rhs
        return a == self.rhs


@dataclass(frozen=True)
class IlpModel:
    kind: ModelKind | None
    variables: tuple[Variable, ...]
    constraints: tuple[LinCon, ...]
    objective: tuple[tuple[VarRef, Fraction], ...]
    obj_constant: Fraction = ZERO
    H: int = 0
    q: int | None = None
    graph: Graph | None = field(default=None, compare=False, repr=False)
    name: str = "coloring"

    def __post_init__(self):
        object.__setattr__(self, "_index", {v.ref: k for k, v in enumerate(self.variables)})

    @property
    def index(self) -> dict[VarRef, int]:
        return self._index  # type: ignore[attr-defined]

    def var(self, ref: VarRef) -> Variable:
        return self.variables[self.index[ref]]

    def __contains__(self, ref: VarRef) -> bool:
        return ref in self.index

    def objective_value(self, values: Mapping[VarRef, Fraction]) -> Fraction:
        return self.obj_constant + sum((c * values.get(r, ZERO) for r, c in self.objective), ZERO)

    def with_bounds(self, bounds: Mapping[VarRef, tuple[Fraction, Fraction]]) -> "IlpModel":
        vs = list(self.variables)
        for ref, (lo, hi) in bounds.items():
            k = self.index[ref]
            vs[k] = replace(vs[k], lo=Fraction(lo), hi=Fraction(hi))
        return replace(self, variables=tuple(vs))

    def tag_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.tag] = out.get(c.tag, 0) + 1
        return out

    def is_feasible(self, values: Mapping[VarRef, Fraction]) -> bool:
        for v in self.variables:
            val = values.get(v.ref, ZERO)
            if not (v.lo <= val <= v.hi):
                return False
            if v.integer and Fraction(val).denominator != 1:
                return False
        return all(c.satisfied(values) for c in self.constraints)


class _Builder:
    def __init__(self, g: Graph):
        self.g = g
        self.vars: dict[VarRef, Variable] = {}
        self.cons: list[LinCon] = []

    def var(self, ref: VarRef):
        v = ref.vertex
        prio = self.g.degree(v) if v is not None else 0
        self.vars[ref] = Variable(ref, priority=prio)

    def con(self, terms: Iterable[tuple[VarRef, int]], sense: str, rhs: int, tag: str):
        acc: dict[VarRef, Fraction] = {}
        for ref, c in terms:
            if ref not in self.vars:
                raise KeyError(f"constraint {tag} uses unregistered variable {ref.name}")
            acc[ref] = acc.get(ref, ZERO) + c
        coefs = tuple((r, c) for r, c in acc.items() if c != 0)
        self.cons.append(LinCon(coefs, sense, Fraction(rhs), tag))


def _ass_block(b: _Builder, H: int):
    g = b.g
    for v in g.vertices:
        for i in range(1, H + 1):
            b.var(X(v, i))
    for i in range(1, H + 1):
        b.var(W(i))
    for v in g.vertices:
        b.con([(X(v, i), 1) for i in range(1, H + 1)], "=", 1, "ASS-1")
    for u, v in g.sorted_edges():
        for i in range(1, H + 1):
            b.con([(X(u, i), 1), (X(v, i), 1), (W(i), -1)], "<=", 0, "ASS-2")
    for i in range(1, H + 1):
        b.con([(W(i), 1)] + [(X(v, i), -1) for v in g.vertices], "<=", 0, "ASS-3")
    for i in range(2, H + 1):
        b.con([(W(i), 1), (W(i - 1), -1)], "<=", 0, "ASS-4")


def _assq_rows(b: _Builder, H: int, q: int):
    for v in b.g.vertices:
        if v == q:
            continue
        for i in range(1, H + 1):
            terms = [(X(v, j), 1) for j in range(1, i + 1)] + [(X(q, j), -1) for j in range(1, i + 1)]
            b.con(terms, ">=", 0, "ASSQ-37")


def _g_vars(b: _Builder, H: int):
    for v in b.g.vertices:
        for i in range(1, H + 1):
            b.var(G(i, v))


def _q_rows(b: _Builder, H: int, q: int, tag: str):
    # v = q would be the empty row 0 >= 0
    for v in b.g.vertices:
        if v == q:
            continue
        for i in range(1, H + 1):
            b.con([(G(i, q), 1), (G(i, v), -1)], ">=", 0, tag)


def _pop_lg_block(b: _Builder, H: int):
    """Order variables and their linking rows, shared by POP and POPH."""
    g = b.g
    for v in g.vertices:
        for i in range(1, H + 1):
            b.var(L(v, i))
    _g_vars(b, H)
    for v in g.vertices:
        b.con([(L(v, 1), 1)], "=", 0, "POP-7")
        b.con([(G(H, v), 1)], "=", 0, "POP-7")
    for v in g.vertices:
        for i in range(2, H + 1):
            b.con([(G(i - 1, v), 1), (G(i, v), -1)], ">=", 0, "POP-8")
    for v in g.vertices:
        for i in range(2, H + 1):
            b.con([(G(i - 1, v), 1), (L(v, i), 1)], "=", 1, "POP-9")


def _pop1_block(b: _Builder, H: int, q: int):
    g = b.g
    _g_vars(b, H)
    for v in g.vertices:
        b.con([(G(H, v), 1)], "=", 0, "POP1-17")
    for v in g.vertices:
        for i in range(2, H + 1):
            b.con([(G(i - 1, v), 1), (G(i, v), -1)], ">=", 0, "POP1-18")
    for u, v in g.sorted_edges():
        b.con([(G(1, u), 1), (G(1, v), 1), (G(1, q), 1)], ">=", 2, "POP1-19")
    for u, v in g.sorted_edges():
        for i in range(2, H + 1):
            b.con(
                [(G(i - 1, u), 1), (G(i, u), -1), (G(i - 1, v), 1), (G(i, v), -1), (G(i - 1, q), -1)],
                "<=", 0, "POP1-20",
            )
    _q_rows(b, H, q, "POP1-21")


def _poph1_block(b: _Builder, H: int, q: int):
    g = b.g
    _g_vars(b, H)
    for v in g.vertices:
        for i in range(1, H + 1):
            b.var(X(v, i))
    for v in g.vertices:
        b.con([(G(H, v), 1)], "=", 0, "POPH1-27")
    for v in g.vertices:
        b.con([(X(v, 1), 1), (G(1, v), 1)], "=", 1, "POPH1-28")
    for v in g.vertices:
        for i in range(2, H + 1):
            b.con([(X(v, i), 1), (G(i - 1, v), -1), (G(i, v), 1)], "=", 0, "POPH1-29")
    for u, v in g.sorted_edges():
        b.con([(X(u, 1), 1), (X(v, 1), 1), (G(1, q), -1)], "<=", 0, "POPH1-30")
    for u, v in g.sorted_edges():
        for i in range(2, H + 1):
            b.con([(X(u, i), 1), (X(v, i), 1), (G(i - 1, q), -1)], "<=", 0, "POPH1-31")
    _q_rows(b, H, q, "POPH1-32")


def _pop2_rows(b: _Builder, H: int, q: int):
    for v in sorted(b.g.adjacency[q]):
        for i in range(1, H):
            b.con([(G(i + 1, q), 1), (G(i, v), -1)], ">=", 0, "POP2-23")


def build_model(
    g: Graph,
    kind: ModelKind | str,
    H: int,
    q: int | None = None,
    *,
    lower_bound: int | None = None,
) -> IlpModel:
    """Build one of the eight coloring ILPs over colors ``1..H``.

    ``q`` is the vertex forced to carry the largest color (all kinds except
    ASS). ``lower_bound``, when given, rejects an ``H`` that is provably
    too small.
    """
    kind = ModelKind(kind)
    if not 1 <= H <= max(g.n, 1):
        raise ValueError(f"H must lie in 1..{g.n}, got {H}")
    if lower_bound is not None and H < lower_bound:
        raise ValueError(f"H={H} is below the lower bound {lower_bound}; the model is infeasible")
    if kind.needs_q:
        if q is None or not 1 <= q <= g.n:
            raise ValueError(f"{kind.value} needs a vertex q in 1..{g.n}, got {q}")
    elif q is not None and not 1 <= q <= g.n:
        raise ValueError(f"q={q} is not a vertex")

    b = _Builder(g)
    if kind.assignment_family:
        _ass_block(b, H)
        if kind is ModelKind.ASSQ:
            _assq_rows(b, H, q)
        objective = tuple((W(i), ONE) for i in range(1, H + 1))
        const = ZERO
    else:
        if kind is ModelKind.POP:
            _pop_lg_block(b, H)
            for u, v in g.sorted_edges():
                for i in range(1, H + 1):
                    b.con([(G(i, u), 1), (L(u, i), 1), (G(i, v), 1), (L(v, i), 1)], ">=", 1, "POP-10")
            _q_rows(b, H, q, "POP-11")
        elif kind is ModelKind.POPH:
            _pop_lg_block(b, H)
            for v in g.vertices:
                for i in range(1, H + 1):
                    b.var(X(v, i))
            for v in g.vertices:
                for i in range(1, H + 1):
                    b.con([(X(v, i), 1), (L(v, i), 1), (G(i, v), 1)], "=", 1, "POPH-6")
            for u, v in g.sorted_edges():
                for i in range(1, H + 1):
                    b.con([(X(u, i), 1), (X(v, i), 1)], "<=", 1, "POPH-24")
            _q_rows(b, H, q, "POP-11")
        elif kind in (ModelKind.POP1, ModelKind.POP2):
            _pop1_block(b, H, q)
        else:
            _poph1_block(b, H, q)
        if kind in (ModelKind.POP2, ModelKind.POPH2):
            _pop2_rows(b, H, q)
        objective = tuple((G(i, q), ONE) for i in range(1, H + 1))
        const = ONE

    return IlpModel(
        kind=kind,
        variables=tuple(b.vars.values()),
        constraints=tuple(b.cons),
        objective=objective,
        obj_constant=const,
        H=H,
        q=q,
        graph=g,
        name=f"{g.name or 'graph'}_{kind.value}",
    )


def color_fixings(m: IlpModel, v: int, c: int) -> dict[VarRef, tuple[Fraction, Fraction]]:
    """Bounds that pin vertex ``v`` to color ``c`` in model ``m``."""
    H = m.H
    fix: dict[VarRef, tuple[Fraction, Fraction]] = {}

    def put(ref: VarRef, val: int):
        if ref in m:
            fix[ref] = (Fraction(val), Fraction(val))

    for i in range(1, H + 1):
        put(X(v, i), 1 if i == c else 0)
        put(G(i, v), 1 if i < c else 0)
        put(L(v, i), 1 if i > c else 0)
    if m.kind is not None and m.kind.assignment_family:
        put(W(c), 1)
    return fix


def apply_precoloring(m: IlpModel, plan: PrecolorPlan) -> IlpModel:
    if plan.H != m.H:
        raise ValueError(f"plan was made for H={plan.H}, model has H={m.H}")
    if m.kind is not None and m.kind.needs_q and plan.q != m.q:
        raise ValueError(f"plan designates q={plan.q}, model was built with q={m.q}")
    n = m.graph.n if m.graph is not None else None
    bounds: dict[VarRef, tuple[Fraction, Fraction]] = {}
    for v, c in plan.fixed.items():
        if n is not None and not 1 <= v <= n:
            raise ValueError(f"plan fixes vertex {v}, which is not in the model")
        if not 1 <= c <= m.H:
            raise ValueError(f"plan assigns color {c} outside 1..{m.H}")
        bounds.update(color_fixings(m, v, c))
    if not bounds:
        return m
    merged = {}
    for ref, (lo, hi) in bounds.items():
        var = m.var(ref)
        merged[ref] = (max(var.lo, lo), min(var.hi, hi))
    return m.with_bounds(merged)


def nonzero_count(m: IlpModel) -> int:
    """Stored nonzeros of the constraint matrix (objective row excluded)."""
    return sum(len(c.coefs) for c in m.constraints)


def closed_form_nonzeros(g: Graph, hybrid: bool, H: int) -> int:
    """The closed-form nonzero estimates for the pure and hybrid partial-ordering models.

    They agree with :func:`nonzero_count` on the per-edge terms of the
    strengthened models (edges not incident to ``q``) but not on the
    per-vertex terms; see the README.
    """
    V, E = g.n, g.m
    if hybrid:
        return (9 * V + 3 * E) * H
    return (6 * V + 5 * E) * H - V - 2 * E


class DecodeError(ValueError):
    pass


def extract_coloring(m: IlpModel, assignment: Mapping[VarRef, Fraction]) -> Coloring:
    g = m.graph
    if g is None:
        raise DecodeError("model carries no graph to decode against")
    for ref, val in assignment.items():
        if Fraction(val).denominator != 1:
            raise DecodeError(f"{ref.name} = {val} is not integral")
    H = m.H
    col: Coloring = {}
    if m.kind.assignment_family:
        for v in g.vertices:
            on = [i for i in range(1, H + 1) if assignment.get(X(v, i), 0) == 1]
            if len(on) != 1:
                raise DecodeError(f"vertex {v} has {len(on)} colors set")
            col[v] = on[0]
    else:
        for v in g.vertices:
            col[v] = 1 + sum(int(assignment.get(G(i, v), 0)) for i in range(1, H + 1))
    bad = [(u, v) for u, v in g.sorted_edges() if col[u] == col[v]]
    if bad:
        raise DecodeError(f"decoded coloring is improper on edges {bad}")
    return col


def encode_coloring(m: IlpModel, coloring: Coloring) -> dict[VarRef, Fraction]:
    """Integral assignment of ``m`` representing ``coloring``.

    The inverse of :func:`extract_coloring` for proper colorings using
    colors ``1..H``; for POP-family kinds the coloring must give ``q`` the
    largest color.
    """
    vals: dict[VarRef, Fraction] = {v.ref: ZERO for v in m.variables}
    for v, c in coloring.items():
        for ref, (lo, _) in color_fixings(m, v, c).items():
            vals[ref] = lo
    if m.kind.assignment_family:
        used = max(coloring.values(), default=0)
        for i in range(1, used + 1):
            vals[W(i)] = ONE
    return vals
