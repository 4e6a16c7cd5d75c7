"""MPS export/import of :class:`IlpModel`.

Standard sections only. Constraint tags and model metadata travel in
``*`` comment lines, which other readers ignore and :func:`parse_mps`
uses to rebuild the model exactly.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction

from .models import IlpModel, LinCon, ModelKind, Variable, VarRef

log = logging.getLogger(__name__)

OBJ = "OBJ"
_SENSE_TO_MPS = {"<=": "L", ">=": "G", "=": "E"}
_MPS_TO_SENSE = {v: k for k, v in _SENSE_TO_MPS.items()}


class MpsError(ValueError):
    pass


def _num(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        raise MpsError(f"{x} has no finite decimal expansion")
    return format(Decimal(x.numerator) / Decimal(x.denominator), "f")


def _row_names(m: IlpModel) -> list[str]:
    return [f"R{k}" for k in range(1, len(m.constraints) + 1)]


def write_mps(m: IlpModel, free: bool = False) -> str:
    """Serialize ``m``. Fixed format unless ``free`` or a name is too long.

    Falls back to free format (and logs it) when any name exceeds eight
    characters; check the ``* FORMAT`` header line to see which was used.
    """
    rows = _row_names(m)
    names = [v.ref.name for v in m.variables]
    if not free and any(len(s) > 8 for s in names + rows):
        log.warning("names exceed 8 characters; writing free-format MPS")
        free = True

    def line(*fields: str) -> str:
        if free:
            return " " + " ".join(fields)
        # fixed columns: 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
        widths = [(1, 2), (4, 8), (14, 8), (24, 12), (39, 8), (49, 12)]
        out = ""
        for (start, width), f in zip(widths, fields):
            out = out.ljust(start) + f.ljust(width)
        return out.rstrip()

    def entry(kind_field: str, *rest: str) -> str:
        return line(kind_field, *rest)

    out = [
        f"* FORMAT {'FREE' if free else 'FIXED'}",
        f"* KIND {m.kind.value if m.kind else '-'} H {m.H} Q {m.q if m.q is not None else '-'}",
    ]
    for r, con in zip(rows, m.constraints):
        out.append(f"* TAG {r} {con.tag}")
    out.append(f"NAME          {m.name}" if not free else f"NAME {m.name}")
    out.append("ROWS")
    out.append(entry("N", OBJ))
    for r, con in zip(rows, m.constraints):
        out.append(entry(_SENSE_TO_MPS[con.sense], r))

    by_col: dict[VarRef, list[tuple[str, Fraction]]] = {v.ref: [] for v in m.variables}
    for ref, c in m.objective:
        by_col[ref].append((OBJ, c))
    for r, con in zip(rows, m.constraints):
        for ref, c in con.coefs:
            by_col[ref].append((r, c))

    out.append("COLUMNS")
    in_int = False
    marker = 0
    for v in m.variables:
        if v.integer != in_int:
            kind = "'INTORG'" if v.integer else "'INTEND'"
            out.append(line("", f"M{marker}", "'MARKER'", "", kind))
            marker += 1
            in_int = v.integer
        ents = by_col[v.ref] or [(OBJ, Fraction(0))]
        for k in range(0, len(ents), 2):
            pair = ents[k:k + 2]
            fields = ["", v.ref.name, pair[0][0], _num(pair[0][1])]
            if len(pair) == 2:
                fields += [pair[1][0], _num(pair[1][1])]
            out.append(line(*fields))
    if in_int:
        out.append(line("", f"M{marker}", "'MARKER'", "", "'INTEND'"))

    out.append("RHS")
    if m.obj_constant:
        out.append(line("", "RHS", OBJ, _num(-m.obj_constant)))
    for r, con in zip(rows, m.constraints):
        if con.rhs:
            out.append(line("", "RHS", r, _num(con.rhs)))

    out.append("BOUNDS")
    for v in m.variables:
        nm = v.ref.name
        if v.integer and v.lo == 0 and v.hi == 1:
            out.append(line("BV", "BND", nm))
        elif v.hi is not None and v.lo == v.hi:
            out.append(line("FX", "BND", nm, _num(v.lo)))
        else:
            if v.lo != 0:
                out.append(line("LO", "BND", nm, _num(v.lo)))
            if v.hi is None:
                out.append(line("PL", "BND", nm))
            else:
                out.append(line("UP", "BND", nm, _num(v.hi)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def parse_mps(text: str) -> IlpModel:
    """Read MPS written by :func:`write_mps` (or any MPS using its variable names).

    Fields are split on whitespace, so both fixed and free layouts parse
    as long as names contain no spaces.
    """
    tags: dict[str, str] = {}
    kind = None
    H = 0
    q = None
    name = "model"
    section = None
    row_order: list[str] = []
    senses: dict[str, str] = {}
    obj_row = None
    col_order: list[VarRef] = []
    integer: dict[VarRef, bool] = {}
    entries: dict[str, dict[VarRef, Fraction]] = {}
    obj: dict[VarRef, Fraction] = {}
    rhs: dict[str, Fraction] = {}
    obj_const = Fraction(0)
    bounds: dict[VarRef, list] = {}
    in_int = False

    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("*"):
            tok = raw[1:].split()
            if len(tok) == 3 and tok[0] == "TAG":
                tags[tok[1]] = tok[2]
            elif len(tok) == 6 and tok[0] == "KIND":
                kind = None if tok[1] == "-" else ModelKind(tok[1])
                H = int(tok[3])
                q = None if tok[5] == "-" else int(tok[5])
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0]
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else name
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES"):
                raise MpsError(f"unknown section {section!r}")
            continue
        if section == "ROWS":
            s, r = tok
            if s == "N":
                if obj_row is None:
                    obj_row = r
                continue
            if s not in _MPS_TO_SENSE:
                raise MpsError(f"bad row type {s!r}")
            row_order.append(r)
            senses[r] = _MPS_TO_SENSE[s]
            entries[r] = {}
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            ref = VarRef.parse(tok[0])
            if ref not in integer:
                col_order.append(ref)
                integer[ref] = in_int
            for r, val in zip(tok[1::2], tok[2::2]):
                c = Fraction(val)
                if r == obj_row:
                    if c:
                        obj[ref] = c
                elif c:
                    entries[r][ref] = c
        elif section == "RHS":
            for r, val in zip(tok[1::2], tok[2::2]):
                if r == obj_row:
                    obj_const = -Fraction(val)
                else:
                    rhs[r] = Fraction(val)
        elif section == "BOUNDS":
            btype, ref = tok[0], VarRef.parse(tok[2])
            lo, hi = bounds.get(ref, [Fraction(0), None])
            val = Fraction(tok[3]) if len(tok) > 3 else None
            if btype == "BV":
                lo, hi = Fraction(0), Fraction(1)
                integer[ref] = True
            elif btype == "FX":
                lo = hi = val
            elif btype == "LO":
                lo = val
            elif btype == "UP":
                hi = val
            elif btype == "PL":
                hi = None
            else:
                raise MpsError(f"unsupported bound type {btype!r}")
            bounds[ref] = [lo, hi]
        elif section == "RANGES":
            raise MpsError("RANGES are not supported")

    col_index = {r: k for k, r in enumerate(col_order)}
    variables = []
    for ref in col_order:
        lo, hi = bounds.get(ref, [Fraction(0), None])
        if hi is None and integer[ref] and ref not in bounds:
            hi = None
        variables.append(Variable(ref, lo, hi, integer[ref], 0))
    cons = []
    for r in row_order:
        coefs = tuple(sorted(entries[r].items(), key=lambda rc: col_index[rc[0]]))
        cons.append(LinCon(coefs, senses[r], rhs.get(r, Fraction(0)), tags.get(r, r)))
    objective = tuple(sorted(obj.items(), key=lambda rc: col_index[rc[0]]))
    return IlpModel(kind, tuple(variables), tuple(cons), objective, obj_const, H, q, None, name)


def canonical(m: IlpModel) -> IlpModel:
    """Copy of ``m`` with coefficient lists in variable order and priorities cleared.

    MPS carries neither coefficient order within a row nor branching
    priorities, so round-trip comparisons use this form.
    """
    idx = m.index
    cons = tuple(replace(c, coefs=tuple(sorted(c.coefs, key=lambda rc: idx[rc[0]]))) for c in m.constraints)
    obj = tuple(sorted(((r, c) for r, c in m.objective if c), key=lambda rc: idx[rc[0]]))
    vs = tuple(replace(v, priority=0) for v in m.variables)
    return replace(m, variables=vs, constraints=cons, objective=obj, graph=None)
