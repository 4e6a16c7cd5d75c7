"""Exact polyhedral checks on the LP relaxations of the coloring models.

Each ``check_*`` function returns a list of :class:`Check` results so the
CLI ``verify`` verb and the test suite can share them. All comparisons are
between :class:`fractions.Fraction` values; there is no tolerance anywhere.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from fractions import Fraction

from .families import complete, cycle, myciel, petersen, queen, random_connected
from .graph import Graph
from .lp import fmt_rational, relax, solve_lp
from .models import ModelKind, build_model, nonzero_count
from .mps import canonical, parse_mps, write_mps
from .preprocess import dsatur_upper_bound


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}" + (f"  ({self.detail})" if self.detail else "")


def default_q(g: Graph) -> int:
    """Highest-degree vertex, smallest id on ties."""
    return min(g.vertices, key=lambda v: (-g.degree(v), v))


def nu(g: Graph, kind: ModelKind | str, H: int | None = None, q: int | None = None) -> Fraction:
    """Exact optimum of the LP relaxation of ``kind`` on ``g``.

    ``H`` defaults to the DSATUR bound and ``q`` to :func:`default_q`.
    """
    if H is None:
        H, _ = dsatur_upper_bound(g)
    kind = ModelKind(kind)
    if kind.needs_q and q is None:
        q = default_q(g)
    sol = solve_lp(relax(build_model(g, kind, H, q if kind.needs_q else None)))
    if not sol.optimal:
        raise ArithmeticError(f"relaxation of {kind.value} on {g.name} is {sol.status.value}")
    return sol.value


def check_odd_cycles(ks=(1, 2, 3, 4)) -> list[Check]:
    out = []
    for k in ks:
        g = cycle(2 * k + 1)
        target = Fraction(2) + Fraction(1, k + 1)
        p1, p2 = nu(g, "POP1"), nu(g, "POP2")
        need1 = Fraction(7, 3) if k == 1 else target
        out.append(Check(f"C{2 * k + 1}: nu(POP1) >= {fmt_rational(need1)}", p1 >= need1, f"nu={fmt_rational(p1)}"))
        out.append(Check(f"C{2 * k + 1}: nu(POP2) >= {fmt_rational(target)}", p2 >= target, f"nu={fmt_rational(p2)}"))
    return out


def check_k4_separation() -> list[Check]:
    g = complete(4)
    p1, p2 = nu(g, "POP1", H=4), nu(g, "POP2", H=4)
    return [
        Check("K4, H=4: nu(POP1) <= 12/5", p1 <= Fraction(12, 5), f"nu={fmt_rational(p1)}"),
        Check("K4, H=4: nu(POP2) >= 5/2", p2 >= Fraction(5, 2), f"nu={fmt_rational(p2)}"),
        Check("K4, H=4: nu(POP2) > nu(POP1)", p2 > p1),
    ]


def chain_graphs() -> list[Graph]:
    return [complete(3), cycle(5), petersen(), myciel(3)]


def check_strength_chain(graphs: list[Graph] | None = None) -> list[Check]:
    out = []
    for g in graphs or chain_graphs():
        v = {k: nu(g, k) for k in ("ASS", "POP", "POP1", "POP2")}
        floor1 = 2 + Fraction(1, g.n)
        out.append(Check(f"{g.name}: nu(ASS) = 2", v["ASS"] == 2, f"nu={fmt_rational(v['ASS'])}"))
        out.append(Check(f"{g.name}: nu(POP) = 3/2", v["POP"] == Fraction(3, 2), f"nu={fmt_rational(v['POP'])}"))
        out.append(Check(f"{g.name}: nu(POP1) >= {fmt_rational(floor1)}", v["POP1"] >= floor1, f"nu={fmt_rational(v['POP1'])}"))
        chain = v["POP2"] >= v["POP1"] >= v["ASS"] >= v["POP"]
        shown = " >= ".join(fmt_rational(v[k]) for k in ("POP2", "POP1", "ASS", "POP"))
        out.append(Check(f"{g.name}: POP2 >= POP1 >= ASS >= POP", chain, shown))
    return out


def random_graphs(count: int, seed: int, n_range=(4, 10), ps=(0.3, 0.5)) -> list[Graph]:
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(*n_range)
        g = random_connected(n, ps[k % len(ps)], rng)
        out.append(replace(g, name=f"rand{seed}_{k}"))
    return out


def check_pure_vs_hybrid(count: int = 20, seed: int = 7) -> list[Check]:
    out = []
    mismatches = []
    for g in random_graphs(count, seed):
        H, _ = dsatur_upper_bound(g)
        q = default_q(g)
        for pure, hyb in (("POP", "POPH"), ("POP1", "POPH1"), ("POP2", "POPH2")):
            a, b = nu(g, pure, H, q), nu(g, hyb, H, q)
            if a != b:
                mismatches.append(f"{g.name} {pure}={fmt_rational(a)} {hyb}={fmt_rational(b)}")
    out.append(Check(f"pure = hybrid relaxations on {count} random graphs", not mismatches, "; ".join(mismatches[:3])))
    return out


def sparsity_graphs() -> list[Graph]:
    graphs = [complete(4), complete(5), petersen(), myciel(3), myciel(4), queen(5), queen(6)]
    graphs += [g for g in random_graphs(30, 11, (6, 12), (0.5, 0.7)) if 2 * g.m >= 3 * g.n]
    return graphs


def check_sparsity(graphs: list[Graph] | None = None) -> list[Check]:
    """nonzeros(POPH2) < nonzeros(POP2) at the DSATUR bound, on graphs with |E|/|V| >= 3/2."""
    bad = []
    total = 0
    for g in graphs or sparsity_graphs():
        if 2 * g.m < 3 * g.n:
            continue
        total += 1
        H, _ = dsatur_upper_bound(g)
        q = default_q(g)
        a = nonzero_count(build_model(g, "POPH2", H, q))
        b = nonzero_count(build_model(g, "POP2", H, q))
        if not a < b:
            bad.append(f"{g.name} |E|/|V|={g.m / g.n:.2f} H={H}: POPH2={a} POP2={b}")
    detail = f"{len(bad)} violations: " + "; ".join(bad) if bad else ""
    return [Check(f"nonzeros(POPH2) < nonzeros(POP2) on {total} graphs with |E|/|V| >= 3/2", not bad, detail)]


def check_mps_roundtrip(g: Graph | None = None) -> list[Check]:
    g = g or complete(4)
    out = []
    for kind in ModelKind:
        m = build_model(g, kind, g.n, default_q(g) if kind.needs_q else None)
        back = parse_mps(write_mps(m))
        out.append(Check(f"MPS round-trip {kind.value} on {g.name}", canonical(back) == canonical(m)))
    return out


SUITE = {
    "odd-cycles": check_odd_cycles,
    "k4-separation": check_k4_separation,
    "strength-chain": check_strength_chain,
    "pure-vs-hybrid": check_pure_vs_hybrid,
    "sparsity": check_sparsity,
    "mps-roundtrip": check_mps_roundtrip,
}


def run_suite(names=None) -> list[Check]:
    out = []
    for name in names or SUITE:
        out.extend(SUITE[name]())
    return out
